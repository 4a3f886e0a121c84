"""The standard command packages: scripted access to the whole toolkit.

Thirteen packages cover module creation, linking, labels, pickers, physical
parameters, initial state, bench layout, notes, documents, simulation,
artifact output, introspection, and small utilities.  Every command is a thin
wrapper over the public API, so a script and the equivalent API calls build
identical models.

Handlers close over a Workspace: the current model plus loaded input
signals, the last simulation result, and the artifact directory.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from ..engine import (SimConfig, get_engine, run, stability_check,
                      stiffness_for_frequency)
from ..engine.runner import engine_names
from ..errors import ScriptRuntimeError, WrongArity
from ..io import import_signal, load_model, save_model, write_wav
from ..kinds import (Family, LEGAL_PARAMS, ModuleKind, TABLE_PARAMS,
                     kind_from_name)
from ..labels import SYSTEM_RADICAL
from ..model import Model, SimSettings
from .interp import Interpreter, format_number, need, parse_int, parse_number

LIBRARY_DIR = Path(__file__).parent / "library"


class Workspace:
    """Everything a scripting session operates on."""

    def __init__(self, model: Model | None = None, base_dir=None):
        self.model = model if model is not None else Model()
        self.signals: dict[str, np.ndarray] = {}
        self.last_result = None
        self.engine = "reference"
        self.base_dir = base_dir     # resolves relative artifact paths
        self.progress = None         # optional callable(done, total)

    def path(self, text: str) -> str:
        if self.base_dir is not None and not os.path.isabs(text):
            return os.path.join(os.fspath(self.base_dir), text)
        return text

    def trace_ids(self):
        """Translate the trace setting into compile_program's selection."""
        sel = self.model.sim.trace
        if sel == "all":
            return None
        if sel == "none":
            return ()
        return sorted(self.model.eval_picker(sel))

    def run_config(self, duration=None) -> SimConfig:
        sim = self.model.sim
        return SimConfig(rate=sim.rate,
                         duration=sim.duration if duration is None else duration,
                         decimation=sim.decimation,
                         threads=sim.threads,
                         engine=self.engine)


def _need_range(args, lo, hi, usage):
    if not lo <= len(args) <= hi:
        raise WrongArity(f"expected {lo} to {hi} argument(s): {usage}")


def _ids(ids) -> str:
    return " ".join(str(i) for i in ids)


def _one(model: Model, designator: str) -> int:
    return model.resolve_single(designator)


def _parse_table(text: str):
    nums = [parse_number(w) for w in text.split()]
    if len(nums) % 2:
        raise ScriptRuntimeError(
            f"a table needs an even count of numbers (x y pairs), got {len(nums)}")
    return [(nums[i], nums[i + 1]) for i in range(0, len(nums), 2)]


def _format_value(value) -> str:
    if isinstance(value, tuple):  # sampled table
        return " ".join(format_number(float(v)) for pair in value for v in pair)
    return format_number(value)


def _result(ws: Workspace):
    if ws.last_result is None:
        raise ScriptRuntimeError("no simulation result yet; run one with 'sim run'")
    return ws.last_result


def _kind(name: str):
    try:
        return kind_from_name(name)
    except ValueError as exc:
        raise ScriptRuntimeError(str(exc)) from None


# -- package builders --------------------------------------------------------

def _module_package(ws: Workspace) -> dict:
    def create(interp, args):
        _need_range(args, 1, 2, "module create KIND ?count?")
        kind = _kind(args[0])
        count = parse_int(args[1]) if len(args) == 2 else 1
        if count < 1:
            raise ScriptRuntimeError(f"count must be >= 1, got {count}")
        return _ids(ws.model.add_module(kind) for _ in range(count))

    def delete(interp, args):
        need(args, 1, "module delete DESIGNATOR")
        targets = ws.model.resolve_targets(args[0])
        for mid in targets:
            ws.model.remove_module(mid)
        return str(len(targets))

    def list_(interp, args):
        _need_range(args, 0, 1, "module list ?picker?")
        if args:
            return _ids(ws.model.resolve_targets(args[0]))
        return _ids(ws.model.network.ids())

    def kind(interp, args):
        need(args, 1, "module kind DESIGNATOR")
        return ws.model.network.module(_one(ws.model, args[0])).kind.name

    return {"create": create, "delete": delete, "list": list_, "kind": kind}


def _link_package(ws: Workspace) -> dict:
    def connect(interp, args):
        need(args, 3, "link connect LIA MAT_A MAT_B")
        m = ws.model
        m.connect(_one(m, args[0]), _one(m, args[1]), _one(m, args[2]))
        return ""

    def attach(interp, args):
        need(args, 2, "link attach OBSERVER TARGET")
        ws.model.attach(_one(ws.model, args[0]), _one(ws.model, args[1]))
        return ""

    def disconnect(interp, args):
        need(args, 1, "link disconnect DESIGNATOR")
        targets = ws.model.resolve_targets(args[0])
        for mid in targets:
            ws.model.disconnect(mid)
        return str(len(targets))

    def ends(interp, args):
        need(args, 1, "link ends LIA")
        mid = _one(ws.model, args[0])
        pair = ws.model.network.endpoints.get(mid)
        if pair is None:
            raise ScriptRuntimeError(f"module {mid} is not an interaction")
        return " ".join("-" if e is None else str(e) for e in pair)

    return {"connect": connect, "attach": attach, "disconnect": disconnect, "ends": ends}


def _label_package(ws: Workspace) -> dict:
    def add(interp, args):
        need(args, 2, "label add DESIGNATOR /radical/.../name")
        ws.model.add_label(_one(ws.model, args[0]), args[1])
        return ""

    def remove(interp, args):
        need(args, 1, "label remove /label")
        ws.model.remove_label(args[0])
        return ""

    def of(interp, args):
        need(args, 1, "label of DESIGNATOR")
        return " ".join(ws.model.labels_of(_one(ws.model, args[0])))

    def list_(interp, args):
        _need_range(args, 0, 1, "label list ?/radical?")
        system = f"/{SYSTEM_RADICAL}/"
        pairs = sorted((t, m) for t, m in ws.model.labels.all_labels()
                       if not t.startswith(system))
        if args:
            prefix = args[0].rstrip("/") + "/"
            pairs = [(t, m) for t, m in pairs if t == args[0] or t.startswith(prefix)]
        return "\n".join(f"{text} {mid}" for text, mid in pairs)

    return {"add": add, "remove": remove, "of": of, "list": list_}


def _picker_package(ws: Workspace) -> dict:
    def eval_(interp, args):
        need(args, 1, "picker eval EXPRESSION")
        return _ids(sorted(ws.model.eval_picker(args[0])))

    def count(interp, args):
        need(args, 1, "picker count EXPRESSION")
        return str(len(ws.model.eval_picker(args[0])))

    return {"eval": eval_, "count": count}


def _param_package(ws: Workspace) -> dict:
    def set_(interp, args):
        need(args, 3, "param set DESIGNATOR NAME VALUE")
        targets = ws.model.resolve_targets(args[0])
        name = args[1]
        value = _parse_table(args[2]) if name in TABLE_PARAMS else parse_number(args[2])
        return str(ws.model.set_param(targets, name, value))

    def get(interp, args):
        need(args, 2, "param get DESIGNATOR NAME")
        return _format_value(ws.model.network.get_param(_one(ws.model, args[0]), args[1]))

    return {"set": set_, "get": get}


def _state_package(ws: Workspace) -> dict:
    def set_(interp, args):
        need(args, 3, "state set DESIGNATOR X0|V0 VALUE")
        targets = ws.model.resolve_targets(args[0])
        return str(ws.model.set_initial(targets, args[1], parse_number(args[2])))

    def get(interp, args):
        need(args, 2, "state get DESIGNATOR X0|V0")
        return format_number(ws.model.network.get_initial(_one(ws.model, args[0]), args[1]))

    return {"set": set_, "get": get}


def _bench_package(ws: Workspace) -> dict:
    def move(interp, args):
        need(args, 3, "bench move DESIGNATOR X Y")
        targets = ws.model.resolve_targets(args[0])
        return str(ws.model.set_bench_pos(targets, parse_number(args[1]), parse_number(args[2])))

    def pos(interp, args):
        need(args, 1, "bench pos DESIGNATOR")
        x, y = ws.model.network.module(_one(ws.model, args[0])).bench_pos
        return f"{format_number(x)} {format_number(y)}"

    return {"move": move, "pos": pos}


def _note_package(ws: Workspace) -> dict:
    def add(interp, args):
        need(args, 3, "note add X Y HTML")
        return str(ws.model.add_note((parse_number(args[0]), parse_number(args[1])), args[2]))

    def remove(interp, args):
        need(args, 1, "note remove ID")
        ws.model.remove_note(parse_int(args[0]))
        return ""

    def list_(interp, args):
        need(args, 0, "note list")
        return _ids(sorted(ws.model.notes))

    def get(interp, args):
        need(args, 1, "note get ID")
        nid = parse_int(args[0])
        if nid not in ws.model.notes:
            raise ScriptRuntimeError(f"no note with id {nid}")
        return ws.model.notes[nid].html

    return {"add": add, "remove": remove, "list": list_, "get": get}


def _model_package(ws: Workspace) -> dict:
    def new(interp, args):
        need(args, 0, "model new")
        ws.model = Model()
        ws.last_result = None
        return ""

    def load(interp, args):
        need(args, 1, "model load PATH")
        with open(ws.path(args[0]), "rb") as fh:
            ws.model = load_model(fh.read())
        ws.last_result = None
        return ""

    def save(interp, args):
        need(args, 1, "model save PATH")
        with open(ws.path(args[0]), "wb") as fh:
            fh.write(save_model(ws.model))
        return ""

    def stats(interp, args):
        need(args, 0, "model stats")
        return "\n".join(f"{k} {v}" for k, v in ws.model.stats().items())

    def validate(interp, args):
        need(args, 0, "model validate")
        return str(ws.model.validate(known_signals=ws.signals))

    return {"new": new, "load": load, "save": save, "stats": stats, "validate": validate}


def _sim_package(ws: Workspace) -> dict:
    def config(interp, args):
        _need_range(args, 0, 2, "sim config ?NAME? ?VALUE?")
        sim = ws.model.sim
        if not args:
            return "\n".join(f"{k} {getattr(sim, k)}" for k in SimSettings.KEYS)
        if len(args) == 1:
            if args[0] not in SimSettings.KEYS:
                raise ScriptRuntimeError(f"unknown sim option {args[0]!r}")
            return str(getattr(sim, args[0]))
        ws.model.set_sim_option(args[0], args[1])
        return ""

    def run_(interp, args):
        _need_range(args, 0, 1, "sim run ?duration?")
        duration = parse_int(args[0]) if args else None
        cfg = ws.run_config(duration)
        try:
            result = run(ws.model.network, cfg, signals=ws.signals,
                         trace_ids=ws.trace_ids(), progress=ws.progress,
                         should_cancel=interp.should_cancel)
        except Exception as err:
            partial = getattr(err, "partial", None)
            if partial is not None:
                ws.last_result = partial
            raise
        ws.last_result = result
        return result.stats.summary()

    def check(interp, args):
        need(args, 0, "sim check")
        report = stability_check(ws.model.network)
        return f"worst {report.worst}\n{report}"

    def signal(interp, args):
        _need_range(args, 2, 3, "sim signal NAME PATH ?rate?")
        declared = parse_int(args[2]) if len(args) == 3 else None
        ws.signals[args[0]] = import_signal(ws.path(args[1]), ws.model.sim.rate, declared)
        return str(len(ws.signals[args[0]]))

    def engine(interp, args):
        _need_range(args, 0, 1, "sim engine ?NAME?")
        if args:
            get_engine(args[0])  # InvalidEngine when unknown
            ws.engine = args[0]
            return ""
        return ws.engine

    def tune(interp, args):
        _need_range(args, 1, 2, "sim tune FREQ_HZ ?MASS?")
        m = parse_number(args[1]) if len(args) == 2 else 1.0
        try:
            k = stiffness_for_frequency(float(parse_number(args[0])), m, ws.model.sim.rate)
        except ValueError as exc:
            raise ScriptRuntimeError(str(exc)) from None
        return format_number(k)

    return {"config": config, "run": run_, "check": check, "signal": signal,
            "engine": engine, "tune": tune}


def _out_package(ws: Workspace) -> dict:
    def wav(interp, args):
        _need_range(args, 1, 3, "out wav PATH ?float32|pcm16? ?normalize?")
        fmt, normalize = "float32", False
        for extra in args[1:]:
            if extra == "normalize":
                normalize = True
            else:
                fmt = extra
        result = _result(ws)
        data = [c.data for c in result.channels]
        info = write_wav(ws.path(args[0]), result.rate, np.asarray(data),
                         fmt=fmt, normalize=normalize)
        return (f"frames {info.frames}\nchannels {info.channels}\n"
                f"format {info.fmt}\nclipped {info.clipped}")

    def trace(interp, args):
        need(args, 1, "out trace PATH")
        result = _result(ws)
        if result.trace is None:
            raise ScriptRuntimeError("the run recorded no motion trace")
        tr = result.trace
        np.savez(ws.path(args[0]), frames=tr.frames,
                 mat_ids=np.asarray(tr.mat_ids, dtype=np.int64),
                 decimation=tr.decimation, rate=result.rate)
        return f"frames {len(tr.frames)}\nmodules {len(tr.mat_ids)}"

    return {"wav": wav, "trace": trace}


def _info_package(ws: Workspace) -> dict:
    def kinds(interp, args):
        need(args, 0, "info kinds")
        return "\n".join(f"{k.name} {k.family.value}" for k in ModuleKind)

    def params(interp, args):
        need(args, 1, "info params KIND")
        kind = _kind(args[0])
        return " ".join(sorted(LEGAL_PARAMS[kind]))

    def engines(interp, args):
        need(args, 0, "info engines")
        return " ".join(engine_names())

    def version(interp, args):
        need(args, 0, "info version")
        from .. import __version__
        return __version__

    return {"kinds": kinds, "params": params, "engines": engines, "version": version}


_FORMAT_CONVERSIONS = "diouxXeEfFgGs%"


def _apply_format(fmt: str, args: list[str]) -> str:
    """printf-style formatting; arguments coerced per conversion character."""
    values = []
    i = n = 0
    while i < len(fmt):
        if fmt[i] != "%":
            i += 1
            continue
        j = i + 1
        while j < len(fmt) and fmt[j] not in _FORMAT_CONVERSIONS:
            j += 1
        if j >= len(fmt):
            raise ScriptRuntimeError(f"dangling % in format {fmt!r}")
        conv = fmt[j]
        if conv != "%":
            if n >= len(args):
                raise ScriptRuntimeError(
                    f"format {fmt!r} needs more arguments (got {len(args)})")
            arg = args[n]
            n += 1
            if conv in "diouxX":
                values.append(parse_int(arg))
            elif conv in "eEfFgG":
                values.append(float(parse_number(arg)))
            else:
                values.append(arg)
        i = j + 1
    if n != len(args):
        raise ScriptRuntimeError(f"format {fmt!r} takes {n} argument(s), got {len(args)}")
    try:
        return fmt % tuple(values)
    except ValueError as exc:
        raise ScriptRuntimeError(f"bad format {fmt!r}: {exc}") from None


def _util_package(ws: Workspace) -> dict:
    def range_(interp, args):
        _need_range(args, 1, 3, "util range ?start? STOP ?step?")
        nums = [parse_int(a) for a in args]
        if len(nums) == 1:
            lo, hi, step = 0, nums[0], 1
        elif len(nums) == 2:
            lo, hi, step = nums[0], nums[1], 1
        else:
            lo, hi, step = nums
        if step == 0:
            raise ScriptRuntimeError("step must not be 0")
        return _ids(range(lo, hi, step))

    def format_(interp, args):
        if not args:
            raise WrongArity("expected at least 1 argument(s): util format FMT args...")
        return _apply_format(args[0], args[1:])

    def source(interp, args):
        need(args, 1, "util source PATH")
        with open(ws.path(args[0]), "r", encoding="utf-8") as fh:
            return interp.eval_text(fh.read())

    return {"range": range_, "format": format_, "source": source}


STANDARD_PACKAGES = ("module", "link", "label", "picker", "param", "state",
                     "bench", "note", "model", "sim", "out", "info", "util")

_BUILDERS = {
    "module": _module_package,
    "link": _link_package,
    "label": _label_package,
    "picker": _picker_package,
    "param": _param_package,
    "state": _state_package,
    "bench": _bench_package,
    "note": _note_package,
    "model": _model_package,
    "sim": _sim_package,
    "out": _out_package,
    "info": _info_package,
    "util": _util_package,
}


def register_standard_packages(interp: Interpreter, ws: Workspace) -> None:
    for name in STANDARD_PACKAGES:
        interp.registry.register_package(name, _BUILDERS[name](ws))


def load_library(interp: Interpreter, directory=None) -> list[str]:
    """Evaluate every bundled .pnsl script (sorted); returns their stems."""
    directory = Path(directory) if directory is not None else LIBRARY_DIR
    loaded = []
    for path in sorted(directory.glob("*.pnsl")):
        interp.eval_text(path.read_text(encoding="utf-8"))
        loaded.append(path.stem)
    return loaded


def standard_interpreter(ws: Workspace | None = None,
                         with_library: bool = True) -> tuple[Interpreter, Workspace]:
    """An interpreter with all 13 packages bound to a (fresh) workspace."""
    if ws is None:
        ws = Workspace()
    interp = Interpreter()
    register_standard_packages(interp, ws)
    if with_library:
        load_library(interp)
    return interp, ws
