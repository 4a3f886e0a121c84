"""Model documents: a canonical JSON form of everything the user can edit.

The writer is deterministic: entries are emitted in sorted order with a fixed
key layout, so saving the same model twice yields identical bytes and a
load/save round trip is the identity on the file.  The reader rebuilds the
model object graph directly (no replayed edit commands), restoring ids and
the revision counter exactly as saved.
"""

from __future__ import annotations

import json
import math

from ..errors import (DocumentParseError, IntegrityError, PnetError,
                      VersionUnsupported)
from ..kinds import (ATTACH_TARGET_FAMILY, Family, LEGAL_PARAMS, LIA_KINDS,
                     MAT_KINDS, ModuleKind, SIGNAL_KINDS, TABLE_PARAMS,
                     default_params, validate_table)
from ..labels import SYSTEM_RADICAL
from ..model import BenchNote, Model, SimSettings
from ..network import InitialState, Module

FORMAT_NAME = "pnet-model"
FORMAT_VERSION = 1


# -- saving -----------------------------------------------------------------

def _param_value(name, value):
    if name in TABLE_PARAMS:
        return [[x, y] for x, y in value]
    return value


def _module_entry(model: Model, mod: Module) -> dict:
    net = model.network
    entry = {
        "id": mod.id,
        "kind": mod.kind.name,
        "bench": [mod.bench_pos[0], mod.bench_pos[1]],
        "params": {n: _param_value(n, mod.params[n]) for n in sorted(mod.params)},
    }
    if mod.init is not None:
        entry["init"] = {"X0": mod.init.x0, "V0": mod.init.v0}
    if mod.kind in LIA_KINDS:
        entry["ends"] = list(net.endpoints[mod.id])
    if mod.id in net.attachments:
        entry["target"] = net.attachments[mod.id]
    if mod.signal_ref is not None:
        entry["signal"] = mod.signal_ref
    return entry


def _user_labels(model: Model) -> list[list]:
    prefix = f"/{SYSTEM_RADICAL}/"
    pairs = [(text, mid) for text, mid in model.labels.all_labels()
             if not text.startswith(prefix)]
    return [[text, mid] for text, mid in sorted(pairs)]


def save_model(model: Model) -> bytes:
    doc = {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "revision": model.revision,
        "next_id": model.network._next_id,
        "next_note_id": model._next_note_id,
        "sim": {key: getattr(model.sim, key) for key in SimSettings.KEYS},
        "modules": [_module_entry(model, model.network.modules[i])
                    for i in model.network.ids()],
        "labels": _user_labels(model),
        "notes": [{"id": n.id, "pos": [n.pos[0], n.pos[1]], "html": n.html}
                  for _, n in sorted(model.notes.items())],
    }
    return (json.dumps(doc, indent=1) + "\n").encode("utf-8")


# -- loading ----------------------------------------------------------------

def _require(cond: bool, message: str):
    if not cond:
        raise DocumentParseError(message)


def _get(obj: dict, key: str, types, message: str):
    value = obj.get(key)
    _require(isinstance(value, types), f"{message} (key {key!r})")
    return value


def _integrity(cond: bool, message: str):
    if not cond:
        raise IntegrityError(message)


def _load_params(kind: ModuleKind, raw: dict) -> dict:
    params = default_params(kind)
    for name, value in raw.items():
        _integrity(name in LEGAL_PARAMS[kind],
                   f"parameter {name!r} is not legal on {kind.name}")
        try:
            if name in TABLE_PARAMS:
                params[name] = validate_table(value)
            else:
                params[name] = float(value)
        except PnetError as exc:
            raise IntegrityError(f"bad table for {name}: {exc}") from exc
        except (TypeError, ValueError):
            raise DocumentParseError(f"parameter {name} must be a number") from None
        if name not in TABLE_PARAMS:
            _integrity(math.isfinite(params[name]), f"parameter {name} must be finite")
    if "M" in params:
        _integrity(params["M"] > 0.0, f"inertia must be > 0, got {params['M']}")
    if "K" in params:
        _integrity(params["K"] >= 0.0, f"stiffness must be >= 0, got {params['K']}")
    return params


def _load_module(entry) -> Module:
    _require(isinstance(entry, dict), "each module entry must be an object")
    mid = _get(entry, "id", int, "module id must be an integer")
    _integrity(mid >= 1, f"module id must be >= 1, got {mid}")
    kind_name = _get(entry, "kind", str, "module kind must be a string")
    try:
        kind = ModuleKind[kind_name]
    except KeyError:
        raise IntegrityError(f"unknown module kind {kind_name!r}") from None
    bench = _get(entry, "bench", list, "bench position must be a pair")
    _require(len(bench) == 2 and all(isinstance(v, (int, float)) for v in bench),
             "bench position must be two numbers")
    _integrity(all(math.isfinite(v) for v in bench), "bench position must be finite")
    raw_params = _get(entry, "params", dict, "params must be an object")
    params = _load_params(kind, raw_params)

    init = None
    if kind in MAT_KINDS:
        raw_init = _get(entry, "init", dict, "MAT modules need an init object")
        x0 = _get(raw_init, "X0", (int, float), "X0 must be a number")
        v0 = _get(raw_init, "V0", (int, float), "V0 must be a number")
        _integrity(math.isfinite(x0) and math.isfinite(v0), "initial state must be finite")
        init = InitialState(float(x0), float(v0))
    else:
        _require("init" not in entry, f"{kind.name} carries no initial state")

    signal = entry.get("signal")
    if signal is not None:
        _require(isinstance(signal, str), "signal reference must be a string")
        _integrity(kind in SIGNAL_KINDS, f"{kind.name} takes no input signal")

    return Module(mid, kind, params, init, (float(bench[0]), float(bench[1])),
                  signal)


def load_model(data) -> Model:
    """Parse a document into a fresh model; raises before touching anything."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        err = DocumentParseError(f"not valid JSON: {exc.msg} at line {exc.lineno}")
        err.line, err.col = exc.lineno, exc.colno
        raise err from exc
    _require(isinstance(doc, dict), "document root must be an object")
    if doc.get("format") != FORMAT_NAME:
        raise DocumentParseError(f"not a {FORMAT_NAME} document")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionUnsupported(
            f"format_version {version!r} is not supported (this build reads {FORMAT_VERSION})")

    model = Model()
    net = model.network

    entries = _get(doc, "modules", list, "modules must be an array")
    for raw in entries:
        mod = _load_module(raw)
        _integrity(mod.id not in net.modules, f"duplicate module id {mod.id}")
        net.modules[mod.id] = mod
        model.labels.register_system(mod.id)

    # Link structure second, so forward references within the file work.
    for raw in entries:
        mod = net.modules[raw["id"]]
        if mod.kind in LIA_KINDS:
            ends = _get(raw, "ends", list, "interactions need an ends array")
            _require(len(ends) == 2, "ends must hold exactly two entries")
            for e in ends:
                if e is not None:
                    _integrity(isinstance(e, int) and e in net.modules,
                               f"interaction {mod.id} endpoint {e!r} does not exist")
                    _integrity(net.modules[e].family is Family.MAT,
                               f"interaction {mod.id} endpoint {e} is not a material module")
            _integrity(ends[0] is None or ends[0] != ends[1],
                       f"interaction {mod.id} joins module {ends[0]} to itself")
            net.endpoints[mod.id] = list(ends)
        else:
            _require("ends" not in raw, f"{mod.kind.name} has no endpoints")
        if "target" in raw:
            want = ATTACH_TARGET_FAMILY.get(mod.kind)
            _integrity(want is not None, f"{mod.kind.name} cannot attach to a target")
            tgt = raw["target"]
            _integrity(isinstance(tgt, int) and tgt in net.modules,
                       f"module {mod.id} target {tgt!r} does not exist")
            _integrity(net.modules[tgt].family is want,
                       f"module {mod.id} must target a {want.value} module")
            net.attachments[mod.id] = tgt

    next_id = _get(doc, "next_id", int, "next_id must be an integer")
    top = max(net.modules, default=0)
    _integrity(next_id > top, f"next_id {next_id} collides with module id {top}")
    net._next_id = next_id

    for pair in _get(doc, "labels", list, "labels must be an array"):
        _require(isinstance(pair, list) and len(pair) == 2, "each label is a [text, id] pair")
        text, mid = pair
        _require(isinstance(text, str) and isinstance(mid, int), "each label is a [text, id] pair")
        _integrity(mid in net.modules, f"label {text!r} points at missing module {mid}")
        try:
            model.labels.add(mid, text)
        except PnetError as exc:
            raise IntegrityError(f"label {text!r}: {exc}") from exc

    for raw in _get(doc, "notes", list, "notes must be an array"):
        _require(isinstance(raw, dict), "each note must be an object")
        nid = _get(raw, "id", int, "note id must be an integer")
        pos = _get(raw, "pos", list, "note position must be a pair")
        _require(len(pos) == 2 and all(isinstance(v, (int, float)) for v in pos),
                 "note position must be two numbers")
        html = _get(raw, "html", str, "note body must be a string")
        _integrity(nid >= 1 and nid not in model.notes, f"bad note id {nid}")
        model.notes[nid] = BenchNote(nid, (float(pos[0]), float(pos[1])), html)
    next_note = _get(doc, "next_note_id", int, "next_note_id must be an integer")
    _integrity(next_note > max(model.notes, default=0), "next_note_id collides with a note")
    model._next_note_id = next_note

    sim = _get(doc, "sim", dict, "sim settings must be an object")
    for key in SimSettings.KEYS:
        _require(key in sim, f"sim settings must include {key!r}")
        try:
            model.sim.set_option(key, sim[key])
        except PnetError as exc:
            raise IntegrityError(f"sim option {key}: {exc}") from exc
        except (TypeError, ValueError):
            raise DocumentParseError(f"sim option {key} must be an integer") from None

    revision = _get(doc, "revision", int, "revision must be an integer")
    _integrity(revision >= 0, f"revision must be >= 0, got {revision}")
    model._revision = revision
    net.revision = revision
    return model
