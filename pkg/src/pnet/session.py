"""The session: one document, one writer, an event stream, at most one sim.

A session answers JSON-shaped requests ({id, verb, payload}) with exactly one
response each, and pushes events (model-changed, sim-progress, sim-finished,
sim-failed) to subscribers.  Transports live in service.py; this module is
transport-free and directly usable in-process.

All verbs are serialized on one lock, so responses and events reflect a
single total order of mutations.  sim.cancel alone bypasses the lock: it
only flips a flag, and must stay reachable while a long request runs.
"""

from __future__ import annotations

import threading

from .engine import SimConfig, compile_program, run_program
from .engine.runner import engine_names
from .errors import (BadVerb, ConflictingSimulation, NoSuchChannel, PnetError,
                     SimCancelled)
from .io import load_model, save_model
from .model import Model
from .script.commands import Workspace, standard_interpreter

EVENT_KINDS = ("model-changed", "sim-progress", "sim-finished", "sim-failed")


def _error_payload(err: Exception) -> dict:
    if isinstance(err, OSError):
        kind = "IoError"
    elif isinstance(err, PnetError):
        kind = type(err).__name__
    else:
        kind = type(err).__name__
    out = {"type": kind, "message": str(err)}
    for attr in ("step", "module_id", "partial_steps", "line", "col",
                 "op_index", "applied"):
        value = getattr(err, attr, None)
        if value is not None:
            out[attr] = value
    return out


class Session:
    """Owns a workspace (model + signals + last result) behind a verb API."""

    def __init__(self, base_dir=None):
        self.interp, self.ws = standard_interpreter(Workspace(base_dir=base_dir))
        self._lock = threading.RLock()
        self._emit_lock = threading.Lock()
        self._subscribers: list = []
        self._sim_thread: threading.Thread | None = None
        self._cancel = False
        self.ws.progress = self._progress
        self.interp.should_cancel = lambda: self._cancel

    # -- events --------------------------------------------------------------

    def subscribe(self, callback):
        """callback(event_dict); returns an unsubscribe callable."""
        with self._emit_lock:
            self._subscribers.append(callback)

        def unsubscribe():
            with self._emit_lock:
                if callback in self._subscribers:
                    self._subscribers.remove(callback)
        return unsubscribe

    def _emit(self, kind: str, payload: dict):
        event = {"event": kind, "revision": self.ws.model.revision, "payload": payload}
        with self._emit_lock:
            targets = list(self._subscribers)
        for cb in targets:
            try:
                cb(event)
            except Exception:
                pass  # a broken subscriber must not break the session

    def _progress(self, done: int, total: int):
        self._emit("sim-progress", {"done": done, "total": total})

    # -- request handling ----------------------------------------------------

    def handle(self, request) -> dict:
        rid = request.get("id") if isinstance(request, dict) else None
        try:
            if not isinstance(request, dict) or not isinstance(request.get("verb"), str):
                raise BadVerb("request must be an object with a string verb")
            verb = request["verb"]
            payload = request.get("payload") or {}
            if not isinstance(payload, dict):
                raise BadVerb("payload must be an object")
            if verb == "sim.cancel":      # must not wait for the writer lock
                return {"id": rid, "ok": True, "payload": self._verb_sim_cancel(payload)}
            handler = _VERBS.get(verb)
            if handler is None:
                raise BadVerb(f"unknown verb {verb!r}")
            with self._lock:
                before = self.ws.model.revision
                try:
                    result = handler(self, payload)
                finally:
                    # Partially applied batches/scripts still changed the
                    # document; subscribers must hear about it either way.
                    if self.ws.model.revision != before:
                        self._emit("model-changed", {"stats": self.ws.model.stats()})
            return {"id": rid, "ok": True, "payload": result}
        except Exception as err:
            return {"id": rid, "ok": False, "error": _error_payload(err)}

    def close(self):
        self._cancel = True
        thread = self._sim_thread
        if thread is not None and thread.is_alive():
            thread.join()

    # -- verbs ---------------------------------------------------------------

    def _verb_model_load(self, payload) -> dict:
        path = _field(payload, "path", str)
        with open(self.ws.path(path), "rb") as fh:
            self.ws.model = load_model(fh.read())
        self.ws.last_result = None
        return {"stats": self.ws.model.stats()}

    def _verb_model_save(self, payload) -> dict:
        path = _field(payload, "path", str)
        blob = save_model(self.ws.model)
        with open(self.ws.path(path), "wb") as fh:
            fh.write(blob)
        return {"bytes": len(blob)}

    def _verb_script_run(self, payload) -> dict:
        source = _field(payload, "source", str)
        self._cancel = False
        self.interp.output.clear()
        result = self.interp.eval_text(source)
        return {"result": result, "output": list(self.interp.output),
                "revision": self.ws.model.revision}

    def _verb_picker_eval(self, payload) -> dict:
        expr = _field(payload, "expr", str)
        return {"ids": sorted(self.ws.model.eval_picker(expr))}

    def _verb_edit_apply(self, payload) -> dict:
        ops = payload.get("ops")
        if not isinstance(ops, list):
            raise BadVerb("edit.apply needs an ops array")
        results = []
        for index, op in enumerate(ops):
            try:
                results.append(_apply_op(self.ws.model, op))
            except Exception as err:
                # Ops before the failing one stay applied (each op is
                # atomic, the batch is not); mark where it stopped.
                err.op_index = index
                err.applied = index
                raise
        return {"applied": len(ops), "results": results}

    def _verb_sim_start(self, payload) -> dict:
        if self._sim_thread is not None and self._sim_thread.is_alive():
            raise ConflictingSimulation("a simulation is already running")
        duration = payload.get("duration")
        if duration is not None:
            duration = int(duration)
        cfg = self.ws.run_config(duration)
        program = compile_program(
            self.ws.model.network, cfg.duration, rate=cfg.rate,
            signals=self.ws.signals, trace_ids=self.ws.trace_ids(),
            decimation=cfg.decimation)
        self._cancel = False
        self._sim_thread = threading.Thread(
            target=self._sim_worker, args=(program, cfg), daemon=True)
        self._sim_thread.start()
        return {"started": True, "steps": cfg.duration, "revision": program.revision}

    def _sim_worker(self, program, cfg):
        try:
            result = run_program(program, cfg, progress=self._progress,
                                 should_cancel=lambda: self._cancel)
        except Exception as err:
            partial = getattr(err, "partial", None)
            if partial is not None:
                self.ws.last_result = partial
            self._emit("sim-failed", _error_payload(err))
            return
        self.ws.last_result = result
        self._emit("sim-finished", {
            "stats": {"steps": result.stats.steps,
                      "wall_s": result.stats.wall_s,
                      "steps_per_sec": result.stats.steps_per_sec,
                      "peaks": result.stats.peaks},
            "channels": result.channel_names(),
        })

    def _verb_sim_cancel(self, payload) -> dict:
        running = self._sim_thread is not None and self._sim_thread.is_alive()
        self._cancel = True
        return {"cancelling": running}

    def _last_result(self):
        if self.ws.last_result is None:
            raise NoSuchChannel("no simulation result is available")
        return self.ws.last_result

    def _verb_result_wave(self, payload) -> dict:
        result = self._last_result()
        channel = result.channel(_field(payload, "channel", str))
        start = int(payload.get("start", 0))
        count = payload.get("count")
        data = channel.data[start:]
        if count is not None:
            data = data[: int(count)]
        return {"channel": channel.name, "rate": result.rate, "start": start,
                "total": len(channel.data), "samples": [float(v) for v in data]}

    def _verb_result_trace(self, payload) -> dict:
        result = self._last_result()
        if result.trace is None:
            raise NoSuchChannel("the run recorded no motion trace")
        tr = result.trace
        start = int(payload.get("start", 0))
        count = payload.get("count")
        frames = tr.frames[start:]
        if count is not None:
            frames = frames[: int(count)]
        return {"decimation": tr.decimation, "rate": result.rate,
                "mat_ids": [int(i) for i in tr.mat_ids], "start": start,
                "total": len(tr.frames),
                "frames": [[float(v) for v in row] for row in frames]}

    def _verb_info_stats(self, payload) -> dict:
        model = self.ws.model
        running = self._sim_thread is not None and self._sim_thread.is_alive()
        last = None
        if self.ws.last_result is not None:
            r = self.ws.last_result
            last = {"steps": r.stats.steps, "rate": r.rate,
                    "channels": r.channel_names(), "engine": r.engine}
        return {"model": model.stats(),
                "sim": {k: getattr(model.sim, k) for k in model.sim.KEYS},
                "signals": sorted(self.ws.signals),
                "engines": engine_names(),
                "running": running,
                "last_run": last}


def _field(payload: dict, name: str, kind) -> object:
    value = payload.get(name)
    if not isinstance(value, kind):
        raise BadVerb(f"payload needs {name!r} ({kind.__name__})")
    return value


def _apply_op(model: Model, op) -> dict:
    if not isinstance(op, dict) or not isinstance(op.get("op"), str):
        raise BadVerb("each op must be an object with an 'op' string")
    name = op["op"]
    if name == "create":
        from .kinds import kind_from_name
        kind = kind_from_name(_field(op, "kind", str))
        count = int(op.get("count", 1))
        pos = op.get("pos", (0.0, 0.0))
        ids = [model.add_module(kind, tuple(pos)) for _ in range(count)]
        return {"ids": ids}
    if name == "delete":
        targets = _targets(model, op)
        for mid in targets:
            model.remove_module(mid)
        return {"count": len(targets)}
    if name == "connect":
        model.connect(model.resolve_single(op.get("lia")),
                      model.resolve_single(op.get("a")),
                      model.resolve_single(op.get("b")))
        return {}
    if name == "attach":
        model.attach(model.resolve_single(op.get("module")),
                     model.resolve_single(op.get("target")))
        return {}
    if name == "disconnect":
        targets = _targets(model, op)
        for mid in targets:
            model.disconnect(mid)
        return {"count": len(targets)}
    if name == "set-param":
        value = op.get("value")
        if isinstance(value, list):
            value = [tuple(pair) for pair in value]
        return {"count": model.set_param(_targets(model, op),
                                         _field(op, "name", str), value)}
    if name == "set-initial":
        return {"count": model.set_initial(_targets(model, op),
                                           _field(op, "name", str), op.get("value"))}
    if name == "move":
        return {"count": model.set_bench_pos(_targets(model, op),
                                             op.get("x", 0.0), op.get("y", 0.0))}
    if name == "set-signal":
        return {"count": model.set_signal_ref(_targets(model, op), op.get("name"))}
    if name == "label-add":
        model.add_label(model.resolve_single(op.get("module")), _field(op, "text", str))
        return {}
    if name == "label-remove":
        model.remove_label(_field(op, "text", str))
        return {}
    if name == "note-add":
        pos = op.get("pos", (0.0, 0.0))
        return {"id": model.add_note(tuple(pos), _field(op, "html", str))}
    if name == "note-remove":
        model.remove_note(int(op.get("id", 0)))
        return {}
    if name == "sim-option":
        model.set_sim_option(_field(op, "name", str), op.get("value"))
        return {}
    raise BadVerb(f"unknown edit op {name!r}")


def _targets(model: Model, op: dict) -> list[int]:
    spec = op.get("targets")
    if isinstance(spec, int):
        return [model.resolve_single(spec)]
    if isinstance(spec, str):
        return model.resolve_targets(spec)
    if isinstance(spec, list):
        return sorted({model.resolve_single(t) for t in spec})
    raise BadVerb("op needs 'targets' (id, designator string, or id array)")


_VERBS = {
    "model.load": Session._verb_model_load,
    "model.save": Session._verb_model_save,
    "script.run": Session._verb_script_run,
    "picker.eval": Session._verb_picker_eval,
    "edit.apply": Session._verb_edit_apply,
    "sim.start": Session._verb_sim_start,
    "sim.cancel": Session._verb_sim_cancel,
    "result.wave": Session._verb_result_wave,
    "result.trace": Session._verb_result_trace,
    "info.stats": Session._verb_info_stats,
}
