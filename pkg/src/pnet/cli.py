"""Command line front end.

Subcommands: run (scripts), simulate (document to WAV), inspect (picker
listing), bench (chain throughput CSV), serve (session API over WebSocket
or stdio).  Exit codes: 0 success, 1 domain error, 2 usage error.

Every flag with a value can also be set through an environment variable
with a PNET_ prefix (PNET_THREADS, PNET_DURATION, ...); explicit flags win.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import PnetError

_TRUTHY = ("1", "true", "yes", "on")


def _env(name: str):
    return os.environ.get("PNET_" + name)


def _resolve(flag_value, env_name: str, default, cast):
    """flag > PNET_ env var > default."""
    if flag_value is not None:
        return flag_value
    raw = _env(env_name)
    if raw is None:
        return default
    try:
        return cast(raw)
    except (TypeError, ValueError):
        print(f"pnet: PNET_{env_name} must be a {cast.__name__}, got {raw!r}",
              file=sys.stderr)
        raise SystemExit(2)


def _resolve_flag(flag_value: bool, env_name: str) -> bool:
    if flag_value:
        return True
    raw = _env(env_name)
    return raw is not None and raw.strip().lower() in _TRUTHY


def _read(path: str) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _load_document(path: str):
    from .io import load_model
    return load_model(_read(path))


# -- subcommands --------------------------------------------------------------


def cmd_run(args) -> int:
    from .io import save_model
    from .script.commands import standard_interpreter

    interp, ws = standard_interpreter()
    if args.model:
        ws.model = _load_document(args.model)
    with open(args.script, "r", encoding="utf-8") as fh:
        source = fh.read()
    try:
        result = interp.eval_text(source)
    finally:
        for line in interp.output:    # everything the script `puts`, even
            print(line)               # when a later command failed
    if result:
        print(result)
    if args.save:
        blob = save_model(ws.model)
        with open(args.save, "wb") as fh:
            fh.write(blob)
    return 0


def cmd_simulate(args) -> int:
    import numpy as np

    from .engine import compile_program, run_program
    from .engine.stability import stability_check
    from .io import import_signal, write_wav
    from .script.commands import Workspace

    ws = Workspace(model=_load_document(args.model))
    ws.engine = _resolve(args.engine, "ENGINE", "reference", str)
    for item in args.signal:
        name, sep, path = item.partition("=")
        if not sep or not name or not path:
            print(f"pnet: --signal needs NAME=PATH, got {item!r}", file=sys.stderr)
            return 2
        ws.signals[name] = import_signal(path, ws.model.sim.rate)

    if _resolve_flag(args.check, "CHECK"):
        report = stability_check(ws.model.network)
        if report.worst == "unstable":
            print(report)
            print(f"worst {report.worst}")
            return 1

    duration_s = _resolve(args.duration, "DURATION", None, float)
    steps = (ws.model.sim.duration if duration_s is None
             else int(round(duration_s * ws.model.sim.rate)))
    trace_path = _resolve(args.trace, "TRACE", None, str)

    cfg = ws.run_config(steps)
    cfg.threads = _resolve(args.threads, "THREADS", cfg.threads, int)
    program = compile_program(
        ws.model.network, steps, rate=cfg.rate, signals=ws.signals,
        trace_ids=ws.trace_ids() if trace_path else (),
        decimation=cfg.decimation)
    result = run_program(program, cfg)

    data = np.asarray([c.data for c in result.channels])
    info = write_wav(args.out, result.rate, data, fmt=args.format,
                     normalize=_resolve_flag(args.normalize, "NORMALIZE"))
    print(result.stats.summary())
    print(f"wrote {args.out}: frames {info.frames} channels {info.channels} "
          f"format {info.fmt} clipped {info.clipped}")

    if trace_path:
        if result.trace is None:
            print("pnet: no motion trace recorded (sim trace setting is 'none')",
                  file=sys.stderr)
            return 1
        tr = result.trace
        np.savez(trace_path, frames=tr.frames,
                 mat_ids=np.asarray(tr.mat_ids, dtype=np.int64),
                 decimation=tr.decimation, rate=result.rate)
        print(f"wrote {trace_path}: frames {len(tr.frames)} "
              f"modules {len(tr.mat_ids)}")
    return 0


def cmd_inspect(args) -> int:
    from .labels import SYSTEM_RADICAL
    from .script.commands import _format_value

    model = _load_document(args.model)
    system_prefix = f"/{SYSTEM_RADICAL}/"
    for mid in sorted(model.eval_picker(args.picker)):
        module = model.network.modules[mid]
        labels = [t for t in model.labels.labels_of(mid)
                  if not t.startswith(system_prefix)]
        params = " ".join(f"{name}={_format_value(value)}"
                          for name, value in sorted(module.params.items()))
        print("\t".join([str(mid), module.kind.name,
                         ",".join(labels) or "-", params or "-"]))
    return 0


def cmd_bench(args) -> int:
    from .bench import CSV_COLUMNS, bench_chain, csv_line

    try:
        sizes = [int(s) for s in args.sizes.split(",") if s]
    except ValueError:
        print(f"pnet: --sizes must be comma-separated integers, got {args.sizes!r}",
              file=sys.stderr)
        return 2
    threads = _resolve(args.threads, "THREADS", 1, int)

    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        print(",".join(CSV_COLUMNS), file=out, flush=True)
        for size in sizes:
            row = bench_chain(size, steps=args.steps, threads=threads,
                              engine=_resolve(args.engine, "ENGINE",
                                              "reference", str))
            print(csv_line(row), file=out, flush=True)
            print(f"# built {size} modules by script in {row['build_s']} s",
                  file=sys.stderr)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_serve(args) -> int:
    from .service import run_websocket_server, serve_stdio
    from .session import Session

    session = Session()
    if args.model:
        response = session.handle({"id": 0, "verb": "model.load",
                                   "payload": {"path": args.model}})
        if not response["ok"]:
            err = response["error"]
            print(f"pnet: {err['type']}: {err['message']}", file=sys.stderr)
            return 1
    if args.stdio:
        serve_stdio(session, sys.stdin, sys.stdout)
        return 0

    host = _resolve(args.host, "HOST", "127.0.0.1", str)
    port = _resolve(args.port, "PORT", 8765, int)

    def ready(bound_port):
        print(f"listening on ws://{host}:{bound_port}", file=sys.stderr,
              flush=True)

    run_websocket_server(session, host, port, ready=ready)
    return 0


# -- argument plumbing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pnet",
        description="Mass-interaction network studio: script, simulate, "
                    "inspect, benchmark, serve.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("run", help="evaluate a script, optionally against a "
                                   "document, and save the result")
    p.add_argument("script", help="script file to evaluate")
    p.add_argument("--model", help="document to load before running")
    p.add_argument("--save", help="write the final document here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("simulate", help="render a document to WAV")
    p.add_argument("model", help="document to simulate")
    p.add_argument("out", help="output WAV path")
    p.add_argument("--duration", type=float, default=None,
                   help="seconds to render (default: the document's setting)")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--engine", default=None)
    p.add_argument("--format", choices=("float32", "pcm16"), default="float32")
    p.add_argument("--normalize", action="store_true",
                   help="scale the peak to -1 dBFS")
    p.add_argument("--check", action="store_true",
                   help="refuse to run if the stability analysis says unstable")
    p.add_argument("--trace", default=None,
                   help="also write the motion trace to this .npz path")
    p.add_argument("--signal", action="append", default=[], metavar="NAME=PATH",
                   help="bind an input signal file (repeatable)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("inspect", help="list modules matched by a picker")
    p.add_argument("model", help="document to inspect")
    p.add_argument("picker", help="picker expression, e.g. '/strings/**'")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("bench", help="chain throughput benchmark (CSV)")
    p.add_argument("--sizes", default="1000,10000,100000",
                   help="comma-separated module counts")
    p.add_argument("--steps", type=int, default=44100)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--engine", default=None)
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="serve the session API")
    p.add_argument("--model", help="document to load at startup")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--stdio", action="store_true",
                   help="speak newline-delimited JSON on stdin/stdout instead")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as err:
        print(f"pnet: IoError: {err}", file=sys.stderr)
        return 1
    except PnetError as err:
        print(f"pnet: {type(err).__name__}: {err}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
