"""Chain benchmarks behind `pnet bench`.

Builds string-like chains entirely through the scripting layer, times
compile + simulate, and reports CSV rows so the large-model throughput
target stays a tracked number instead of a claim.
"""

from __future__ import annotations

import resource
import sys
import time

from .engine import SimConfig, compile_program, run_program
from .script.commands import standard_interpreter

CSV_COLUMNS = ("module_count", "steps", "wall_ms", "steps_per_sec", "bytes_peak")


def chain_script(n_modules: int) -> str:
    """Script building a chain of exactly `n_modules` modules.

    Layout: one SOL, m masses, m springs, one SOX on the far end, so
    n = 2m + 2.  Sizes must be even and at least 4.
    """
    if n_modules < 4 or n_modules % 2:
        raise ValueError(f"chain size must be even and >= 4, got {n_modules}")
    m = (n_modules - 2) // 2
    return f"""
        set m {m}
        module create SOL
        module create MAS $m
        module create RES $m
        for {{set i 0}} {{$i < $m}} {{incr i}} {{
            link connect [expr 2 + $m + $i] [expr 1 + $i] [expr 2 + $i]
        }}
        param set [expr $m + 2] K 0.01
        state set 2 X0 1
        module create SOX
        link attach [expr 2 * $m + 2] [expr $m + 1]
        sim config trace none
    """


def peak_rss_bytes() -> int:
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    if sys.platform != "darwin":
        peak *= 1024        # Linux reports KiB
    return int(peak)


def bench_chain(n_modules: int, steps: int = 44100, threads: int = 1,
                engine: str = "reference") -> dict:
    """One benchmark row.  wall_ms covers compile + simulate only."""
    interp, ws = standard_interpreter()
    t0 = time.perf_counter()
    interp.eval_text(chain_script(n_modules))
    build_s = time.perf_counter() - t0

    model = ws.model
    t0 = time.perf_counter()
    program = compile_program(model.network, steps, rate=model.sim.rate,
                              trace_ids=())
    result = run_program(program, SimConfig(rate=model.sim.rate,
                                            duration=steps, threads=threads,
                                            engine=engine))
    wall = time.perf_counter() - t0
    return {
        "module_count": n_modules,
        "steps": steps,
        "wall_ms": round(wall * 1e3, 3),
        "steps_per_sec": round(result.stats.steps_per_sec),
        "bytes_peak": peak_rss_bytes(),
        "build_s": round(build_s, 3),   # informational, not a CSV column
    }


def csv_line(row: dict) -> str:
    return ",".join(str(row[c]) for c in CSV_COLUMNS)
