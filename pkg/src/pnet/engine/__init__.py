"""Off-time simulation engine.

The worker-thread budget must be fixed before numba is first imported, so
this package sets it on import; requests beyond the budget are clamped.
"""

import os

os.environ.setdefault("NUMBA_NUM_THREADS", "8")
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

from .program import SimProgram, compile_program
from .runner import (
    Channel,
    MotionTrace,
    NaiveEngine,
    ReferenceEngine,
    RunResult,
    RunStats,
    SimConfig,
    attach_engine,
    get_engine,
    run,
    run_program,
)
from .stability import StabilityReport, frequency_of, stability_check, stiffness_for_frequency

__all__ = [
    "Channel",
    "MotionTrace",
    "NaiveEngine",
    "ReferenceEngine",
    "RunResult",
    "RunStats",
    "SimConfig",
    "SimProgram",
    "StabilityReport",
    "attach_engine",
    "compile_program",
    "frequency_of",
    "get_engine",
    "run",
    "run_program",
    "stability_check",
    "stiffness_for_frequency",
]
