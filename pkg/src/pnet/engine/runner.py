"""Chunked simulation driver, engines, and the engine registry.

The driver advances the kernel in wall-clock-sized chunks so progress
callbacks fire at a few hertz and cancellation takes effect between chunks.
Chunk boundaries never influence numeric results.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidEngine, NoSuchChannel, NumericBlowup, SimCancelled
from .kernels import chunk_source, kernel_args, pick_kernel, set_threads
from .program import SimProgram, compile_program

_CHUNK_TARGET_S = 0.12     # aimed wall time per chunk
_CHUNK_MIN = 64
_CHUNK_MAX = 262_144


@dataclass
class SimConfig:
    rate: int = 44100
    duration: int = 44100
    decimation: int = 64
    threads: int = 1
    engine: str = "reference"


@dataclass
class Channel:
    name: str
    kind: str           # "sox" or "sof"
    module_id: int
    data: np.ndarray    # float64 [steps]

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.data))) if len(self.data) else 0.0


@dataclass
class MotionTrace:
    decimation: int
    mat_ids: np.ndarray     # int64 [nsel]
    frames: np.ndarray      # float32 [n_frames, nsel]


@dataclass
class RunStats:
    steps: int
    wall_s: float
    steps_per_sec: float
    peaks: dict[str, float] = field(default_factory=dict)

    def summary(self) -> str:
        lines = [f"steps {self.steps}",
                 f"wall {self.wall_s:.3f} s",
                 f"rate {self.steps_per_sec:.0f} steps/s"]
        for name, peak in self.peaks.items():
            lines.append(f"peak {name} {peak:.6g}")
        return "\n".join(lines)


@dataclass
class RunResult:
    rate: int
    duration: int
    channels: list[Channel]
    trace: MotionTrace | None
    stats: RunStats
    engine: str
    threads: int

    def channel(self, name: str) -> Channel:
        for ch in self.channels:
            if ch.name == name:
                return ch
        raise NoSuchChannel(f"no channel {name!r}; have "
                            f"{[c.name for c in self.channels] or 'none'}")

    def channel_names(self) -> list[str]:
        return [c.name for c in self.channels]


class _ChunkDriver:
    """Runs one kernel callable over the whole duration."""

    def __init__(self, kernel, program: SimProgram):
        self.kernel = kernel
        self.p = program
        nm = program.n_mat
        self.state = np.zeros((3, nm))
        self.state[0] = program.x_init
        self.state[2] = program.xprev_init   # row of step -1
        self.sox_out = np.zeros((len(program.sox_ids), program.duration))
        self.sof_out = np.zeros((len(program.sof_ids), program.duration))
        self.f_lia = np.zeros(program.n_lia)
        nf = program.trace_frames()
        nsel = len(program.trace_sel)
        self.trace = np.zeros((nf if nsel else 0, nsel), np.float32)
        self.args = kernel_args(program, self.state, self.sox_out,
                                self.sof_out, self.f_lia, self.trace)

    def run(self, progress=None, should_cancel=None) -> int:
        p = self.p
        duration = p.duration
        # Cap so at least ~10 progress reports happen even when fast.
        cap = max(_CHUNK_MIN, math.ceil(duration / 10))
        chunk = min(256, cap)
        done = 0
        while done < duration:
            if should_cancel is not None and should_cancel():
                raise SimCancelled(f"cancelled at step {done}", partial_steps=done)
            count = min(chunk, duration - done, cap)
            snapshot = self.state.copy()
            t0 = time.perf_counter()
            self.kernel(*self.args, done, count)
            dt = time.perf_counter() - t0
            done += count
            xrow = self.state[done % 3]
            if not np.all(np.isfinite(xrow)):
                self._pinpoint_blowup(snapshot, done - count, count)
            if progress is not None:
                progress(done, duration)
            if dt > 0:
                chunk = int(min(max(chunk * _CHUNK_TARGET_S / dt, _CHUNK_MIN),
                                _CHUNK_MAX))
            else:
                chunk = min(chunk * 2, _CHUNK_MAX)
        return done

    def _pinpoint_blowup(self, snapshot, start, count):
        """Replay the failed chunk step by step to locate the blowup."""
        self.state[:] = snapshot
        for n in range(start, start + count):
            self.kernel(*self.args, n, 1)
            xrow = self.state[(n + 1) % 3]
            bad = np.flatnonzero(~np.isfinite(xrow))
            if len(bad):
                module = int(self.p.mat_ids[bad[0]])
                raise NumericBlowup(
                    f"non-finite position at step {n} on module {module}",
                    step=n, module_id=module, partial_steps=n)
        # The chunk replayed clean; treat its end as the failing step.
        raise NumericBlowup(
            f"non-finite value near step {start + count}",
            step=start + count, module_id=-1, partial_steps=start)


class ReferenceEngine:
    """Compiled, internally parallel, bit-exact across thread counts."""

    name = "reference"

    def prepare(self, program: SimProgram, threads: int) -> _ChunkDriver:
        actual = set_threads(threads)
        kernel = pick_kernel(program.n_mat + program.n_lia, actual)
        return _ChunkDriver(kernel, program)


class NaiveEngine:
    """The same step function executed by the Python interpreter.

    Slow; exists to certify the compiled engine performs identical
    floating-point work.
    """

    name = "naive"

    def prepare(self, program: SimProgram, threads: int) -> _ChunkDriver:
        return _ChunkDriver(chunk_source, program)


_ENGINES: dict[str, object] = {}


def attach_engine(engine) -> None:
    name = getattr(engine, "name", None)
    prepare = getattr(engine, "prepare", None)
    if not isinstance(name, str) or not name or not callable(prepare):
        raise InvalidEngine(
            "an engine needs a non-empty .name and a callable .prepare")
    _ENGINES[name] = engine


def get_engine(name: str):
    try:
        return _ENGINES[name]
    except KeyError:
        raise InvalidEngine(
            f"no engine {name!r}; attached: {sorted(_ENGINES)}") from None


def engine_names() -> list[str]:
    return sorted(_ENGINES)


attach_engine(ReferenceEngine())
attach_engine(NaiveEngine())


def _collect(driver: _ChunkDriver, program: SimProgram, steps: int,
             wall: float, engine_name: str, threads: int) -> RunResult:
    channels = []
    for k, mid in enumerate(program.sox_ids):
        channels.append(Channel(f"sox-{mid}", "sox", int(mid),
                                driver.sox_out[k, :steps]))
    for k, mid in enumerate(program.sof_ids):
        channels.append(Channel(f"sof-{mid}", "sof", int(mid),
                                driver.sof_out[k, :steps]))
    trace = None
    if len(program.trace_sel):
        frames = driver.trace
        if steps < program.duration and program.decimation > 0:
            frames = frames[:math.ceil(steps / max(program.decimation, 1))]
        trace = MotionTrace(program.decimation, program.trace_ids, frames)
    stats = RunStats(
        steps=steps,
        wall_s=wall,
        steps_per_sec=steps / wall if wall > 0 else float("inf"),
        peaks={c.name: c.peak for c in channels},
    )
    return RunResult(program.rate, steps, channels, trace, stats,
                     engine_name, threads)


def run_program(program: SimProgram, config: SimConfig,
                progress=None, should_cancel=None) -> RunResult:
    engine = get_engine(config.engine)
    driver = engine.prepare(program, config.threads)
    t0 = time.perf_counter()
    try:
        driver.run(progress, should_cancel)
    except (NumericBlowup, SimCancelled) as err:
        wall = time.perf_counter() - t0
        err.partial = _collect(driver, program, err.partial_steps, wall,
                               engine.name, config.threads)
        raise
    wall = time.perf_counter() - t0
    return _collect(driver, program, program.duration, wall,
                    engine.name, config.threads)


def run(network, config: SimConfig, signals=None, trace_ids=None,
        progress=None, should_cancel=None) -> RunResult:
    """Compile and run in one call; `trace_ids` as in compile_program."""
    program = compile_program(network, config.duration, config.rate,
                              signals, trace_ids, config.decimation)
    return run_program(program, config, progress, should_cancel)
