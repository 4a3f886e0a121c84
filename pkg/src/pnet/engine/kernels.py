"""The simulation step kernel.

One source of truth: `run_chunk` is compiled by numba for the reference
engine and executed as plain Python (`run_chunk.py_func`) by the naive
engine.  The differential test between the two is what certifies the
compiled code performs the exact same floating-point operations.

Determinism rules baked into the loop structure:
  - phase 1 writes one force slot per interaction, no shared accumulation;
  - phase 2 sums each material's incident forces sequentially in ascending
    interaction order inside a single thread;
  - phase 3 is serial.
Changing the thread count only changes how independent iterations are
distributed, never the order of any floating-point reduction.  fastmath
stays off so the compiler cannot reassociate or fuse operations.
"""

import numba
import numpy as np
from numba import njit, prange


@njit(cache=True)
def interp_table(xs, ys, lo, hi, q):
    """Piecewise-linear table lookup, clamped at both ends."""
    if q <= xs[lo]:
        return ys[lo]
    last = hi - 1
    if q >= xs[last]:
        return ys[last]
    a = lo
    b = last
    while b - a > 1:
        mid = (a + b) // 2
        if xs[mid] <= q:
            a = mid
        else:
            b = mid
    t = (q - xs[a]) / (xs[a + 1] - xs[a])
    return ys[a] + t * (ys[a + 1] - ys[a])


def chunk_source(state, mat_tag, c1, c2, inv_m, hold, enx_row,
                 inc_ptr, inc_lia, inc_sign, inj_ptr, inj_row,
                 lia_tag, lia_K, lia_Z, lia_S, lia_a, lia_b,
                 fk_ptr, fk_x, fk_y, fz_ptr, fz_x, fz_y,
                 signals, sox_mat, sox_gain, sof_lia, sof_gain,
                 sox_out, sof_out, f_lia, trace_sel, trace, decim,
                 start, count):
    """Advance `count` steps from step `start`.

    `state` has three rows cycling as (previous, current, next); row of
    step n is n mod 3, so chunk boundaries carry no extra bookkeeping.
    """
    nl = lia_a.shape[0]
    nm = mat_tag.shape[0]
    for n in range(start, start + count):
        x = state[n % 3]
        xp = state[(n + 2) % 3]
        xn = state[(n + 1) % 3]

        # Phase 1: one force per interaction.
        for l in prange(nl):
            a = lia_a[l]
            b = lia_b[l]
            dx = x[a] - x[b]
            dv = (x[a] - xp[a]) - (x[b] - xp[b])
            tag = lia_tag[l]
            if tag == 0:
                f = -lia_K[l] * dx
            elif tag == 1:
                f = -lia_Z[l] * dv
            elif tag == 2:
                f = -lia_K[l] * dx - lia_Z[l] * dv
            elif tag == 3:
                if dx < lia_S[l]:
                    f = lia_K[l] * (lia_S[l] - dx) - lia_Z[l] * dv
                else:
                    f = 0.0
            else:
                f = interp_table(fk_x, fk_y, fk_ptr[l], fk_ptr[l + 1], dx) \
                    + interp_table(fz_x, fz_y, fz_ptr[l], fz_ptr[l + 1], dv)
            f_lia[l] = f

        # Phase 2: integrate each material from its ordered force sum.
        for i in prange(nm):
            s = 0.0
            for k in range(inc_ptr[i], inc_ptr[i + 1]):
                s = s + inc_sign[k] * f_lia[inc_lia[k]]
            for k in range(inj_ptr[i], inj_ptr[i + 1]):
                s = s + signals[inj_row[k], n]
            tag = mat_tag[i]
            if tag == 0:
                xn[i] = c1[i] * x[i] + c2[i] * xp[i] + s * inv_m[i]
            elif tag == 2:
                xn[i] = hold[i]
            else:
                xn[i] = signals[enx_row[i], n]

        # Phase 3: observers record the state the forces were computed from.
        for k in range(sox_mat.shape[0]):
            sox_out[k, n] = sox_gain[k] * x[sox_mat[k]]
        for k in range(sof_lia.shape[0]):
            sof_out[k, n] = sof_gain[k] * f_lia[sof_lia[k]]
        if n % decim == 0:
            frame = n // decim
            for k in range(trace_sel.shape[0]):
                trace[frame, k] = x[trace_sel[k]]


# Without parallel=True numba lowers prange as a plain range, so the same
# source yields a serial kernel (no per-step fork/join overhead), a parallel
# one, and the interpreted reference — all doing identical arithmetic.
run_chunk_serial = njit(cache=True)(chunk_source)
run_chunk_parallel = njit(cache=True, parallel=True)(chunk_source)

# A parallel step only pays off when each phase has enough work to amortize
# the per-step thread fork/join.
PARALLEL_THRESHOLD = 8192


def pick_kernel(n_elements: int, threads: int):
    if threads > 1 and n_elements >= PARALLEL_THRESHOLD:
        return run_chunk_parallel
    return run_chunk_serial


def set_threads(n: int) -> int:
    """Clamp to the worker budget fixed at import time."""
    actual = max(1, min(n, numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(actual)
    return actual


def kernel_args(program, state, sox_out, sof_out, f_lia, trace):
    """The long positional prefix shared by every chunk call."""
    return (state, program.mat_tag, program.c1, program.c2, program.inv_m,
            program.hold, program.enx_row,
            program.inc_ptr, program.inc_lia, program.inc_sign,
            program.inj_ptr, program.inj_row,
            program.lia_tag, program.lia_K, program.lia_Z, program.lia_S,
            program.lia_a, program.lia_b,
            program.fk_ptr, program.fk_x, program.fk_y,
            program.fz_ptr, program.fz_x, program.fz_y,
            program.signals, program.sox_mat, program.sox_gain,
            program.sof_lia, program.sof_gain,
            sox_out, sof_out, f_lia, program.trace_sel, trace,
            max(program.decimation, 1))
