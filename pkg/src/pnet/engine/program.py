"""Compilation of a validated network into flat structure-of-arrays form.

Array order is ascending module id throughout.  Per-MAT incident interaction
lists are CSR-packed and sorted so force accumulation follows one fixed
order no matter how many threads run the phases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import MissingSignal, NotValidated
from ..kinds import Family, ModuleKind
from ..network import Network

# MAT integrator tags
MAT_FREE = 0      # MAS and CEL: second-order recurrence
MAT_HOLD = 2      # SOL and ENF body: position pinned at X0
MAT_SIGNAL = 3    # ENX: position imposed by a signal

# LIA law tags
LIA_RES, LIA_FRO, LIA_REF, LIA_BUT, LIA_LNL = 0, 1, 2, 3, 4

_LIA_TAG = {
    ModuleKind.RES: LIA_RES,
    ModuleKind.FRO: LIA_FRO,
    ModuleKind.REF: LIA_REF,
    ModuleKind.BUT: LIA_BUT,
    ModuleKind.LNL: LIA_LNL,
}


@dataclass
class SimProgram:
    """Immutable compiled form of one network revision."""

    revision: int
    duration: int
    rate: int
    decimation: int

    # MAT arrays (index = position in ascending-id order)
    mat_ids: np.ndarray        # int64
    mat_tag: np.ndarray        # uint8
    c1: np.ndarray             # float64
    c2: np.ndarray             # float64
    inv_m: np.ndarray          # float64 (0 for pinned kinds)
    hold: np.ndarray           # float64 (X0 for pinned kinds)
    x_init: np.ndarray         # float64
    xprev_init: np.ndarray     # float64
    enx_row: np.ndarray        # int64 (-1 when not ENX)

    # CSR: incident LIAs per MAT, ascending LIA index
    inc_ptr: np.ndarray        # int64 [nm+1]
    inc_lia: np.ndarray        # int64
    inc_sign: np.ndarray       # float64 (+1 endpoint a, -1 endpoint b)

    # CSR: force injections per MAT (signal rows, ascending ENF id)
    inj_ptr: np.ndarray        # int64 [nm+1]
    inj_row: np.ndarray        # int64

    # LIA arrays
    lia_ids: np.ndarray        # int64
    lia_tag: np.ndarray        # uint8
    lia_K: np.ndarray          # float64
    lia_Z: np.ndarray          # float64
    lia_S: np.ndarray          # float64
    lia_a: np.ndarray          # int64 (MAT index)
    lia_b: np.ndarray          # int64
    fk_ptr: np.ndarray         # int64 [nl+1]
    fk_x: np.ndarray           # float64
    fk_y: np.ndarray           # float64
    fz_ptr: np.ndarray         # int64 [nl+1]
    fz_x: np.ndarray           # float64
    fz_y: np.ndarray           # float64

    # observers
    sox_ids: np.ndarray        # int64
    sox_mat: np.ndarray        # int64
    sox_gain: np.ndarray       # float64
    sof_ids: np.ndarray        # int64
    sof_lia: np.ndarray        # int64
    sof_gain: np.ndarray       # float64

    # inputs
    signals: np.ndarray        # float64 [n_signals, duration]

    # motion trace selection (MAT indices, ascending id)
    trace_sel: np.ndarray      # int64
    trace_ids: np.ndarray      # int64

    @property
    def n_mat(self) -> int:
        return len(self.mat_ids)

    @property
    def n_lia(self) -> int:
        return len(self.lia_ids)

    def channel_names(self) -> list[str]:
        return [f"sox-{i}" for i in self.sox_ids] + [f"sof-{i}" for i in self.sof_ids]

    def trace_frames(self) -> int:
        if self.decimation <= 0 or len(self.trace_sel) == 0:
            return 0
        return -(-self.duration // self.decimation)


def compile_program(
    network: Network,
    duration: int,
    rate: int = 44100,
    signals: dict[str, np.ndarray] | None = None,
    trace_ids=None,
    decimation: int = 64,
) -> SimProgram:
    """Flatten a validated network.

    `trace_ids`: None traces every MAT, an iterable traces that subset
    (non-MAT ids are ignored), an empty iterable disables the trace.
    """
    signals = signals or {}
    report = network.validate(known_signals=signals.keys())
    if not report.ok:
        codes = report.codes()
        if codes == {"UnresolvedSignal"}:
            raise MissingSignal("; ".join(str(i) for i in report.issues))
        raise NotValidated("network does not validate", issues=report.issues)

    mats = sorted(m for m in network.modules
                  if network.modules[m].family is Family.MAT)
    lias = sorted(m for m in network.modules
                  if network.modules[m].family is Family.LIA)
    mat_index = {mid: i for i, mid in enumerate(mats)}
    lia_index = {mid: i for i, mid in enumerate(lias)}

    nm, nl = len(mats), len(lias)
    mat_tag = np.zeros(nm, np.uint8)
    c1 = np.zeros(nm)
    c2 = np.zeros(nm)
    inv_m = np.zeros(nm)
    hold = np.zeros(nm)
    x_init = np.zeros(nm)
    xprev_init = np.zeros(nm)
    enx_row = np.full(nm, -1, np.int64)

    signal_rows: dict[str, int] = {}

    def signal_row(name: str) -> int:
        if name not in signal_rows:
            signal_rows[name] = len(signal_rows)
        return signal_rows[name]

    for i, mid in enumerate(mats):
        mod = network.modules[mid]
        x0 = mod.init.x0
        v0 = mod.init.v0
        x_init[i] = x0
        xprev_init[i] = x0 - v0
        if mod.kind is ModuleKind.MAS:
            mat_tag[i] = MAT_FREE
            c1[i] = 2.0
            c2[i] = -1.0
            inv_m[i] = 1.0 / mod.params["M"]
        elif mod.kind is ModuleKind.CEL:
            mat_tag[i] = MAT_FREE
            m = mod.params["M"]
            c1[i] = 2.0 - mod.params["K"] / m - mod.params["Z"] / m
            c2[i] = mod.params["Z"] / m - 1.0
            inv_m[i] = 1.0 / m
        elif mod.kind is ModuleKind.ENX:
            mat_tag[i] = MAT_SIGNAL
            enx_row[i] = signal_row(mod.signal_ref)
        else:  # SOL, ENF body
            mat_tag[i] = MAT_HOLD
            hold[i] = x0

    lia_tag = np.zeros(nl, np.uint8)
    lia_K = np.zeros(nl)
    lia_Z = np.zeros(nl)
    lia_S = np.zeros(nl)
    lia_a = np.zeros(nl, np.int64)
    lia_b = np.zeros(nl, np.int64)
    fk_ptr = np.zeros(nl + 1, np.int64)
    fz_ptr = np.zeros(nl + 1, np.int64)
    fk_pts: list[tuple[float, float]] = []
    fz_pts: list[tuple[float, float]] = []

    for j, mid in enumerate(lias):
        mod = network.modules[mid]
        lia_tag[j] = _LIA_TAG[mod.kind]
        lia_K[j] = mod.params.get("K", 0.0)
        lia_Z[j] = mod.params.get("Z", 0.0)
        lia_S[j] = mod.params.get("S", 0.0)
        a, b = network.endpoints[mid]
        lia_a[j] = mat_index[a]
        lia_b[j] = mat_index[b]
        if mod.kind is ModuleKind.LNL:
            fk_pts.extend(mod.params["fK"])
            fz_pts.extend(mod.params["fZ"])
        fk_ptr[j + 1] = len(fk_pts)
        fz_ptr[j + 1] = len(fz_pts)

    def table_arrays(points):
        if not points:
            return np.zeros(0), np.zeros(0)
        arr = np.asarray(points, dtype=np.float64)
        return np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1])

    fk_x, fk_y = table_arrays(fk_pts)
    fz_x, fz_y = table_arrays(fz_pts)

    # Incident CSR: iterating LIAs in ascending index keeps each MAT's
    # incident list sorted without an explicit sort.
    counts = np.zeros(nm + 1, np.int64)
    for j in range(nl):
        counts[lia_a[j] + 1] += 1
        counts[lia_b[j] + 1] += 1
    inc_ptr = np.cumsum(counts)
    inc_lia = np.zeros(inc_ptr[-1], np.int64)
    inc_sign = np.zeros(inc_ptr[-1])
    fill = inc_ptr[:-1].copy()
    for j in range(nl):
        for idx, sign in ((lia_a[j], 1.0), (lia_b[j], -1.0)):
            inc_lia[fill[idx]] = j
            inc_sign[fill[idx]] = sign
            fill[idx] += 1

    # Injections: ENF modules add their signal to the target MAT's force sum.
    inj_lists: dict[int, list[tuple[int, int]]] = {}
    sox: list[tuple[int, int, float]] = []
    sof: list[tuple[int, int, float]] = []
    for mid in sorted(network.modules):
        mod = network.modules[mid]
        if mod.kind is ModuleKind.ENF:
            target = network.attachments[mid]
            inj_lists.setdefault(mat_index[target], []).append(
                (mid, signal_row(mod.signal_ref)))
        elif mod.kind is ModuleKind.SOX:
            target = network.attachments[mid]
            sox.append((mid, mat_index[target], mod.params["gain"]))
        elif mod.kind is ModuleKind.SOF:
            target = network.attachments[mid]
            sof.append((mid, lia_index[target], mod.params["gain"]))

    inj_ptr = np.zeros(nm + 1, np.int64)
    inj_row_list: list[int] = []
    for i in range(nm):
        for _, row in sorted(inj_lists.get(i, [])):
            inj_row_list.append(row)
        inj_ptr[i + 1] = len(inj_row_list)
    inj_row = np.asarray(inj_row_list, np.int64)

    sig = np.zeros((len(signal_rows), max(duration, 1)))
    for name, row in signal_rows.items():
        data = np.asarray(signals[name], dtype=np.float64).ravel()
        n = min(len(data), duration)
        sig[row, :n] = data[:n]
    if duration == 0:
        sig = sig[:, :0]

    if trace_ids is None:
        sel = list(range(nm))
    else:
        wanted = set(trace_ids)
        sel = [i for i, mid in enumerate(mats) if mid in wanted]
    trace_sel = np.asarray(sel, np.int64)

    return SimProgram(
        revision=network.revision,
        duration=duration,
        rate=rate,
        decimation=decimation,
        mat_ids=np.asarray(mats, np.int64),
        mat_tag=mat_tag,
        c1=c1, c2=c2, inv_m=inv_m, hold=hold,
        x_init=x_init, xprev_init=xprev_init,
        enx_row=enx_row,
        inc_ptr=inc_ptr, inc_lia=inc_lia, inc_sign=inc_sign,
        inj_ptr=inj_ptr, inj_row=inj_row,
        lia_ids=np.asarray(lias, np.int64),
        lia_tag=lia_tag,
        lia_K=lia_K, lia_Z=lia_Z, lia_S=lia_S,
        lia_a=lia_a, lia_b=lia_b,
        fk_ptr=fk_ptr, fk_x=fk_x, fk_y=fk_y,
        fz_ptr=fz_ptr, fz_x=fz_x, fz_y=fz_y,
        sox_ids=np.asarray([s[0] for s in sox], np.int64),
        sox_mat=np.asarray([s[1] for s in sox], np.int64),
        sox_gain=np.asarray([s[2] for s in sox]),
        sof_ids=np.asarray([s[0] for s in sof], np.int64),
        sof_lia=np.asarray([s[1] for s in sof], np.int64),
        sof_gain=np.asarray([s[2] for s in sof]),
        signals=sig,
        trace_sel=trace_sel,
        trace_ids=np.asarray([mats[i] for i in sel], np.int64),
    )
