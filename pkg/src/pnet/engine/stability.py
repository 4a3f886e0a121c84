"""Linear stability analysis of the per-material recurrence.

Each material with aggregated incident stiffness K and damping Z follows
x(n+1) = (2 - K/M - Z/M) x(n) + (Z/M - 1) x(n-1); the roots of its
characteristic polynomial decide boundedness.  One-sided and table-driven
interactions are linearized at their stiffest point and flagged advisory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..kinds import ModuleKind
from ..network import Network

TOL = 1e-12


def companion_radius(km: float, zm: float) -> float:
    """Largest root magnitude for stiffness ratio km = K/M, damping zm = Z/M."""
    a = 2.0 - km - zm       # trace
    b = 1.0 - zm            # determinant
    disc = a * a - 4.0 * b
    if disc < 0.0:
        # Complex pair: |root|^2 equals the determinant exactly.
        return math.sqrt(b)
    s = math.sqrt(disc)
    return max(abs((a + s) / 2.0), abs((a - s) / 2.0))


def verdict_for(km: float, zm: float) -> str:
    radius = companion_radius(km, zm)
    if radius > 1.0 + TOL:
        return "unstable"
    a = 2.0 - km - zm
    disc = a * a - 4.0 * (1.0 - zm)
    if disc < 0.0:
        # Undamped/underdamped oscillation: bounded, counted stable even
        # with the radius exactly 1.
        return "stable"
    if radius >= 1.0 - TOL:
        # Repeated or near-unit real root (e.g. a free mass): bounded
        # growth at most linear in n.
        return "marginal"
    return "stable"


@dataclass
class StabilityEntry:
    module_id: int
    km: float
    zm: float
    radius: float
    verdict: str
    advisory: bool      # linearized one-sided/table contributions involved

    def __str__(self):
        note = " (advisory: nonlinear incident links linearized)" if self.advisory else ""
        return (f"module {self.module_id}: K/M={self.km:.6g} Z/M={self.zm:.6g} "
                f"radius={self.radius:.9f} -> {self.verdict}{note}")


@dataclass
class StabilityReport:
    entries: list[StabilityEntry]

    @property
    def worst(self) -> str:
        order = {"stable": 0, "marginal": 1, "unstable": 2}
        worst = "stable"
        for e in self.entries:
            if order[e.verdict] > order[worst]:
                worst = e.verdict
        return worst

    def offenders(self) -> list[StabilityEntry]:
        return [e for e in self.entries if e.verdict == "unstable"]

    def __str__(self):
        if not self.entries:
            return "no materials to analyze"
        return "\n".join(str(e) for e in self.entries)


def _max_slope(table) -> float:
    worst = 0.0
    for (x0, y0), (x1, y1) in zip(table, table[1:]):
        worst = max(worst, abs((y1 - y0) / (x1 - x0)))
    return worst


def stability_check(network: Network) -> StabilityReport:
    """Per-material verdicts from aggregated incident linear coefficients."""
    from ..kinds import Family

    incident: dict[int, list[int]] = {}
    for lid, ends in network.endpoints.items():
        for end in ends:
            if end is not None:
                incident.setdefault(end, []).append(lid)

    entries = []
    for mid in sorted(network.modules):
        mod = network.modules[mid]
        if mod.family is not Family.MAT or mod.kind not in (ModuleKind.MAS, ModuleKind.CEL):
            continue
        m = mod.params["M"]
        k_sum = mod.params.get("K", 0.0)
        z_sum = mod.params.get("Z", 0.0)
        advisory = False
        for lid in incident.get(mid, ()):
            lia = network.modules[lid]
            if lia.kind in (ModuleKind.RES, ModuleKind.REF):
                k_sum += lia.params.get("K", 0.0)
            if lia.kind in (ModuleKind.FRO, ModuleKind.REF):
                z_sum += lia.params.get("Z", 0.0)
            if lia.kind is ModuleKind.BUT:
                # Worst case: contact engaged, acting as a spring+damper.
                k_sum += lia.params.get("K", 0.0)
                z_sum += lia.params.get("Z", 0.0)
                advisory = True
            if lia.kind is ModuleKind.LNL:
                k_sum += _max_slope(lia.params["fK"])
                z_sum += _max_slope(lia.params["fZ"])
                advisory = True
        km, zm = k_sum / m, z_sum / m
        entries.append(StabilityEntry(
            mid, km, zm, companion_radius(km, zm), verdict_for(km, zm), advisory))
    return StabilityReport(entries)


def frequency_of(K: float, M: float, rate: int = 44100) -> float:
    """Oscillation frequency in Hz of a mass M against total stiffness K."""
    ratio = 1.0 - K / (2.0 * M)
    if not -1.0 <= ratio <= 1.0:
        raise ValueError(f"K/M = {K / M:.6g} is outside the oscillatory band (0, 4)")
    return rate * math.acos(ratio) / (2.0 * math.pi)


def stiffness_for_frequency(f: float, M: float = 1.0, rate: int = 44100) -> float:
    """Stiffness K giving a mass M an oscillation frequency f at `rate`."""
    if not 0.0 <= f <= rate / 2.0:
        raise ValueError(f"frequency {f} Hz outside [0, {rate / 2}]")
    return 2.0 * M * (1.0 - math.cos(2.0 * math.pi * f / rate))
