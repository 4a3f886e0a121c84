"""The physics network graph: module instances, connections, attachments.

The network is a pure graph structure; it knows nothing about labels or
documents.  Ids are integers assigned from 1 and never reused, so the same
edit sequence always produces the same network.  Deleting a module leaves
incident interactions dangling instead of cascading the deletion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import (IllegalParamValue, KindMismatch, NonPositiveInertia,
                     NoSuchParamForKind, SelfLink, UnknownId)
from .kinds import (ATTACH_TARGET_FAMILY, Family, LEGAL_PARAMS, LIA_KINDS,
                    MAT_KINDS, ModuleKind, SIGNAL_KINDS, TABLE_PARAMS,
                    default_params, validate_table)


@dataclass
class InitialState:
    x0: float = 0.0
    v0: float = 0.0


@dataclass
class Module:
    id: int
    kind: ModuleKind
    params: dict
    init: InitialState | None      # MAT family only
    bench_pos: tuple[float, float]
    signal_ref: str | None = None  # ENX/ENF only

    @property
    def family(self) -> Family:
        return self.kind.family


@dataclass(frozen=True)
class Issue:
    code: str
    module: int
    message: str


class ValidationReport:
    """Outcome of Network.validate(); empty means simulatable."""

    def __init__(self, issues: list[Issue]):
        self.issues = issues

    @property
    def ok(self) -> bool:
        return not self.issues

    def codes(self) -> set[str]:
        return {i.code for i in self.issues}

    def for_module(self, module_id: int) -> list[Issue]:
        return [i for i in self.issues if i.module == module_id]

    def __len__(self):
        return len(self.issues)

    def __str__(self):
        if self.ok:
            return "ok"
        return "\n".join(f"{i.code}: module {i.module}: {i.message}" for i in self.issues)


def _check_finite(value, what: str) -> float:
    v = float(value)
    if not math.isfinite(v):
        raise IllegalParamValue(f"{what} must be finite, got {value!r}")
    return v


class Network:
    """Mutable module graph with a monotonically increasing revision counter."""

    def __init__(self):
        self.modules: dict[int, Module] = {}
        # LIA id -> [endpoint a or None, endpoint b or None]
        self.endpoints: dict[int, list[int | None]] = {}
        # SOX/SOF/ENF id -> target id (absent entry = dangling)
        self.attachments: dict[int, int] = {}
        self.revision = 0
        self._next_id = 1

    # -- lookups ------------------------------------------------------------

    def module(self, module_id: int) -> Module:
        try:
            return self.modules[module_id]
        except KeyError:
            raise UnknownId(f"no module with id {module_id}") from None

    def ids(self) -> list[int]:
        return sorted(self.modules)

    def by_family(self, family: Family) -> list[Module]:
        return [self.modules[i] for i in sorted(self.modules)
                if self.modules[i].family is family]

    def __len__(self):
        return len(self.modules)

    def __contains__(self, module_id: int) -> bool:
        return module_id in self.modules

    # -- edits --------------------------------------------------------------

    def _bump(self):
        self.revision += 1

    def add_module(self, kind: ModuleKind, bench_pos=(0.0, 0.0)) -> int:
        x = _check_finite(bench_pos[0], "bench position")
        y = _check_finite(bench_pos[1], "bench position")
        mid = self._next_id
        self._next_id += 1
        init = InitialState() if kind in MAT_KINDS else None
        self.modules[mid] = Module(mid, kind, default_params(kind), init, (x, y))
        if kind in LIA_KINDS:
            self.endpoints[mid] = [None, None]
        self._bump()
        return mid

    def connect(self, lia: int, a: int, b: int) -> None:
        lm, am, bm = self.module(lia), self.module(a), self.module(b)
        if lm.family is not Family.LIA:
            raise KindMismatch(f"module {lia} is {lm.kind}, not an interaction")
        for end in (am, bm):
            if end.family is not Family.MAT:
                raise KindMismatch(f"module {end.id} is {end.kind}, not a material endpoint")
        if a == b:
            raise SelfLink(f"interaction {lia} cannot join module {a} to itself")
        self.endpoints[lia] = [a, b]
        self._bump()

    def attach(self, module_id: int, target: int) -> None:
        mod, tgt = self.module(module_id), self.module(target)
        want = ATTACH_TARGET_FAMILY.get(mod.kind)
        if want is None:
            raise KindMismatch(f"module {module_id} is {mod.kind}; only SOX, SOF and ENF attach")
        if tgt.family is not want:
            raise KindMismatch(
                f"{mod.kind} must target a {want.value} module, {target} is {tgt.kind}")
        if module_id == target:
            raise SelfLink(f"module {module_id} cannot target itself")
        self.attachments[module_id] = target
        self._bump()

    def disconnect(self, module_id: int) -> None:
        """Clear a LIA's endpoints or an attachment, leaving the module in place."""
        mod = self.module(module_id)
        if mod.family is Family.LIA:
            self.endpoints[module_id] = [None, None]
        elif mod.kind in ATTACH_TARGET_FAMILY:
            self.attachments.pop(module_id, None)
        else:
            raise KindMismatch(f"module {module_id} ({mod.kind}) has no connections of its own")
        self._bump()

    def set_param(self, targets, name: str, value, strict: bool = True) -> int:
        """Set a parameter on every target where it is legal; returns the count.

        In strict mode an illegal name on any target aborts before mutating
        anything; lenient mode skips those targets.
        """
        ids = sorted(set(targets))
        mods = [self.module(i) for i in ids]
        legal = [m for m in mods if name in LEGAL_PARAMS[m.kind]]
        if strict and len(legal) != len(mods):
            bad = next(m for m in mods if name not in LEGAL_PARAMS[m.kind])
            raise NoSuchParamForKind(f"parameter {name!r} is not legal on {bad.kind} (module {bad.id})")
        if not legal:
            return 0
        value = self._check_param_value(name, value)
        for m in legal:
            m.params[name] = value
        self._bump()
        return len(legal)

    @staticmethod
    def _check_param_value(name: str, value):
        if name in TABLE_PARAMS:
            return validate_table(value)
        v = float(value)
        if not math.isfinite(v):
            raise IllegalParamValue(f"{name} must be finite, got {value!r}")
        if name == "M" and not v > 0.0:
            raise NonPositiveInertia(f"inertia must be > 0, got {v}")
        if name == "K" and v < 0.0:
            raise IllegalParamValue(f"stiffness must be >= 0, got {v}")
        return v

    def get_param(self, module_id: int, name: str):
        mod = self.module(module_id)
        if name not in LEGAL_PARAMS[mod.kind]:
            raise NoSuchParamForKind(f"parameter {name!r} is not legal on {mod.kind}")
        return mod.params[name]

    def set_initial(self, targets, name: str, value) -> int:
        """Set X0 or V0 on MAT-family targets; returns the count updated."""
        if name not in ("X0", "V0"):
            raise NoSuchParamForKind(f"initial-state property must be X0 or V0, got {name!r}")
        ids = sorted(set(targets))
        mods = [self.module(i) for i in ids]
        for m in mods:
            if m.init is None:
                raise NoSuchParamForKind(f"module {m.id} ({m.kind}) carries no initial state")
        v = _check_finite(value, name)
        for m in mods:
            if name == "X0":
                m.init.x0 = v
            else:
                m.init.v0 = v
        if mods:
            self._bump()
        return len(mods)

    def get_initial(self, module_id: int, name: str) -> float:
        mod = self.module(module_id)
        if mod.init is None:
            raise NoSuchParamForKind(f"module {module_id} ({mod.kind}) carries no initial state")
        if name == "X0":
            return mod.init.x0
        if name == "V0":
            return mod.init.v0
        raise NoSuchParamForKind(f"initial-state property must be X0 or V0, got {name!r}")

    def set_bench_pos(self, targets, x, y) -> int:
        px = _check_finite(x, "bench position")
        py = _check_finite(y, "bench position")
        ids = sorted(set(targets))
        mods = [self.module(i) for i in ids]
        for m in mods:
            m.bench_pos = (px, py)
        if mods:
            self._bump()
        return len(mods)

    def set_signal_ref(self, targets, name: str | None) -> int:
        ids = sorted(set(targets))
        mods = [self.module(i) for i in ids]
        for m in mods:
            if m.kind not in SIGNAL_KINDS:
                raise KindMismatch(f"module {m.id} ({m.kind}) takes no input signal")
        for m in mods:
            m.signal_ref = name
        if mods:
            self._bump()
        return len(mods)

    def remove_module(self, module_id: int) -> None:
        self.module(module_id)
        del self.modules[module_id]
        self.endpoints.pop(module_id, None)
        self.attachments.pop(module_id, None)
        for ends in self.endpoints.values():
            for i, e in enumerate(ends):
                if e == module_id:
                    ends[i] = None
        for obs in [o for o, t in self.attachments.items() if t == module_id]:
            del self.attachments[obs]
        self._bump()

    # -- validation ---------------------------------------------------------

    def validate(self, known_signals=()) -> ValidationReport:
        """Report everything that would keep this network from simulating."""
        known = set(known_signals)
        issues: list[Issue] = []
        for mid in sorted(self.modules):
            mod = self.modules[mid]
            if mod.family is Family.LIA:
                ends = self.endpoints[mid]
                if ends[0] is None or ends[1] is None:
                    issues.append(Issue("DanglingLink", mid,
                                        f"{mod.kind} has {sum(e is not None for e in ends)} of 2 endpoints"))
            if mod.kind in ATTACH_TARGET_FAMILY and mid not in self.attachments:
                issues.append(Issue("DanglingObserver", mid, f"{mod.kind} has no target"))
            if "M" in mod.params and not mod.params["M"] > 0.0:
                issues.append(Issue("NonPositiveInertia", mid, f"M = {mod.params['M']}"))
            for name in TABLE_PARAMS & mod.params.keys():
                try:
                    validate_table(mod.params[name])
                except Exception as exc:
                    issues.append(Issue("MalformedTable", mid, f"{name}: {exc}"))
            if mod.kind in SIGNAL_KINDS:
                if mod.signal_ref is None:
                    issues.append(Issue("UnresolvedSignal", mid, f"{mod.kind} has no signal assigned"))
                elif mod.signal_ref not in known:
                    issues.append(Issue("UnresolvedSignal", mid,
                                        f"signal {mod.signal_ref!r} is not loaded"))
        return ValidationReport(issues)
