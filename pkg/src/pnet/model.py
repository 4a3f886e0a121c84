"""A complete editable document: network, labels, bench notes, sim settings.

The model is the single-writer surface everything edits through.  Its
revision counter covers every kind of mutation (network, labels, notes,
settings), so snapshot consumers such as the sim compiler can key caches on
one number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import IllegalParamValue, UnknownId
from .kinds import ModuleKind
from .labels import LabelIndex
from .network import Network, ValidationReport
from .picker import eval_picker, parse_picker


@dataclass
class BenchNote:
    id: int
    pos: tuple[float, float]
    html: str


@dataclass
class SimSettings:
    rate: int = 44100          # steps (= samples) per second
    duration: int = 44100      # steps
    decimation: int = 64       # steps per motion-trace frame
    trace: str = "all"         # picker text, "all", or "none"
    threads: int = 1

    KEYS = ("rate", "duration", "decimation", "trace", "threads")

    def set_option(self, name: str, value):
        if name not in self.KEYS:
            raise IllegalParamValue(f"unknown sim option {name!r}")
        if name == "trace":
            if value not in ("all", "none"):
                parse_picker(value)  # raises PickerSyntaxError if bad
            self.trace = value
            return
        v = int(value)
        low = {"rate": 1, "duration": 0, "decimation": 1, "threads": 1}[name]
        if v < low:
            raise IllegalParamValue(f"sim option {name} must be >= {low}, got {v}")
        setattr(self, name, v)


class Model:
    """The authoritative document; wraps the network with label bookkeeping."""

    def __init__(self):
        self.network = Network()
        self.labels = LabelIndex()
        self.notes: dict[int, BenchNote] = {}
        self.sim = SimSettings()
        self._next_note_id = 1
        self._revision = 0

    @property
    def revision(self) -> int:
        return self._revision

    def _bump(self):
        self._revision += 1

    # -- network edits (each registers/cleans labels and bumps the revision) --

    def add_module(self, kind: ModuleKind, bench_pos=(0.0, 0.0)) -> int:
        mid = self.network.add_module(kind, bench_pos)
        self.labels.register_system(mid)
        self._bump()
        return mid

    def remove_module(self, module_id: int) -> None:
        self.network.remove_module(module_id)
        self.labels.drop_module(module_id)
        self._bump()

    def connect(self, lia: int, a: int, b: int) -> None:
        self.network.connect(lia, a, b)
        self._bump()

    def attach(self, module_id: int, target: int) -> None:
        self.network.attach(module_id, target)
        self._bump()

    def disconnect(self, module_id: int) -> None:
        self.network.disconnect(module_id)
        self._bump()

    def set_param(self, targets, name, value, strict=True) -> int:
        n = self.network.set_param(targets, name, value, strict)
        if n:
            self._bump()
        return n

    def set_initial(self, targets, name, value) -> int:
        n = self.network.set_initial(targets, name, value)
        if n:
            self._bump()
        return n

    def set_bench_pos(self, targets, x, y) -> int:
        n = self.network.set_bench_pos(targets, x, y)
        if n:
            self._bump()
        return n

    def set_signal_ref(self, targets, name) -> int:
        n = self.network.set_signal_ref(targets, name)
        if n:
            self._bump()
        return n

    # -- labels --------------------------------------------------------------

    def add_label(self, module_id: int, text: str) -> None:
        if module_id not in self.network:
            raise UnknownId(f"no module with id {module_id}")
        self.labels.add(module_id, text)
        self._bump()

    def remove_label(self, text: str) -> None:
        self.labels.remove(text)
        self._bump()

    def labels_of(self, module_id: int) -> list[str]:
        if module_id not in self.network:
            raise UnknownId(f"no module with id {module_id}")
        return self.labels.labels_of(module_id)

    def resolve_radical(self, radical: str) -> set[int]:
        return self.labels.resolve_radical(radical)

    def eval_picker(self, expr) -> set[int]:
        return eval_picker(expr, self.labels)

    def resolve_targets(self, designator: str) -> list[int]:
        """Resolve an id string, label, or picker expression to sorted ids."""
        designator = designator.strip()
        if designator.lstrip("-").isdigit():
            mid = int(designator)
            self.network.module(mid)  # raises UnknownId
            return [mid]
        return sorted(self.eval_picker(designator))

    def resolve_single(self, designator) -> int:
        """Like resolve_targets but demands exactly one match."""
        if isinstance(designator, int):
            self.network.module(designator)
            return designator
        targets = self.resolve_targets(str(designator))
        if len(targets) != 1:
            raise UnknownId(
                f"designator {designator!r} matches {len(targets)} modules, need exactly 1")
        return targets[0]

    # -- bench notes ---------------------------------------------------------

    def add_note(self, pos, html: str) -> int:
        x, y = float(pos[0]), float(pos[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            raise IllegalParamValue("note position must be finite")
        nid = self._next_note_id
        self._next_note_id += 1
        self.notes[nid] = BenchNote(nid, (x, y), html)
        self._bump()
        return nid

    def remove_note(self, note_id: int) -> None:
        if note_id not in self.notes:
            raise UnknownId(f"no note with id {note_id}")
        del self.notes[note_id]
        self._bump()

    # -- settings ------------------------------------------------------------

    def set_sim_option(self, name: str, value) -> None:
        self.sim.set_option(name, value)
        self._bump()

    # -- queries -------------------------------------------------------------

    def validate(self, known_signals=()) -> ValidationReport:
        return self.network.validate(known_signals)

    def stats(self) -> dict:
        from .kinds import Family
        mats = sum(1 for m in self.network.modules.values() if m.family is Family.MAT)
        lias = sum(1 for m in self.network.modules.values() if m.family is Family.LIA)
        return {
            "modules": len(self.network),
            "mats": mats,
            "lias": lias,
            "observers": len(self.network) - mats - lias,
            "labels": len(self.labels),
            "notes": len(self.notes),
            "revision": self.revision,
        }
