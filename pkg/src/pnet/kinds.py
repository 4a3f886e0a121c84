"""The twelve elementary module kinds.

Material modules (MAT family) carry a position on the single movement axis;
interaction modules (LIA family) compute a force between two MAT endpoints;
observers record position or force without influencing the physics.

Seven parameter names exist across all kinds (M, K, Z, S, fK, fZ, gain) and
two initial-state properties (X0, V0) on every MAT-family module.
"""

from __future__ import annotations

import enum
import math


class Family(enum.Enum):
    MAT = "MAT"
    LIA = "LIA"
    OBSERVER = "OBS"


class ModuleKind(enum.Enum):
    MAS = "MAS"  # free inertial point
    CEL = "CEL"  # inertial point with built-in spring and damper to the origin
    SOL = "SOL"  # immobile anchor point
    ENX = "ENX"  # position input: position follows an external signal
    ENF = "ENF"  # force input: injects an external signal into a target point
    RES = "RES"  # linear spring
    FRO = "FRO"  # linear damper
    REF = "REF"  # spring plus damper
    BUT = "BUT"  # one-sided buffer contact, engages below threshold S
    LNL = "LNL"  # nonlinear link driven by sampled force tables
    SOX = "SOX"  # position recorder (sound output)
    SOF = "SOF"  # force recorder (sound output)

    @property
    def family(self) -> Family:
        return _FAMILY[self]

    def __str__(self) -> str:
        return self.value


K = ModuleKind

MAT_KINDS = frozenset({K.MAS, K.CEL, K.SOL, K.ENX, K.ENF})
LIA_KINDS = frozenset({K.RES, K.FRO, K.REF, K.BUT, K.LNL})
OBSERVER_KINDS = frozenset({K.SOX, K.SOF})

_FAMILY = {}
for _k in MAT_KINDS:
    _FAMILY[_k] = Family.MAT
for _k in LIA_KINDS:
    _FAMILY[_k] = Family.LIA
for _k in OBSERVER_KINDS:
    _FAMILY[_k] = Family.OBSERVER

# Which parameter names are legal on which kind.  fK maps a position gap to a
# force, fZ maps a gap velocity to a force; both are sampled tables.
LEGAL_PARAMS: dict[ModuleKind, frozenset[str]] = {
    K.MAS: frozenset({"M"}),
    K.CEL: frozenset({"M", "K", "Z"}),
    K.SOL: frozenset(),
    K.ENX: frozenset(),
    K.ENF: frozenset(),
    K.RES: frozenset({"K"}),
    K.FRO: frozenset({"Z"}),
    K.REF: frozenset({"K", "Z"}),
    K.BUT: frozenset({"K", "Z", "S"}),
    K.LNL: frozenset({"fK", "fZ"}),
    K.SOX: frozenset({"gain"}),
    K.SOF: frozenset({"gain"}),
}

PARAM_NAMES = frozenset().union(*LEGAL_PARAMS.values())
TABLE_PARAMS = frozenset({"fK", "fZ"})
INIT_NAMES = ("X0", "V0")

# A table is a tuple of (abscissa, force) pairs with strictly increasing
# abscissae.  The default is a two-point zero function: adding a module must
# never inject energy.
Table = tuple[tuple[float, float], ...]
ZERO_TABLE: Table = ((-1.0, 0.0), (1.0, 0.0))

_DEFAULT_VALUES = {"M": 1.0, "K": 0.0, "Z": 0.0, "S": 0.0,
                   "fK": ZERO_TABLE, "fZ": ZERO_TABLE, "gain": 1.0}


def default_params(kind: ModuleKind) -> dict:
    return {name: _DEFAULT_VALUES[name] for name in LEGAL_PARAMS[kind]}


# Single-target attachments: observer kinds plus the force input, each with
# the family its target must belong to.
ATTACH_TARGET_FAMILY = {K.SOX: Family.MAT, K.SOF: Family.LIA, K.ENF: Family.MAT}

# Kinds that read an external signal buffer during simulation.
SIGNAL_KINDS = frozenset({K.ENX, K.ENF})


def kind_from_name(name: str) -> ModuleKind:
    try:
        return ModuleKind[name.upper()]
    except KeyError:
        raise ValueError(f"unknown module kind {name!r}") from None


def validate_table(value) -> Table:
    """Normalize and check a sampled-function table.

    Raises MalformedTable unless the table has >= 2 points, finite entries,
    and strictly increasing abscissae.
    """
    from .errors import MalformedTable

    try:
        pts = tuple((float(x), float(y)) for x, y in value)
    except (TypeError, ValueError):
        raise MalformedTable(f"table must be a sequence of (x, y) pairs, got {value!r}") from None
    if len(pts) < 2:
        raise MalformedTable(f"table needs at least 2 points, got {len(pts)}")
    for x, y in pts:
        if not (math.isfinite(x) and math.isfinite(y)):
            raise MalformedTable("table entries must be finite")
    for (x0, _), (x1, _) in zip(pts, pts[1:]):
        if not x0 < x1:
            raise MalformedTable(f"table abscissae must be strictly increasing ({x0} !< {x1})")
    return pts
