"""Unit-of-measure support for numeric values.

A ``Unit`` is a vector of integer exponents over the seven SI base dimensions
plus one synthetic dimension for computational throughput (FLOPS).  SI
prefixes contribute a scale factor; values are normalized to base scale when
they are constructed, so two quantities are compatible exactly when their
dimension vectors match (e.g. W divided by V reduces to A).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import EvalTypeError

# dimension order: m, kg, s, A, K, mol, cd, FLOPS
_NDIMS = 8
_BASE_SYMBOLS = ("m", "kg", "s", "A", "K", "mol", "cd", "FLOPS")


def _dims(**kw) -> tuple[int, ...]:
    v = [0] * _NDIMS
    for name, exp in kw.items():
        v[_BASE_SYMBOLS.index(name)] = exp
    return tuple(v)


@dataclass(frozen=True)
class Unit:
    """Dimension exponents plus a prefix scale factor.

    Stored values always use scale 1.0; a non-unit scale only appears
    transiently while parsing literals like ``400mA``.
    """

    dims: tuple[int, ...] = field(default=(0,) * _NDIMS)
    scale: float = 1.0

    @property
    def dimensionless(self) -> bool:
        return all(d == 0 for d in self.dims)

    def same_dims(self, other: "Unit") -> bool:
        return self.dims == other.dims

    def mul(self, other: "Unit") -> "Unit":
        return Unit(tuple(a + b for a, b in zip(self.dims, other.dims)),
                    self.scale * other.scale)

    def div(self, other: "Unit") -> "Unit":
        return Unit(tuple(a - b for a, b in zip(self.dims, other.dims)),
                    self.scale / other.scale)

    def pow(self, n: int) -> "Unit":
        return Unit(tuple(d * n for d in self.dims), self.scale ** n)

    def root(self, n: int) -> "Unit":
        if any(d % n for d in self.dims):
            raise EvalTypeError(f"unit {render_unit(self)} has no {n}-th root")
        return Unit(tuple(d // n for d in self.dims), self.scale)

    def base(self) -> "Unit":
        return Unit(self.dims, 1.0)


DIMENSIONLESS = Unit()

# symbol -> (dims, scale relative to the stored base)
_UNIT_TABLE: dict[str, tuple[tuple[int, ...], float]] = {
    "m": (_dims(m=1), 1.0),
    "g": (_dims(kg=1), 1e-3),
    "kg": (_dims(kg=1), 1.0),
    "s": (_dims(s=1), 1.0),
    "A": (_dims(A=1), 1.0),
    "K": (_dims(K=1), 1.0),
    "mol": (_dims(mol=1), 1.0),
    "cd": (_dims(cd=1), 1.0),
    "Hz": (_dims(s=-1), 1.0),
    "N": (_dims(kg=1, m=1, s=-2), 1.0),
    "Pa": (_dims(kg=1, m=-1, s=-2), 1.0),
    "J": (_dims(kg=1, m=2, s=-2), 1.0),
    "W": (_dims(kg=1, m=2, s=-3), 1.0),
    "V": (_dims(kg=1, m=2, s=-3, A=-1), 1.0),
    "Ohm": (_dims(kg=1, m=2, s=-3, A=-2), 1.0),
    "FLOPS": (_dims(FLOPS=1), 1.0),
}

_PREFIXES = {
    "n": 1e-9,
    "u": 1e-6,
    "m": 1e-3,
    "c": 1e-2,
    "d": 1e-1,
    "k": 1e3,
    "M": 1e6,
    "G": 1e9,
    "T": 1e12,
    "P": 1e15,
}

# preferred symbols for rendering, whole-symbol matches first
_RENDER_ORDER = ("A", "V", "W", "N", "J", "Hz", "Pa", "Ohm", "FLOPS",
                 "m", "kg", "s", "K", "mol", "cd")


def parse_unit(symbol: str) -> Unit:
    """Parse a unit symbol like ``V``, ``mA`` or ``kW`` (prefix split last)."""
    if symbol in _UNIT_TABLE:
        dims, scale = _UNIT_TABLE[symbol]
        return Unit(dims, scale)
    if len(symbol) > 1 and symbol[0] in _PREFIXES and symbol[1:] in _UNIT_TABLE:
        dims, scale = _UNIT_TABLE[symbol[1:]]
        return Unit(dims, scale * _PREFIXES[symbol[0]])
    raise EvalTypeError(f"unknown unit symbol {symbol!r}")


def is_unit_symbol(symbol: str) -> bool:
    try:
        parse_unit(symbol)
        return True
    except EvalTypeError:
        return False


def render_unit(unit: Unit) -> str:
    """Best-effort symbol for a dimension vector; '' for dimensionless."""
    if unit.dimensionless:
        return ""
    for sym in _RENDER_ORDER:
        if unit.dims == _UNIT_TABLE[sym][0]:
            return sym
    num = [f"{s}^{d}" if d != 1 else s
           for s, d in zip(_BASE_SYMBOLS, unit.dims) if d > 0]
    den = [f"{s}^{-d}" if d != -1 else s
           for s, d in zip(_BASE_SYMBOLS, unit.dims) if d < 0]
    out = "*".join(num) if num else "1"
    if den:
        out += "/" + "/".join(den)
    return out
