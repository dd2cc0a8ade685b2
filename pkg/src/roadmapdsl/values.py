"""The closed algebra of runtime quantities.

Every quantity a roadmap model computes with is a ``Value``:

* ``NumInterval`` -- a closed interval of unit-carrying reals,
* ``Ternary``     -- three-valued logic (true / false / maybe),
* ``DateValue``   -- an interval of absolute months (months since Jan of
  year 0, so Jan2021 is ``2021*12``),
* ``DurationValue`` -- an interval of month counts.

Intervals represent uncertainty: the quantity lies somewhere in the range.
The empty interval is *tainted* and marks a contradictory value; any
operation with a tainted operand yields a tainted result.  All operations
are inclusion isotonic and all values are immutable, so they are safe to
share between threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Union

from .errors import EvalTypeError
from .units import DIMENSIONLESS, Unit, render_unit

INF = math.inf

# ---------------------------------------------------------------------------
# months and dates
# ---------------------------------------------------------------------------

MONTH_NAMES = ("Jan", "Feb", "Mar", "Apr", "May", "Jun",
               "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")


def month_index(year: int, month: int) -> int:
    """Absolute month index for a calendar (year, 1-based month)."""
    return year * 12 + (month - 1)


def parse_month_literal(text: str) -> int:
    """``Jan2021`` -> absolute month index."""
    name, year = text[:3], text[3:]
    return month_index(int(year), MONTH_NAMES.index(name) + 1)


def render_month(index: float) -> str:
    if index == INF:
        return "inf"
    if index == -INF:
        return "-inf"
    if float(index).is_integer():
        i = int(index)
        year, mon = divmod(i, 12)
        return f"{MONTH_NAMES[mon]}{year:04d}"
    base = render_month(math.floor(index))
    return f"{base}+{index - math.floor(index):.2f}mo"


def parse_iso_month(text: str) -> int:
    """``2030-01`` -> absolute month index."""
    year, mon = text.split("-")
    return month_index(int(year), int(mon))


def render_iso_month(index: int) -> str:
    year, mon = divmod(int(index), 12)
    return f"{year:04d}-{mon + 1:02d}"


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------


class Ternary(enum.Enum):
    """Kleene three-valued logic plus the absorbing tainted (empty) value."""

    TRUE = "true"
    FALSE = "false"
    MAYBE = "maybe"
    TAINTED = "tainted"

    @property
    def tainted(self) -> bool:
        return self is Ternary.TAINTED

    @staticmethod
    def of(b: bool) -> "Ternary":
        return Ternary.TRUE if b else Ternary.FALSE


TRUE = Ternary.TRUE
FALSE = Ternary.FALSE
MAYBE = Ternary.MAYBE


def _ordered(lo: float, hi: float) -> tuple[float, float]:
    # restore lo <= hi by swapping, per the interval arithmetic ground rules
    if lo > hi:
        return hi, lo
    return lo, hi


@dataclass(frozen=True)
class NumInterval:
    lo: float
    hi: float
    unit: Unit = DIMENSIONLESS
    tainted: bool = False

    @staticmethod
    def make(lo: float, hi: float, unit: Unit = DIMENSIONLESS) -> "NumInterval":
        lo, hi = _ordered(lo * unit.scale, hi * unit.scale)
        return NumInterval(lo, hi, unit.base())

    @staticmethod
    def point(x: float, unit: Unit = DIMENSIONLESS) -> "NumInterval":
        return NumInterval.make(x, x, unit)

    @staticmethod
    def full(unit: Unit = DIMENSIONLESS) -> "NumInterval":
        return NumInterval(-INF, INF, unit.base())

    @staticmethod
    def empty(unit: Unit = DIMENSIONLESS) -> "NumInterval":
        return NumInterval(0.0, 0.0, unit.base(), tainted=True)

    @property
    def is_point(self) -> bool:
        return not self.tainted and self.lo == self.hi


@dataclass(frozen=True)
class DateValue:
    lo: float  # absolute months
    hi: float
    tainted: bool = False

    @staticmethod
    def make(lo: float, hi: float) -> "DateValue":
        lo, hi = _ordered(lo, hi)
        return DateValue(lo, hi)

    @staticmethod
    def point(months: float) -> "DateValue":
        return DateValue(months, months)

    @staticmethod
    def full() -> "DateValue":
        return DateValue(-INF, INF)

    @property
    def is_point(self) -> bool:
        return not self.tainted and self.lo == self.hi


@dataclass(frozen=True)
class DurationValue:
    lo: float  # month counts
    hi: float
    tainted: bool = False

    @staticmethod
    def make(lo: float, hi: float) -> "DurationValue":
        lo, hi = _ordered(lo, hi)
        return DurationValue(lo, hi)

    @staticmethod
    def point(months: float) -> "DurationValue":
        return DurationValue(months, months)

    @staticmethod
    def full() -> "DurationValue":
        return DurationValue(-INF, INF)

    @property
    def is_point(self) -> bool:
        return not self.tainted and self.lo == self.hi


Value = Union[NumInterval, Ternary, DateValue, DurationValue]


def is_tainted(v: Value) -> bool:
    if isinstance(v, Ternary):
        return v is Ternary.TAINTED
    return v.tainted


def _kind(v: Value) -> str:
    if isinstance(v, NumInterval):
        return "number"
    if isinstance(v, Ternary):
        return "boolean"
    if isinstance(v, DateValue):
        return "date"
    if isinstance(v, DurationValue):
        return "duration"
    raise EvalTypeError(f"not a value: {v!r}")


# ---------------------------------------------------------------------------
# raw interval arithmetic on float bounds
# ---------------------------------------------------------------------------


def _mul_bound(a: float, b: float) -> float:
    # 0 * inf taken as 0: the finite factor is exactly zero, so the product is
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


def _mul_bounds(alo, ahi, blo, bhi):
    cands = (_mul_bound(alo, blo), _mul_bound(alo, bhi),
             _mul_bound(ahi, blo), _mul_bound(ahi, bhi))
    return min(cands), max(cands)


def _recip_bounds(lo: float, hi: float) -> tuple[float, float] | None:
    """1/[lo..hi]; the split interval around a zero crossing is joined.

    Returns None for the reciprocal of the exact point zero (no real value).
    """
    if lo == 0.0 and hi == 0.0:
        return None
    if lo == 0.0:
        return (1.0 / hi if hi != INF else 0.0), INF
    if hi == 0.0:
        return -INF, (1.0 / lo if lo != -INF else 0.0)
    if lo < 0.0 < hi:
        return -INF, INF
    rlo = 1.0 / hi if not math.isinf(hi) else 0.0
    rhi = 1.0 / lo if not math.isinf(lo) else 0.0
    return _ordered(rlo, rhi)


def _safe_pow(a: float, n: float) -> float:
    try:
        return float(a) ** float(n)
    except OverflowError:
        return INF if a > 1.0 or (a < -1.0 and int(n) % 2 == 0) else -INF


def _pow_bounds(alo, ahi, n: float) -> tuple[float, float]:
    """Image of [alo..ahi] under x^n for a definite exponent n."""
    if n == 0:
        return 1.0, 1.0
    if float(n).is_integer():
        n = int(n)
        if n < 0:
            rec = _recip_bounds(*_pow_bounds(alo, ahi, -n))
            if rec is None:
                raise ZeroDivisionError
            return rec
        if n % 2 == 1:
            return _safe_pow(alo, n), _safe_pow(ahi, n)
        # even power: minimum at 0 when the interval straddles it
        cands = [_safe_pow(abs(alo), n), _safe_pow(abs(ahi), n)]
        lo = 0.0 if alo <= 0.0 <= ahi else min(cands)
        return lo, max(cands)
    # fractional exponent: clip the base to the nonnegative sub-domain
    if ahi < 0.0:
        raise ZeroDivisionError
    alo = max(alo, 0.0)
    return _ordered(_safe_pow(alo, n), _safe_pow(ahi, n))


# ---------------------------------------------------------------------------
# arithmetic on Values
# ---------------------------------------------------------------------------

_ARITH_OPS = ("+", "-", "*", "/", "^")


def arith(op: str, a: Value, b: Value) -> Value:
    """Apply a binary arithmetic operator with the language's typing rules."""
    if op not in _ARITH_OPS:
        raise EvalTypeError(f"unknown arithmetic operator {op!r}")
    ka, kb = _kind(a), _kind(b)
    if ka == "boolean" or kb == "boolean":
        raise EvalTypeError(f"{op} is not defined on boolean values")
    if is_tainted(a) or is_tainted(b):
        return _tainted_like(op, a, b)

    if ka == "number" and kb == "number":
        return _num_arith(op, a, b)
    if ka == "date" and kb == "duration" and op in ("+", "-"):
        if op == "+":
            return DateValue(a.lo + b.lo, a.hi + b.hi)
        return DateValue(a.lo - b.hi, a.hi - b.lo)
    if ka == "duration" and kb == "date" and op == "+":
        return DateValue(a.lo + b.lo, a.hi + b.hi)
    if ka == "date" and kb == "date" and op == "-":
        return DurationValue(a.lo - b.hi, a.hi - b.lo)
    if ka == "duration" and kb == "duration" and op in ("+", "-"):
        if op == "+":
            return DurationValue(a.lo + b.lo, a.hi + b.hi)
        return DurationValue(a.lo - b.hi, a.hi - b.lo)
    if ka == "duration" and kb == "number" and op == "*":
        _require_dimensionless(b, "duration * number")
        return DurationValue(*_mul_bounds(a.lo, a.hi, b.lo, b.hi))
    if ka == "number" and kb == "duration" and op == "*":
        _require_dimensionless(a, "number * duration")
        return DurationValue(*_mul_bounds(a.lo, a.hi, b.lo, b.hi))
    if ka == "duration" and kb == "number" and op == "/":
        _require_dimensionless(b, "duration / number")
        rec = _recip_bounds(b.lo, b.hi)
        if rec is None:
            return DurationValue(0.0, 0.0, tainted=True)
        return DurationValue(*_mul_bounds(a.lo, a.hi, *rec))
    raise EvalTypeError(f"{ka} {op} {kb} is not allowed")


def _tainted_like(op: str, a: Value, b: Value) -> Value:
    # determine the result's type so taint keeps flowing with correct typing
    probe_a = _untainted_probe(a)
    probe_b = _untainted_probe(b)
    result = arith(op, probe_a, probe_b)
    return _taint(result)


def _untainted_probe(v: Value) -> Value:
    if isinstance(v, Ternary):
        return MAYBE
    if isinstance(v, NumInterval):
        return NumInterval(1.0, 1.0, v.unit)
    if isinstance(v, DateValue):
        return DateValue(0.0, 0.0)
    return DurationValue(1.0, 1.0)


def _taint(v: Value) -> Value:
    if isinstance(v, Ternary):
        return Ternary.TAINTED
    if isinstance(v, NumInterval):
        return NumInterval(v.lo, v.hi, v.unit, tainted=True)
    if isinstance(v, DateValue):
        return DateValue(v.lo, v.hi, tainted=True)
    return DurationValue(v.lo, v.hi, tainted=True)


def _require_dimensionless(v: NumInterval, what: str) -> None:
    if not v.unit.dimensionless:
        raise EvalTypeError(f"{what} requires a dimensionless number")


def _num_arith(op: str, a: NumInterval, b: NumInterval) -> NumInterval:
    if op in ("+", "-"):
        if not a.unit.same_dims(b.unit):
            raise EvalTypeError(
                f"unit mismatch: {render_unit(a.unit) or '1'} {op} "
                f"{render_unit(b.unit) or '1'}")
        if op == "+":
            return NumInterval(a.lo + b.lo, a.hi + b.hi, a.unit)
        return NumInterval(a.lo - b.hi, a.hi - b.lo, a.unit)
    if op == "*":
        lo, hi = _mul_bounds(a.lo, a.hi, b.lo, b.hi)
        return NumInterval(lo, hi, a.unit.mul(b.unit).base())
    if op == "/":
        unit = a.unit.div(b.unit).base()
        rec = _recip_bounds(b.lo, b.hi)
        if rec is None:
            return NumInterval(0.0, 0.0, unit, tainted=True)
        lo, hi = _mul_bounds(a.lo, a.hi, *rec)
        return NumInterval(lo, hi, unit)
    # op == "^"
    _require_dimensionless(b, "the exponent of ^")
    if b.is_point:
        n = b.lo
        if not a.unit.dimensionless and not float(n).is_integer():
            raise EvalTypeError("fractional powers require a dimensionless base")
        try:
            lo, hi = _pow_bounds(a.lo, a.hi, n)
        except ZeroDivisionError:
            return NumInterval.empty(a.unit)
        unit = a.unit.pow(int(n)) if float(n).is_integer() else a.unit
        return NumInterval(*_ordered(lo, hi), unit)
    # interval exponent: corners suffice for a positive base (log-linear),
    # so clip the base to the positive half line first
    _require_dimensionless(a, "an interval exponent")
    alo = max(a.lo, 0.0)
    ahi = a.hi
    if ahi < 0.0:
        return NumInterval.empty(a.unit)
    cands = []
    for base in (alo, ahi):
        for n in (b.lo, b.hi):
            try:
                cands.append(float(base) ** float(n))
            except (OverflowError, ZeroDivisionError):
                cands.append(INF)
    if alo <= 1.0 <= ahi or b.lo <= 0.0 <= b.hi:
        cands.append(1.0)
    return NumInterval(min(cands), max(cands), DIMENSIONLESS)


def negate(a: Value) -> Value:
    """Unary minus."""
    if isinstance(a, NumInterval):
        return NumInterval(-a.hi, -a.lo, a.unit, a.tainted)
    if isinstance(a, DurationValue):
        return DurationValue(-a.hi, -a.lo, a.tainted)
    raise EvalTypeError(f"unary - is not defined on {_kind(a)} values")


# ---------------------------------------------------------------------------
# comparisons and ternary logic
# ---------------------------------------------------------------------------

_CMP_OPS = ("<", "<=", ">", ">=", "=", "==", "!=")


def compare(op: str, a: Value, b: Value) -> Ternary:
    """Three-valued comparison: true iff the relation holds for every pair of
    points, false iff it holds for no pair, maybe otherwise."""
    if op not in _CMP_OPS:
        raise EvalTypeError(f"unknown comparison operator {op!r}")
    ka, kb = _kind(a), _kind(b)
    if ka != kb or ka == "boolean":
        raise EvalTypeError(f"cannot compare {ka} with {kb}")
    if ka == "number" and not a.unit.same_dims(b.unit):
        raise EvalTypeError(
            f"unit mismatch in comparison: {render_unit(a.unit) or '1'} vs "
            f"{render_unit(b.unit) or '1'}")
    if is_tainted(a) or is_tainted(b):
        return Ternary.TAINTED
    return _cmp_bounds(op, a.lo, a.hi, b.lo, b.hi)


def _cmp_bounds(op, alo, ahi, blo, bhi) -> Ternary:
    if op == "<":
        if ahi < blo:
            return TRUE
        if alo >= bhi:
            return FALSE
        return MAYBE
    if op == "<=":
        if ahi <= blo:
            return TRUE
        if alo > bhi:
            return FALSE
        return MAYBE
    if op == ">":
        return _cmp_bounds("<", blo, bhi, alo, ahi)
    if op == ">=":
        return _cmp_bounds("<=", blo, bhi, alo, ahi)
    if op in ("=", "=="):
        if alo == ahi == blo == bhi:
            return TRUE
        if ahi < blo or bhi < alo:
            return FALSE
        return MAYBE
    # op == "!="
    return kleene_not(_cmp_bounds("=", alo, ahi, blo, bhi))


def kleene_not(a: Ternary) -> Ternary:
    if a is Ternary.TAINTED:
        return a
    if a is TRUE:
        return FALSE
    if a is FALSE:
        return TRUE
    return MAYBE


def kleene_and(a: Ternary, b: Ternary) -> Ternary:
    if a is Ternary.TAINTED or b is Ternary.TAINTED:
        return Ternary.TAINTED
    if a is FALSE or b is FALSE:
        return FALSE
    if a is MAYBE or b is MAYBE:
        return MAYBE
    return TRUE


def kleene_or(a: Ternary, b: Ternary) -> Ternary:
    if a is Ternary.TAINTED or b is Ternary.TAINTED:
        return Ternary.TAINTED
    if a is TRUE or b is TRUE:
        return TRUE
    if a is MAYBE or b is MAYBE:
        return MAYBE
    return FALSE


def kleene(op: str, a: Ternary, b: Ternary | None = None) -> Ternary:
    if op == "!":
        return kleene_not(a)
    if op == "&":
        return kleene_and(a, b)
    if op == "|":
        return kleene_or(a, b)
    raise EvalTypeError(f"unknown boolean operator {op!r}")


# ---------------------------------------------------------------------------
# intersection, hull, containment
# ---------------------------------------------------------------------------


def intersect(a: Value, b: Value) -> Value:
    """Set intersection; disjoint operands yield the tainted empty value."""
    ka, kb = _kind(a), _kind(b)
    if ka != kb:
        raise EvalTypeError(f"cannot intersect {ka} with {kb}")
    if ka == "boolean":
        if a is Ternary.TAINTED or b is Ternary.TAINTED:
            return Ternary.TAINTED
        if a is b or a is MAYBE:
            return b
        if b is MAYBE:
            return a
        return Ternary.TAINTED  # true vs false
    if ka == "number" and not a.unit.same_dims(b.unit):
        raise EvalTypeError("unit mismatch in intersection")
    if is_tainted(a) or is_tainted(b):
        return _taint(a)
    lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
    if lo > hi:
        return _taint(a)
    if ka == "number":
        return NumInterval(lo, hi, a.unit)
    if ka == "date":
        return DateValue(lo, hi)
    return DurationValue(lo, hi)


def hull(a: Value, b: Value) -> Value:
    """Smallest value covering both operands (join); used for conditionals
    whose condition is uncertain.  Taint is absorbing."""
    ka, kb = _kind(a), _kind(b)
    if ka != kb:
        raise EvalTypeError(f"cannot join {ka} with {kb}")
    if is_tainted(a) or is_tainted(b):
        return _taint(a) if not isinstance(a, Ternary) else Ternary.TAINTED
    if ka == "boolean":
        return a if a is b else MAYBE
    if ka == "number":
        if not a.unit.same_dims(b.unit):
            raise EvalTypeError("unit mismatch in join")
        return NumInterval(min(a.lo, b.lo), max(a.hi, b.hi), a.unit)
    if ka == "date":
        return DateValue(min(a.lo, b.lo), max(a.hi, b.hi))
    return DurationValue(min(a.lo, b.lo), max(a.hi, b.hi))


def contains(outer: Value, inner: Value) -> bool:
    """outer superset-or-equal inner (tainted inner counts as contained)."""
    if is_tainted(inner):
        return True
    if is_tainted(outer):
        return False
    if isinstance(outer, Ternary):
        return outer is inner or outer is MAYBE
    return outer.lo <= inner.lo and inner.hi <= outer.hi


# ---------------------------------------------------------------------------
# utility functions over values
# ---------------------------------------------------------------------------


def _safe_exp(x: float) -> float:
    if x == -INF:
        return 0.0
    if x == INF:
        return INF
    try:
        return math.exp(x)
    except OverflowError:
        return INF


def _trig_image(lo: float, hi: float, fn: str) -> tuple[float, float]:
    """Analytic image of [lo..hi] under sin/cos, including interior extrema."""
    if math.isinf(lo) or math.isinf(hi) or hi - lo >= 2.0 * math.pi:
        return -1.0, 1.0
    f = math.sin if fn == "sin" else math.cos
    cands = [f(lo), f(hi)]
    # critical points: sin peaks at pi/2 + 2k*pi, cos at 2k*pi, etc.
    top = math.pi / 2.0 if fn == "sin" else 0.0
    bottom = top + math.pi
    for crit, val in ((top, 1.0), (bottom, -1.0)):
        k = math.ceil((lo - crit) / (2.0 * math.pi))
        if crit + 2.0 * math.pi * k <= hi:
            cands.append(val)
    return min(cands), max(cands)


def _monotone_clipped(a: NumInterval, f, dom_lo: float,
                      closed_lo: bool) -> NumInterval:
    """Image under an increasing f defined on [dom_lo, inf) (or (dom_lo, inf)).

    Operands entirely outside the domain are a certain error and taint;
    partial overlap clips to the valid sub-domain.
    """
    if a.hi < dom_lo or (not closed_lo and a.hi == dom_lo):
        return NumInterval.empty(DIMENSIONLESS)
    lo = max(a.lo, dom_lo)
    flo = f(lo) if (closed_lo or lo > dom_lo) else -INF
    fhi = f(a.hi) if not math.isinf(a.hi) else INF
    return NumInterval(flo, fhi, DIMENSIONLESS)


def _linear_interp(x: float, xs: Sequence[float], ys: Sequence[float]) -> float:
    if x <= xs[0]:
        return ys[0]
    if x >= xs[-1]:
        return ys[-1]
    for i in range(len(xs) - 1):
        if xs[i] <= x <= xs[i + 1]:
            t = (x - xs[i]) / (xs[i + 1] - xs[i])
            return ys[i] + t * (ys[i + 1] - ys[i])
    raise AssertionError("unreachable: knots are ordered")


def _fn_linear(args: list[Value]) -> Value:
    if len(args) < 5 or len(args) % 2 == 0:
        raise EvalTypeError(
            "linear(x, x0, y0, ..., xn, yn) needs x plus at least two knots")
    x = args[0]
    knots_x = args[1::2]
    knots_y = args[2::2]
    xkind = _kind(x)
    if xkind not in ("number", "date", "duration"):
        raise EvalTypeError("linear: x must be a number, date, or duration")
    for kx in knots_x:
        if _kind(kx) != xkind:
            raise EvalTypeError("linear: knot positions must match the type of x")
        if not kx.is_point:
            raise EvalTypeError("linear: knot positions must be definite")
    unit = None
    for ky in knots_y:
        if not isinstance(ky, NumInterval):
            raise EvalTypeError("linear: knot values must be numbers")
        if unit is None:
            unit = ky.unit
        elif not ky.unit.same_dims(unit):
            raise EvalTypeError("linear: knot values must share a unit")
    if any(is_tainted(v) for v in args):
        return NumInterval(0.0, 0.0, unit, tainted=True)
    xs = [kx.lo for kx in knots_x]
    if any(xs[i] >= xs[i + 1] for i in range(len(xs) - 1)):
        raise EvalTypeError("linear: knot positions must be strictly increasing")
    if xkind == "number" and not x.unit.same_dims(knots_x[0].unit):
        raise EvalTypeError("linear: x and knot positions must share a unit")
    # evaluate at the (clamped) interval ends plus every interior knot;
    # values outside the knot range clamp to the boundary knot values
    ylo = [ky.lo for ky in knots_y]
    yhi = [ky.hi for ky in knots_y]
    los = [_linear_interp(x.lo, xs, ylo), _linear_interp(x.hi, xs, ylo)]
    his = [_linear_interp(x.lo, xs, yhi), _linear_interp(x.hi, xs, yhi)]
    for kx, klo, khi in zip(xs, ylo, yhi):
        if x.lo <= kx <= x.hi:
            los.append(klo)
            his.append(khi)
    return NumInterval(min(los), max(his), unit)


def _fn_min_max(name: str, args: list[Value]) -> Value:
    if not args:
        raise EvalTypeError(f"{name}() needs at least one argument")
    kind = _kind(args[0])
    if kind == "boolean":
        raise EvalTypeError(f"{name} is not defined on boolean values")
    for v in args[1:]:
        if _kind(v) != kind:
            raise EvalTypeError(f"{name}: mixed argument types")
        if kind == "number" and not v.unit.same_dims(args[0].unit):
            raise EvalTypeError(f"{name}: unit mismatch")
    if any(is_tainted(v) for v in args):
        return _taint(args[0])
    agg = min if name == "min" else max
    lo = agg(v.lo for v in args)
    hi = agg(v.hi for v in args)
    if kind == "number":
        return NumInterval(lo, hi, args[0].unit)
    if kind == "date":
        return DateValue(lo, hi)
    return DurationValue(lo, hi)


def index_of_max(args: Sequence[Value]) -> NumInterval:
    """1-based index of the first largest argument.

    Definite only when one argument certainly beats every other (strictly
    for earlier arguments, which would win ties); otherwise an integer
    interval over all candidate indices.
    """
    if not args:
        raise EvalTypeError("index_of_max() needs at least one argument")
    for v in args:
        if not isinstance(v, NumInterval):
            raise EvalTypeError("index_of_max: arguments must be numbers")
        if not v.unit.same_dims(args[0].unit):
            raise EvalTypeError("index_of_max: unit mismatch")
    if any(is_tainted(v) for v in args):
        return NumInterval(1.0, 1.0, DIMENSIONLESS, tainted=True)
    candidates = []
    for k, vk in enumerate(args):
        # k can be the first maximum: every earlier arg may be beaten
        # strictly, every later one may be matched or beaten
        possible = all(vi.lo < vk.hi for i, vi in enumerate(args) if i < k) and \
                   all(vi.lo <= vk.hi for i, vi in enumerate(args) if i > k)
        if possible:
            candidates.append(k + 1)
    for k, vk in enumerate(args):
        certain = all(vi.hi < vk.lo for i, vi in enumerate(args) if i < k) and \
                  all(vi.hi <= vk.lo for i, vi in enumerate(args) if i > k)
        if certain:
            return NumInterval.point(float(k + 1))
    return NumInterval(float(min(candidates)), float(max(candidates)))


def apply_function(name: str, args: list[Value]) -> Value:
    """Evaluate a builtin utility function on values."""
    if name in ("min", "max"):
        return _fn_min_max(name, args)
    if name == "linear":
        return _fn_linear(args)
    if name == "index_of_max":
        return index_of_max(args)
    if name == "num":
        (t,) = _expect_args(name, args, 1)
        if not isinstance(t, Ternary):
            raise EvalTypeError("num() converts a boolean to a number")
        if t is Ternary.TAINTED:
            return NumInterval.empty(DIMENSIONLESS)
        if t is TRUE:
            return NumInterval.point(1.0)
        if t is FALSE:
            return NumInterval.point(0.0)
        return NumInterval(0.0, 1.0, DIMENSIONLESS)
    if name in ("months", "years"):
        (n,) = _expect_args(name, args, 1)
        if not isinstance(n, NumInterval):
            raise EvalTypeError(f"{name}() takes a number")
        _require_dimensionless(n, name)
        if n.tainted:
            return DurationValue(0.0, 0.0, tainted=True)
        factor = 1.0 if name == "months" else 12.0
        return DurationValue(n.lo * factor, n.hi * factor)

    (a,) = _expect_args(name, args, 1)
    if not isinstance(a, NumInterval):
        raise EvalTypeError(f"{name}() takes a number")
    if a.tainted:
        return NumInterval.empty(DIMENSIONLESS)
    if name in ("sin", "cos"):
        _require_dimensionless(a, name)
        lo, hi = _trig_image(a.lo, a.hi, name)
        return NumInterval(lo, hi, DIMENSIONLESS)
    if name == "exp":
        _require_dimensionless(a, name)
        return NumInterval(_safe_exp(a.lo), _safe_exp(a.hi), DIMENSIONLESS)
    if name == "ln":
        _require_dimensionless(a, name)
        return _monotone_clipped(a, math.log, 0.0, closed_lo=False)
    if name == "log":
        _require_dimensionless(a, name)
        return _monotone_clipped(a, math.log10, 0.0, closed_lo=False)
    if name == "sqrt":
        unit = a.unit.root(2)
        out = _monotone_clipped(a, math.sqrt, 0.0, closed_lo=True)
        return NumInterval(out.lo, out.hi, unit, out.tainted)
    raise EvalTypeError(f"unknown function {name!r}")


def _expect_args(name: str, args: list[Value], n: int) -> list[Value]:
    if len(args) != n:
        raise EvalTypeError(f"{name}() takes {n} argument(s), got {len(args)}")
    return args


FUNCTION_NAMES = ("sin", "cos", "exp", "ln", "log", "sqrt", "min", "max",
                  "num", "linear", "months", "years", "index_of_max")


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def _num_text(x: float, sig: int | None = None) -> str:
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    if sig is not None:
        return f"{x:.{sig}g}"
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    text = repr(float(x))
    if "e" in text or "E" in text:
        text = f"{x:.17f}".rstrip("0").rstrip(".")
    return text


def _duration_text(months: float, sig: int | None = None) -> str:
    return f"months({_num_text(months, sig)})"


def render_value(v: Value, sig: int | None = None) -> str:
    """Canonical text form: ``[3A..4A]``, ``maybe``, ``Jun2021``, ``months(5)``.

    Degenerate intervals render as single literals.  ``sig`` rounds numbers
    to that many significant digits (display only).
    """
    if isinstance(v, Ternary):
        return v.value
    if is_tainted(v):
        return "empty"
    if isinstance(v, NumInterval):
        sym = render_unit(v.unit)
        if v.is_point:
            return _num_text(v.lo, sig) + sym
        if (math.isinf(v.lo) or math.isinf(v.hi)) and sym:
            return f"[{_num_text(v.lo, sig)}..{_num_text(v.hi, sig)}]*1{sym}"
        return f"[{_num_text(v.lo, sig)}{sym}..{_num_text(v.hi, sig)}{sym}]"
    if isinstance(v, DateValue):
        if v.is_point:
            return render_month(v.lo)
        return f"[{render_month(v.lo)}..{render_month(v.hi)}]"
    if isinstance(v, DurationValue):
        if v.is_point:
            return _duration_text(v.lo, sig)
        return f"[{_duration_text(v.lo, sig)}..{_duration_text(v.hi, sig)}]"
    raise EvalTypeError(f"not a value: {v!r}")


def display_value(v: Value) -> str:
    """Rendering for human output: 4 significant digits."""
    return render_value(v, sig=4)
