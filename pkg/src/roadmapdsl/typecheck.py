"""Static types for the expression language and the checking pass.

Types are Boolean, Number (with a unit dimension), Date, and Duration.
The checker annotates every node (``etype``) and raises ``TypeCheckError``
carrying the spans of both offending subexpressions on a mismatch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .errors import TypeCheckError
from .expr import (
    Agg,
    Binary,
    Call,
    Cast,
    Cond,
    Expr,
    Ident,
    IntervalLit,
    Lit,
    RefExpr,
    TimeSym,
    Unary,
)
from .units import DIMENSIONLESS, Unit, render_unit
from .values import DateValue, DurationValue, NumInterval, Ternary


@dataclass(frozen=True)
class ExprType:
    kind: str  # bool | num | date | duration
    unit: Unit = None

    def render(self) -> str:
        if self.kind == "num":
            return render_unit(self.unit) or "num"
        return self.kind


BOOL = ExprType("bool")
DATE = ExprType("date")
DURATION = ExprType("duration")


def num_type(unit: Unit = DIMENSIONLESS) -> ExprType:
    return ExprType("num", unit.base())


def type_of_value(v) -> ExprType:
    if isinstance(v, Ternary):
        return BOOL
    if isinstance(v, NumInterval):
        return num_type(v.unit)
    if isinstance(v, DateValue):
        return DATE
    if isinstance(v, DurationValue):
        return DURATION
    raise TypeCheckError(f"not a value: {v!r}")


def _same(a: ExprType, b: ExprType) -> bool:
    if a.kind != b.kind:
        return False
    if a.kind == "num":
        return a.unit.same_dims(b.unit)
    return True


def _mismatch(msg: str, a: Expr, b: Expr) -> TypeCheckError:
    return TypeCheckError(msg, span=a.span, other_span=b.span)


def typecheck(node: Expr, env: Mapping) -> ExprType:
    """Infer and annotate the type of ``node``.

    ``env`` maps reference keys to types: identifier path tuples for
    unresolved trees, ``Reference`` objects for resolved ones.
    """
    t = _check(node, env)
    node.etype = t
    return t


def _check(node: Expr, env: Mapping) -> ExprType:
    t = _infer(node, env)
    node.etype = t
    return t


def _infer(node: Expr, env: Mapping) -> ExprType:
    if isinstance(node, Lit):
        return type_of_value(node.value)
    if isinstance(node, TimeSym):
        return DATE
    if isinstance(node, IntervalLit):
        lo = _check(node.lo, env)
        hi = _check(node.hi, env)
        if not _same(lo, hi):
            raise _mismatch(
                f"interval bounds disagree: {lo.render()} vs {hi.render()}",
                node.lo, node.hi)
        if lo.kind == "bool":
            raise TypeCheckError("boolean intervals are not supported",
                                 span=node.span)
        return lo
    if isinstance(node, (Ident, RefExpr)):
        key = node.path if isinstance(node, Ident) else node.ref
        try:
            t = env[key]
        except KeyError:
            name = ".".join(key) if isinstance(node, Ident) else str(key)
            raise TypeCheckError(f"unresolved reference {name}",
                                 span=node.span) from None
        if isinstance(node, Ident):
            is_kpi = node.path[-1].startswith("?kpi")
            # ?kpiN takes (implementationBlock, time); everything else (time)
            time_args = node.args[1:] if is_kpi else node.args
        else:
            time_args = (node.time,)
        for arg in time_args:
            at = _check(arg, env)
            if at.kind != "date":
                raise TypeCheckError(
                    f"time argument must be a date, got {at.render()}",
                    span=arg.span)
        return t
    if isinstance(node, Unary):
        t = _check(node.operand, env)
        if node.op == "!":
            if t.kind != "bool":
                raise TypeCheckError(f"! needs a boolean, got {t.render()}",
                                     span=node.operand.span)
            return BOOL
        # unary minus
        if t.kind == "num":
            return t
        if t.kind == "duration":
            return DURATION
        raise TypeCheckError(f"unary - is not defined on {t.render()}",
                             span=node.operand.span)
    if isinstance(node, Binary):
        return _infer_binary(node, env)
    if isinstance(node, Cond):
        ct = _check(node.cond, env)
        if ct.kind != "bool":
            raise TypeCheckError(
                f"condition must be boolean, got {ct.render()}",
                span=node.cond.span)
        tt = _check(node.then, env)
        et = _check(node.els, env)
        if not _same(tt, et):
            raise _mismatch(
                f"branches disagree: {tt.render()} vs {et.render()}",
                node.then, node.els)
        return tt
    if isinstance(node, Agg):
        raise TypeCheckError(
            f"aggregation {node.name} must be expanded before type checking",
            span=node.span)
    if isinstance(node, Call):
        return _infer_call(node, env)
    if isinstance(node, Cast):
        t = _check(node.operand, env)
        if t.kind != "num":
            raise TypeCheckError(f"cannot cast {t.render()} to a unit",
                                 span=node.operand.span)
        if not t.unit.same_dims(node.unit):
            raise TypeCheckError(
                f"unit cast mismatch: value has {t.render()}, "
                f"cast asserts {node.symbol}", span=node.span)
        return num_type(node.unit)
    raise TypeCheckError(f"cannot type {node!r}", span=node.span)


_COMPARABLE = ("num", "date", "duration")


def _infer_binary(node: Binary, env: Mapping) -> ExprType:
    op = node.op
    lt = _check(node.lhs, env)
    rt = _check(node.rhs, env)
    if op in ("&", "|"):
        for t, side in ((lt, node.lhs), (rt, node.rhs)):
            if t.kind != "bool":
                raise TypeCheckError(f"{op} needs booleans, got {t.render()}",
                                     span=side.span)
        return BOOL
    if op in ("<", "<=", ">", ">=", "=", "!="):
        if lt.kind != rt.kind or lt.kind not in _COMPARABLE:
            raise _mismatch(f"cannot compare {lt.render()} with {rt.render()}",
                            node.lhs, node.rhs)
        if lt.kind == "num" and not lt.unit.same_dims(rt.unit):
            raise _mismatch(
                f"cannot compare {lt.render()} with {rt.render()}",
                node.lhs, node.rhs)
        return BOOL
    # arithmetic
    if lt.kind == "num" and rt.kind == "num":
        if op in ("+", "-"):
            if not lt.unit.same_dims(rt.unit):
                raise _mismatch(
                    f"unit mismatch: {lt.render()} {op} {rt.render()}",
                    node.lhs, node.rhs)
            return lt
        if op == "*":
            return num_type(lt.unit.mul(rt.unit))
        if op == "/":
            return num_type(lt.unit.div(rt.unit))
        if op == "^":
            if not rt.unit.dimensionless:
                raise TypeCheckError("the exponent must be dimensionless",
                                     span=node.rhs.span)
            if lt.unit.dimensionless:
                return num_type()
            exp = _integer_literal(node.rhs)
            if exp is None:
                raise TypeCheckError(
                    "a base with a unit needs a literal integer exponent",
                    span=node.rhs.span)
            return num_type(lt.unit.pow(exp))
    pair = (lt.kind, op, rt.kind)
    table = {
        ("date", "+", "duration"): DATE,
        ("date", "-", "duration"): DATE,
        ("duration", "+", "date"): DATE,
        ("date", "-", "date"): DURATION,
        ("duration", "+", "duration"): DURATION,
        ("duration", "-", "duration"): DURATION,
    }
    if pair in table:
        return table[pair]
    if op == "*" and {lt.kind, rt.kind} == {"duration", "num"}:
        numside = node.lhs if lt.kind == "num" else node.rhs
        numtype = lt if lt.kind == "num" else rt
        if not numtype.unit.dimensionless:
            raise TypeCheckError("duration scaling needs a dimensionless "
                                 "number", span=numside.span)
        return DURATION
    if op == "/" and lt.kind == "duration" and rt.kind == "num":
        if not rt.unit.dimensionless:
            raise TypeCheckError("duration scaling needs a dimensionless "
                                 "number", span=node.rhs.span)
        return DURATION
    raise _mismatch(f"{lt.render()} {op} {rt.render()} is not allowed",
                    node.lhs, node.rhs)


def _integer_literal(node: Expr) -> int | None:
    if isinstance(node, Lit) and isinstance(node.value, NumInterval) \
            and node.value.is_point and float(node.value.lo).is_integer():
        return int(node.value.lo)
    if isinstance(node, Unary) and node.op == "-":
        inner = _integer_literal(node.operand)
        return None if inner is None else -inner
    return None


def _infer_call(node: Call, env: Mapping) -> ExprType:
    name = node.name
    args = [(a, _check(a, env)) for a in node.args]

    def need(i, kind, what):
        a, t = args[i]
        if t.kind != kind:
            raise TypeCheckError(f"{name}: {what} must be {kind}, "
                                 f"got {t.render()}", span=a.span)
        return t

    def arity(n):
        if len(args) != n:
            raise TypeCheckError(f"{name}() takes {n} argument(s), "
                                 f"got {len(args)}", span=node.span)

    if name in ("sin", "cos", "exp", "ln", "log"):
        arity(1)
        t = need(0, "num", "the argument")
        if not t.unit.dimensionless:
            raise TypeCheckError(f"{name} needs a dimensionless number",
                                 span=node.args[0].span)
        return num_type()
    if name == "sqrt":
        arity(1)
        t = need(0, "num", "the argument")
        return num_type(t.unit.root(2))
    if name == "num":
        arity(1)
        need(0, "bool", "the argument")
        return num_type()
    if name in ("months", "years"):
        arity(1)
        t = need(0, "num", "the argument")
        if not t.unit.dimensionless:
            raise TypeCheckError(f"{name} needs a dimensionless number",
                                 span=node.args[0].span)
        return DURATION
    if name in ("min", "max", "index_of_max"):
        if not args:
            raise TypeCheckError(f"{name}() needs at least one argument",
                                 span=node.span)
        first = args[0][1]
        if name == "index_of_max" and first.kind != "num":
            raise TypeCheckError(f"{name} needs numbers", span=node.args[0].span)
        if first.kind == "bool":
            raise TypeCheckError(f"{name} is not defined on booleans",
                                 span=node.args[0].span)
        for a, t in args[1:]:
            if not _same(first, t):
                raise _mismatch(f"{name}: mixed types {first.render()} vs "
                                f"{t.render()}", node.args[0], a)
        return num_type() if name == "index_of_max" else first
    if name == "linear":
        if len(args) < 5 or len(args) % 2 == 0:
            raise TypeCheckError(
                "linear(x, x0, y0, ..., xn, yn) needs x plus at least two "
                "knots", span=node.span)
        xt = args[0][1]
        if xt.kind == "bool":
            raise TypeCheckError("linear: x cannot be boolean",
                                 span=node.args[0].span)
        ytype = None
        for (a, t), is_x in zip(args[1:], [True, False] * (len(args) // 2)):
            if is_x:
                if not _same(t, xt):
                    raise _mismatch("linear: knot positions must match x",
                                    node.args[0], a)
            else:
                if t.kind != "num":
                    raise TypeCheckError("linear: knot values must be numbers",
                                         span=a.span)
                if ytype is None:
                    ytype = t
                elif not _same(ytype, t):
                    raise _mismatch("linear: knot values must share a unit",
                                    node.args[2], a)
        return ytype
    raise TypeCheckError(f"unknown function {name!r}", span=node.span)
