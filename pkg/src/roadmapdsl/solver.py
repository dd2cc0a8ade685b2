"""Fix-point solving of the constraint system at a fixed time T.

The solver substitutes the global time, symbolically simplifies every
constraint, and then runs narrowing rounds: each round evaluates every
right-hand side under the current per-reference bounds and intersects the
result into the left-hand reference.  Bounds start maximal and only ever
narrow, so stopping early (after ``max_rounds``, default 50) still leaves a
safe super-set of every satisfying assignment; the result is a conservative
over-approximation.

Symbolic rule families (applied in a deterministic order):

* constant folding        ``if max(2, 3) >= 2.5 then 1 else 2  ->  1``
* neutral element removal ``y & true                           ->  y``
* merging                 ``y + y                              ->  2 * y``
* reordering              commutative chains regrouped, constants folded,
                          and linear self-references rebalanced
                          (``x = -x + 3  ->  x = 1.5``)
* raising/lowering        ``2 * (if x then 3 else 4) -> if x then 6 else 8``
* special case detection  ``linear(x, x1, 0, x2, 1) >= 0       ->  true``
* propagation             inferred bounds substituted during evaluation;
                          the symbolic constraint is kept for later rounds

Every narrowing event records the constraint and the references it read;
traces follow these annotations transitively, like a program slice over the
constraint system.  A solve run is single threaded and deterministic;
distinct runs share only immutable inputs and may execute in parallel.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import EvalTypeError, RoadmapError
from .expr import (
    Binary,
    Call,
    Cast,
    Cond,
    Expr,
    IntervalLit,
    Lit,
    RefExpr,
    TimeSym,
    Unary,
    render,
    tree_size,
)
from .lowering import Constraint, ConstraintSystem, Reference
from .typecheck import ExprType, num_type
from .units import DIMENSIONLESS
from .values import (
    DateValue,
    DurationValue,
    FALSE,
    INF,
    MAYBE,
    NumInterval,
    TRUE,
    Ternary,
    Value,
    apply_function,
    arith,
    compare,
    hull,
    intersect,
    is_tainted,
    kleene_and,
    kleene_not,
    kleene_or,
    negate,
    render_value,
)

MAX_TREE_SIZE = 512  # rewrites growing past this are discarded
_COMPARISONS = ("<", "<=", ">", ">=", "=", "!=")


def full_value(t: ExprType) -> Value:
    if t.kind == "bool":
        return MAYBE
    if t.kind == "date":
        return DateValue.full()
    if t.kind == "duration":
        return DurationValue.full()
    return NumInterval.full(t.unit)


# ---------------------------------------------------------------------------
# time substitution
# ---------------------------------------------------------------------------


def substitute_time(node: Expr, t: float) -> Expr:
    """Replace the global T with a definite date."""
    if isinstance(node, TimeSym):
        return Lit(value=DateValue.point(t), span=node.span)
    if isinstance(node, Lit):
        return node
    rep = dataclasses.replace(node)
    if isinstance(node, IntervalLit):
        rep.lo, rep.hi = substitute_time(node.lo, t), substitute_time(node.hi, t)
    elif isinstance(node, Unary):
        rep.operand = substitute_time(node.operand, t)
    elif isinstance(node, Binary):
        rep.lhs, rep.rhs = substitute_time(node.lhs, t), substitute_time(node.rhs, t)
    elif isinstance(node, Cond):
        rep.cond = substitute_time(node.cond, t)
        rep.then = substitute_time(node.then, t)
        rep.els = substitute_time(node.els, t)
    elif isinstance(node, Call):
        rep.args = tuple(substitute_time(a, t) for a in node.args)
    elif isinstance(node, Cast):
        rep.operand = substitute_time(node.operand, t)
    elif isinstance(node, RefExpr):
        rep.time = substitute_time(node.time, t)
    return rep


def collect_refs(node: Expr, out: set[Reference] | None = None) -> set[Reference]:
    if out is None:
        out = set()
    if isinstance(node, RefExpr):
        out.add(node.ref)
        collect_refs(node.time, out)
        return out
    from .expr import children
    for c in children(node):
        collect_refs(c, out)
    return out


# ---------------------------------------------------------------------------
# symbolic simplification
# ---------------------------------------------------------------------------


def _lit(v: Value, span=(0, 0)) -> Lit:
    return Lit(value=v, span=span)


def _is_point(node: Expr, x: float) -> bool:
    return (isinstance(node, Lit) and isinstance(node.value, NumInterval)
            and node.value.is_point and node.value.lo == x)


def _fold_node(node: Expr, ref_types) -> Expr:
    """One local rewrite step; returns the node unchanged when no rule fires."""
    # ---- constant folding -------------------------------------------------
    if isinstance(node, Unary) and isinstance(node.operand, Lit):
        try:
            v = kleene_not(node.operand.value) if node.op == "!" \
                else negate(node.operand.value)
        except EvalTypeError:
            return node
        return _lit(v, node.span)
    if isinstance(node, Binary) and isinstance(node.lhs, Lit) \
            and isinstance(node.rhs, Lit):
        a, b = node.lhs.value, node.rhs.value
        try:
            if node.op in _COMPARISONS:
                return _lit(compare(node.op, a, b), node.span)
            if node.op == "&":
                return _lit(kleene_and(a, b), node.span)
            if node.op == "|":
                return _lit(kleene_or(a, b), node.span)
            return _lit(arith(node.op, a, b), node.span)
        except EvalTypeError:
            return node
    if isinstance(node, Call) and all(isinstance(a, Lit) for a in node.args):
        try:
            return _lit(apply_function(node.name, [a.value for a in node.args]),
                        node.span)
        except EvalTypeError:
            return node
    if isinstance(node, IntervalLit) and isinstance(node.lo, Lit) \
            and isinstance(node.hi, Lit):
        try:
            v = hull(node.lo.value, node.hi.value)
        except EvalTypeError:
            return node
        return _lit(v, node.span)
    if isinstance(node, Cast) and isinstance(node.operand, Lit):
        v = node.operand.value
        if isinstance(v, NumInterval) and v.unit.same_dims(node.unit):
            return node.operand
        return node
    # ---- neutral element removal ------------------------------------------
    if isinstance(node, Binary):
        lhs, rhs, op = node.lhs, node.rhs, node.op
        if op == "&":
            for side, other in ((lhs, rhs), (rhs, lhs)):
                if isinstance(side, Lit) and side.value is TRUE:
                    return other
                if isinstance(side, Lit) and side.value is FALSE:
                    return _lit(FALSE, node.span)
        if op == "|":
            for side, other in ((lhs, rhs), (rhs, lhs)):
                if isinstance(side, Lit) and side.value is FALSE:
                    return other
                if isinstance(side, Lit) and side.value is TRUE:
                    return _lit(TRUE, node.span)
        if op == "+":
            for side, other in ((lhs, rhs), (rhs, lhs)):
                if _is_point(side, 0.0):
                    return other
        if op == "-" and _is_point(rhs, 0.0):
            return lhs
        if op == "*":
            for side, other in ((lhs, rhs), (rhs, lhs)):
                if _is_point(side, 1.0):
                    return other
        if op in ("/", "^") and _is_point(rhs, 1.0):
            return lhs
    if isinstance(node, Unary) and node.op == "-" \
            and isinstance(node.operand, Unary) and node.operand.op == "-":
        return node.operand.operand
    if isinstance(node, Unary) and node.op == "!" \
            and isinstance(node.operand, Unary) and node.operand.op == "!":
        return node.operand.operand
    # ---- merging ------------------------------------------------------------
    if isinstance(node, Cond):
        if isinstance(node.cond, Lit):
            if node.cond.value is TRUE:
                return node.then
            if node.cond.value is FALSE:
                return node.els
        if node.then == node.els:
            return node.then
    if isinstance(node, Binary) and node.op == "&":
        merged = _merge_condition_context(node)
        if merged is not None:
            return merged
    if isinstance(node, Binary) and node.op in ("+", "*"):
        regrouped = _regroup_chain(node)
        if regrouped is not None:
            return regrouped
    # ---- raising / lowering ---------------------------------------------------
    if isinstance(node, Binary) and node.op not in ("&", "|"):
        for cond_side, lit_side, cond_left in ((node.lhs, node.rhs, True),
                                               (node.rhs, node.lhs, False)):
            if isinstance(cond_side, Cond) and isinstance(lit_side, Lit):
                def wrap(branch):
                    if cond_left:
                        return Binary(op=node.op, lhs=branch, rhs=lit_side,
                                      span=node.span)
                    return Binary(op=node.op, lhs=lit_side, rhs=branch,
                                  span=node.span)
                return Cond(cond=cond_side.cond, then=wrap(cond_side.then),
                            els=wrap(cond_side.els), span=node.span)
    # ---- special case detection -------------------------------------------------
    if isinstance(node, Binary) and node.op in _COMPARISONS \
            and not (isinstance(node.lhs, Lit) and isinstance(node.rhs, Lit)):
        out = _compare_static_ranges(node, ref_types)
        if out is not None:
            return out
    return node


def _merge_condition_context(node: Binary) -> Optional[Expr]:
    """Inside a conjunction, a conditional whose condition is itself one of
    the conjuncts collapses to the matching branch."""
    conjuncts: list[Expr] = []
    _flatten_op(node, "&", conjuncts)
    facts = [c for c in conjuncts if not isinstance(c, Lit)]
    changed = False

    def rewrite(e: Expr, depth=0) -> Expr:
        nonlocal changed
        if depth > 6:
            return e
        if isinstance(e, Cond):
            for fact in facts:
                if e.cond == fact:
                    changed = True
                    return rewrite(e.then, depth + 1)
                if isinstance(e.cond, Unary) and e.cond.op == "!" \
                        and e.cond.operand == fact:
                    changed = True
                    return rewrite(e.els, depth + 1)
            rep = dataclasses.replace(e)
            rep.then = rewrite(e.then, depth + 1)
            rep.els = rewrite(e.els, depth + 1)
            return rep
        if isinstance(e, Binary):
            rep = dataclasses.replace(e)
            rep.lhs = rewrite(e.lhs, depth + 1)
            rep.rhs = rewrite(e.rhs, depth + 1)
            return rep
        return e

    new_conjuncts = []
    for c in conjuncts:
        others = [f for f in facts if f is not c]
        saved = facts[:]
        facts[:] = others
        new_conjuncts.append(rewrite(c))
        facts[:] = saved
    if not changed:
        return None
    out = new_conjuncts[0]
    for c in new_conjuncts[1:]:
        out = Binary(op="&", lhs=out, rhs=c, span=node.span)
    return out


def _flatten_op(node: Expr, op: str, out: list[Expr]) -> None:
    if isinstance(node, Binary) and node.op == op:
        _flatten_op(node.lhs, op, out)
        _flatten_op(node.rhs, op, out)
    else:
        out.append(node)


def _regroup_chain(node: Binary) -> Optional[Expr]:
    """Reordering and merging for + and * chains: fold the constants
    together, group identical terms (y + y -> 2 * y), keep a canonical
    term order."""
    op = node.op
    terms: list[Expr] = []
    _flatten_op(node, op, terms)
    if len(terms) < 2:
        return None
    lits = [t for t in terms if isinstance(t, Lit)]
    rest = [t for t in terms if not isinstance(t, Lit)]
    folded: Optional[Lit] = None
    if lits:
        acc = lits[0].value
        try:
            for l in lits[1:]:
                acc = arith(op, acc, l.value)
        except EvalTypeError:
            return None
        folded = _lit(acc, node.span)
    groups: list[tuple[Expr, int]] = []
    for t in rest:
        for i, (seen, n) in enumerate(groups):
            if seen == t:
                groups[i] = (seen, n + 1)
                break
        else:
            groups.append((t, 1))
    changed = len(lits) > 1 or any(n > 1 for _, n in groups)
    if not changed:
        return None
    parts: list[Expr] = []
    for term, n in groups:
        if n == 1:
            parts.append(term)
        elif op == "+":
            parts.append(Binary(op="*", lhs=_lit(NumInterval.point(float(n))),
                                rhs=term, span=node.span))
        else:
            parts.append(Binary(op="^", lhs=term,
                                rhs=_lit(NumInterval.point(float(n))),
                                span=node.span))
    if folded is not None:
        neutral = 0.0 if op == "+" else 1.0
        if not (parts and _is_point(folded, neutral)):
            parts.append(folded)
    if not parts:
        return folded
    out = parts[0]
    for p in parts[1:]:
        out = Binary(op=op, lhs=out, rhs=p, span=node.span)
    return out if out != node else None


def _compare_static_ranges(node: Binary, ref_types) -> Optional[Expr]:
    """Decide a comparison from the operands' reference-free value ranges
    (e.g. a clamped interpolation between 0 and 1 is always >= 0)."""
    lo = _static_eval(node.lhs, ref_types)
    hi = _static_eval(node.rhs, ref_types)
    if lo is None or hi is None:
        return None
    try:
        out = compare(node.op, lo, hi)
    except EvalTypeError:
        return None
    if out in (TRUE, FALSE):
        return _lit(out, node.span)
    return None


def _static_eval(node: Expr, ref_types) -> Optional[Value]:
    """Evaluate with every reference at its maximal bounds; None if unknown."""
    if ref_types is None:
        ref_types = {}
    try:
        return eval_expr(node, _EvalEnv(bounds=None, t=None,
                                        ref_types=ref_types))
    except (EvalTypeError, KeyError):
        return None


def simplify(node: Expr, ref_types=None) -> Expr:
    """Apply the rule families bottom-up until a fix point (or size guard)."""
    for _ in range(10):
        new = _simplify_walk(node, ref_types)
        if new == node:
            return node
        if tree_size(new) > MAX_TREE_SIZE:
            return node
        node = new
    return node


def _simplify_walk(node: Expr, ref_types) -> Expr:
    kids = _rebuild_with(node, lambda c: _simplify_walk(c, ref_types))
    return _fold_node(kids, ref_types)


def _rebuild_with(node: Expr, fn) -> Expr:
    if isinstance(node, (Lit, TimeSym)):
        return node
    rep = dataclasses.replace(node)
    if isinstance(node, IntervalLit):
        rep.lo, rep.hi = fn(node.lo), fn(node.hi)
    elif isinstance(node, Unary):
        rep.operand = fn(node.operand)
    elif isinstance(node, Binary):
        rep.lhs, rep.rhs = fn(node.lhs), fn(node.rhs)
    elif isinstance(node, Cond):
        rep.cond, rep.then, rep.els = fn(node.cond), fn(node.then), fn(node.els)
    elif isinstance(node, Call):
        rep.args = tuple(fn(a) for a in node.args)
    elif isinstance(node, Cast):
        rep.operand = fn(node.operand)
    elif isinstance(node, RefExpr):
        rep.time = fn(node.time)
    else:
        return node
    return rep


# -- linear rebalancing (reordering across the equality) -------------------------


def _collect_linear(node: Expr, ref: Reference):
    """Decompose ``node`` as coeff * ref + rest; None when not linear.

    Only references at the implicit current time count as the variable;
    time-shifted occurrences make the decomposition fail (safe)."""
    if isinstance(node, RefExpr) and node.ref == ref:
        if isinstance(node.time, TimeSym):
            return 1.0, []
        return None
    if isinstance(node, Lit):
        return 0.0, [node]
    if isinstance(node, Unary) and node.op == "-":
        inner = _collect_linear(node.operand, ref)
        if inner is None:
            return None
        coeff, rest = inner
        return -coeff, [Unary(op="-", operand=r) for r in rest]
    if isinstance(node, Binary) and node.op in ("+", "-"):
        left = _collect_linear(node.lhs, ref)
        right = _collect_linear(node.rhs, ref)
        if left is None or right is None:
            return None
        lc, lr = left
        rc, rr = right
        if node.op == "+":
            return lc + rc, lr + rr
        return lc - rc, lr + [Unary(op="-", operand=r) for r in rr]
    if isinstance(node, Binary) and node.op == "*":
        for lit_side, sub in ((node.lhs, node.rhs), (node.rhs, node.lhs)):
            if isinstance(lit_side, Lit) \
                    and isinstance(lit_side.value, NumInterval) \
                    and lit_side.value.is_point \
                    and lit_side.value.unit.dimensionless:
                inner = _collect_linear(sub, ref)
                if inner is None:
                    return None
                coeff, rest = inner
                k = lit_side.value.lo
                return coeff * k, [Binary(op="*", lhs=lit_side, rhs=r)
                                   for r in rest]
    return None


def rebalance(ref: Reference, rhs: Expr, ref_types) -> Expr:
    """Solve a linear self-reference: ``x = -x + 3`` becomes ``x = 1.5``."""
    if ref not in collect_refs(rhs):
        return rhs
    t = ref_types.get(ref) if ref_types else None
    if t is None or t.kind != "num":
        return rhs
    decomp = _collect_linear(rhs, ref)
    if decomp is None:
        return rhs
    coeff, rest_parts = decomp
    if coeff == 0.0:
        return rhs
    rest: Expr = _lit(NumInterval.point(0.0, t.unit))
    for part in rest_parts:
        rest = Binary(op="+", lhs=rest, rhs=part)
    rest = simplify(rest, ref_types)
    if not isinstance(rest, Lit):
        return rhs
    if coeff == 1.0:
        v = rest.value
        if isinstance(v, NumInterval) and not v.tainted \
                and (v.lo > 0 or v.hi < 0):
            # x = x + c with c surely nonzero: contradiction
            return _lit(NumInterval.empty(t.unit))
        return rhs
    scaled = arith("/", rest.value, NumInterval.point(1.0 - coeff))
    return _lit(scaled)


# ---------------------------------------------------------------------------
# evaluation under bounds (the propagation rule)
# ---------------------------------------------------------------------------


@dataclass
class _EvalEnv:
    bounds: Optional[dict]  # Reference -> Value; None = everything maximal
    t: Optional[float]
    ref_types: dict
    overlay: dict = field(default_factory=dict)
    subsolve: Optional[Callable[[float], Optional[dict]]] = None

    def value_of(self, ref: Reference) -> Value:
        if self.bounds is None:
            base = full_value(self.ref_types[ref])
        else:
            base = self.bounds.get(ref)
            if base is None:
                base = full_value(self.ref_types[ref])
        over = self.overlay.get(ref)
        if over is not None:
            base = intersect(base, over)
        return base

    def narrowed(self, ref: Reference, value: Value) -> "_EvalEnv":
        overlay = dict(self.overlay)
        if ref in overlay:
            value = intersect(overlay[ref], value)
        overlay[ref] = value
        return dataclasses.replace(self, overlay=overlay)


def eval_expr(node: Expr, env: _EvalEnv) -> Value:
    """Interval/ternary evaluation of a (time-substituted) expression."""
    if isinstance(node, Lit):
        return node.value
    if isinstance(node, TimeSym):
        if env.t is None:
            return DateValue.full()
        raise EvalTypeError("unsubstituted T during evaluation")
    if isinstance(node, RefExpr):
        return _eval_ref(node, env)
    if isinstance(node, IntervalLit):
        return hull(eval_expr(node.lo, env), eval_expr(node.hi, env))
    if isinstance(node, Unary):
        v = eval_expr(node.operand, env)
        return kleene_not(v) if node.op == "!" else negate(v)
    if isinstance(node, Binary):
        if node.op == "&":
            return kleene_and(eval_expr(node.lhs, env),
                              eval_expr(node.rhs, env))
        if node.op == "|":
            return kleene_or(eval_expr(node.lhs, env),
                             eval_expr(node.rhs, env))
        a = eval_expr(node.lhs, env)
        b = eval_expr(node.rhs, env)
        if node.op in _COMPARISONS:
            return compare(node.op, a, b)
        return arith(node.op, a, b)
    if isinstance(node, Cond):
        return _eval_cond(node, env)
    if isinstance(node, Call):
        return apply_function(node.name,
                              [eval_expr(a, env) for a in node.args])
    if isinstance(node, Cast):
        v = eval_expr(node.operand, env)
        if not isinstance(v, NumInterval) or not v.unit.same_dims(node.unit):
            raise EvalTypeError(f"cast to {node.symbol} applied to an "
                                f"incompatible value")
        return v
    raise EvalTypeError(f"cannot evaluate {node!r}")


def _eval_ref(node: RefExpr, env: _EvalEnv) -> Value:
    if env.t is None:
        # reference-free range query: the time cannot make bounds tighter
        return env.value_of(node.ref)
    tval = eval_expr(node.time, env)
    if not isinstance(tval, DateValue):
        raise EvalTypeError("time argument must evaluate to a date")
    if tval.is_point and tval.lo == env.t:
        return env.value_of(node.ref)
    if tval.is_point and env.subsolve is not None:
        shifted = env.subsolve(tval.lo)
        if shifted is not None and node.ref in shifted:
            return shifted[node.ref]
    # uncertain or unavailable time: fall back to the maximal bounds
    return full_value(env.ref_types[node.ref])


def _eval_cond(node: Cond, env: _EvalEnv) -> Value:
    c = eval_expr(node.cond, env)
    if c is TRUE:
        return eval_expr(node.then, env)
    if c is FALSE:
        return eval_expr(node.els, env)
    then_env, else_env = _branch_envs(node.cond, env)
    tainted_out = c is Ternary.TAINTED
    tv = ev = None
    if then_env is not None:
        tv = eval_expr(node.then, then_env)
    if else_env is not None:
        ev = eval_expr(node.els, else_env)
    if tv is None and ev is None:
        tv = eval_expr(node.then, env)
        ev = eval_expr(node.els, env)
    if tv is None:
        out = ev
    elif ev is None:
        out = tv
    else:
        out = hull(tv, ev)
    if tainted_out and not is_tainted(out):
        out = _taint_value(out)
    return out


def _taint_value(v: Value) -> Value:
    if isinstance(v, Ternary):
        return Ternary.TAINTED
    return dataclasses.replace(v, tainted=True)


def _branch_envs(cond: Expr, env: _EvalEnv):
    """Refine a reference's bounds inside the branches of an uncertain
    conditional; an infeasible branch comes back as None.

    ``if A.?replacement(T) = k then .. else ..`` narrows the replacement to
    k in the then branch and excludes k (for integer bounds) in the else
    branch, so nested selection chains do not leak their fallback."""
    ref, op, lit = _ref_cmp_shape(cond, env)
    if ref is None:
        return env, env
    current = env.value_of(ref)
    then_v = _narrow_by(current, op, lit, assume=True)
    else_v = _narrow_by(current, op, lit, assume=False)
    then_env = env.narrowed(ref, then_v) if not is_tainted(then_v) else None
    else_env = env.narrowed(ref, else_v) if not is_tainted(else_v) else None
    return then_env, else_env


def _ref_cmp_shape(cond: Expr, env: _EvalEnv):
    if not (isinstance(cond, Binary) and cond.op in ("<", "<=", ">", ">=", "=")):
        return None, None, None
    flip = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "="}
    for refside, litside, op in ((cond.lhs, cond.rhs, cond.op),
                                 (cond.rhs, cond.lhs, flip[cond.op])):
        if isinstance(refside, RefExpr) and isinstance(litside, Lit):
            tval = None
            try:
                tval = eval_expr(refside.time, env)
            except EvalTypeError:
                return None, None, None
            if env.t is not None and not (isinstance(tval, DateValue)
                                          and tval.is_point
                                          and tval.lo == env.t):
                return None, None, None
            return refside.ref, op, litside.value
    return None, None, None


def _narrow_by(v: Value, op: str, lit: Value, assume: bool) -> Value:
    """Bounds of ``v`` under the assumption that ``v op lit`` is true/false."""
    if isinstance(v, Ternary) or isinstance(lit, Ternary):
        return v
    lo, hi = lit.lo, lit.hi
    if assume:
        window = {"=": (lo, hi), "<": (-INF, hi), "<=": (-INF, hi),
                  ">": (lo, INF), ">=": (lo, INF)}[op]
    else:
        if op == "=":
            # only integer point exclusions are representable
            if lo == hi and not v.tainted and float(lo).is_integer() \
                    and float(v.lo).is_integer() and float(v.hi).is_integer():
                if v.lo == lo == v.hi:
                    return _taint_value(v)
                if v.lo == lo:
                    return _window(v, lo + 1, INF)
                if v.hi == lo:
                    return _window(v, -INF, lo - 1)
            return v
        window = {"<": (lo, INF), "<=": (lo, INF),
                  ">": (-INF, hi), ">=": (-INF, hi)}[op]
    return _window(v, *window)


def _window(v: Value, lo: float, hi: float) -> Value:
    if isinstance(v, NumInterval):
        return intersect(v, NumInterval(lo, hi, v.unit))
    if isinstance(v, DateValue):
        return intersect(v, DateValue(lo, hi))
    if isinstance(v, DurationValue):
        return intersect(v, DurationValue(lo, hi))
    return v


# ---------------------------------------------------------------------------
# relational narrowing
# ---------------------------------------------------------------------------


def relational_narrowing(bound: Value, op: str, rhs_bound: Value) -> Value:
    """Narrow ``bound`` given that ``bound op rhs_bound`` holds: intersect
    with the implied half line, e.g. ``[a..b] >= c -> [a..b] n [c..inf)``.
    A disjoint intersection taints (contradiction)."""
    if isinstance(bound, Ternary) or isinstance(rhs_bound, Ternary):
        return bound
    c, d = rhs_bound.lo, rhs_bound.hi
    window = {">=": (d, INF), ">": (d, INF),
              "<=": (-INF, c), "<": (-INF, c),
              "=": (c, d), "!=": (-INF, INF)}[op]
    return _window(bound, *window)


# ---------------------------------------------------------------------------
# the solver
# ---------------------------------------------------------------------------


@dataclass
class SolverState:
    """Working state of one solve run at a fixed time."""

    constraints: list[Constraint]
    bounds: dict[Reference, Value]
    ref_types: dict[Reference, ExprType]
    deps: dict[Reference, set] = field(default_factory=dict)
    rounds: int = 0
    max_rounds: int = 50
    rhs_refs: list[frozenset] = field(default_factory=list)
    subsolve: Optional[Callable] = None
    round_log: Optional[list] = None
    display: Optional[Callable[[Reference], str]] = None
    t: float = 0.0


@dataclass
class SolveResult:
    """Final bounds and traces; non-converged bounds are still safe
    super-sets of every satisfying assignment."""

    bounds: dict[Reference, Value]
    traces: dict[Reference, frozenset[str]]
    converged: bool
    rounds: int
    round_log: Optional[list[str]] = None

    def trace(self, ref: Reference) -> frozenset[str]:
        if ref not in self.bounds:
            raise KeyError(f"unknown reference {ref}")
        return self.traces.get(ref, frozenset())


def trace(result: SolveResult, ref: Reference) -> frozenset[str]:
    """Model-element ids that contributed to a reference's bounds."""
    return result.trace(ref)


def _narrow(state: SolverState, ref: Reference, value: Value,
            source_idx: int, used_refs) -> bool:
    old = state.bounds[ref]
    try:
        new = intersect(old, value)
    except EvalTypeError:
        return False
    if new == old:
        return False
    state.bounds[ref] = new
    dep = state.deps.setdefault(ref, set())
    dep.add(("c", source_idx))
    for r in used_refs:
        if r != ref:
            dep.add(("r", r))
    if state.round_log is not None:
        name = state.display(ref) if state.display else str(ref)
        state.round_log.append(
            f"round {state.rounds + 1}: {name}(T) = {render_value(new)}"
            f"   (narrowed from {render_value(old)})")
    return True


def transform_round(state: SolverState) -> bool:
    """One solver round over all constraints; True when anything narrowed.

    Each constraint is re-simplified (a cached no-op after the first round),
    evaluated under the current bounds, and intersected into its reference;
    equalities against a bare reference and asserted comparisons also narrow
    their operands."""
    changed = False
    env = _EvalEnv(bounds=state.bounds, t=state.t, ref_types=state.ref_types,
                   subsolve=state.subsolve)
    for idx, c in enumerate(state.constraints):
        new_rhs = simplify(c.rhs, state.ref_types)
        if new_rhs != c.rhs:
            c.rhs = new_rhs
            state.rhs_refs[idx] = frozenset(collect_refs(new_rhs))
            changed = True
        used = state.rhs_refs[idx]
        try:
            value = eval_expr(c.rhs, env)
        except EvalTypeError:
            continue
        if _narrow(state, c.lhs, value, idx, used):
            changed = True
        lhs_bound = state.bounds[c.lhs]
        # y = x: the equality also narrows x
        if isinstance(c.rhs, RefExpr) and isinstance(c.rhs.time, Lit) \
                and isinstance(c.rhs.time.value, DateValue) \
                and c.rhs.time.value.is_point and c.rhs.time.value.lo == state.t:
            if _narrow(state, c.rhs.ref, lhs_bound, idx, {c.lhs}):
                changed = True
        # ref = (X op Y): a definite truth value narrows the operands
        if isinstance(c.rhs, Binary) and c.rhs.op in _COMPARISONS \
                and lhs_bound in (TRUE, FALSE):
            if _relational_pass(state, c, idx, env, lhs_bound is TRUE):
                changed = True
    state.rounds += 1
    return changed


_NEGATED = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "=": "!=", "!=": "="}


def _relational_pass(state: SolverState, c: Constraint, idx: int,
                     env: _EvalEnv, truth: bool) -> bool:
    node = c.rhs
    op = node.op if truth else _NEGATED[node.op]
    changed = False
    flip = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "=", "!=": "!="}
    for refside, otherside, o in ((node.lhs, node.rhs, op),
                                  (node.rhs, node.lhs, flip[op])):
        if not isinstance(refside, RefExpr):
            continue
        try:
            tval = eval_expr(refside.time, env)
            if not (isinstance(tval, DateValue) and tval.is_point
                    and tval.lo == state.t):
                continue
            other = eval_expr(otherside, env)
            narrowed = relational_narrowing(state.bounds[refside.ref], o, other)
        except EvalTypeError:
            continue
        used = collect_refs(otherside) | {c.lhs}
        if _narrow(state, refside.ref, narrowed, idx, used):
            changed = True
    return changed


class Solver:
    """Solves one constraint system at arbitrary times, memoizing by month
    (time-shifted references trigger sub-solves at their target month)."""

    def __init__(self, system: ConstraintSystem, max_rounds: int = 50,
                 keep_round_log: bool = False):
        self.system = system
        self.max_rounds = max_rounds
        self.keep_round_log = keep_round_log
        self._memo: dict[float, SolveResult] = {}
        self._busy: set[float] = set()

    def at(self, t) -> SolveResult:
        t = _months_of(t)
        if t in self._memo:
            return self._memo[t]
        result = self._solve_at(t)
        self._memo[t] = result
        return result

    def _subsolve(self, t: float) -> Optional[dict]:
        if t in self._busy or len(self._busy) > 64:
            return None  # self-referential in time: maximal bounds are safe
        return self.at(t).bounds

    def _solve_at(self, t: float) -> SolveResult:
        self._busy.add(t)
        try:
            system = self.system
            constraints = []
            for c in system.constraints:
                rhs = rebalance(c.lhs, c.rhs, system.ref_types)
                rhs = substitute_time(rhs, t)
                rhs = simplify(rhs, system.ref_types)
                constraints.append(Constraint(lhs=c.lhs, rhs=rhs,
                                              origin=c.origin))
            refs = set(system.ref_types)
            for c in constraints:
                refs.add(c.lhs)
                refs.update(collect_refs(c.rhs))
            bounds = {}
            for ref in sorted(refs, key=lambda r: (r.block, str(r.kind))):
                bounds[ref] = full_value(system.ref_types.get(ref, num_type()))
            state = SolverState(
                constraints=constraints, bounds=bounds,
                ref_types=system.ref_types,
                max_rounds=self.max_rounds,
                rhs_refs=[frozenset(collect_refs(c.rhs)) for c in constraints],
                subsolve=self._subsolve,
                round_log=[] if self.keep_round_log else None,
                display=system.display, t=t)
            converged = False
            while state.rounds < state.max_rounds:
                if not transform_round(state):
                    converged = True
                    break
            traces = _close_traces(state, constraints)
            return SolveResult(bounds=dict(state.bounds), traces=traces,
                               converged=converged, rounds=state.rounds,
                               round_log=state.round_log)
        finally:
            self._busy.discard(t)


def _close_traces(state: SolverState,
                  constraints: list[Constraint]) -> dict:
    """Transitive closure of the narrowing-event dependency graph."""
    out: dict[Reference, set[str]] = {ref: set() for ref in state.bounds}
    edges: dict[Reference, set[Reference]] = {}
    for ref, deps in state.deps.items():
        for kind, item in deps:
            if kind == "c":
                out[ref] |= constraints[item].origin
            else:
                edges.setdefault(ref, set()).add(item)
    changed = True
    while changed:
        changed = False
        for ref, sources in edges.items():
            target = out[ref]
            before = len(target)
            for src in sources:
                target |= out.get(src, set())
            if len(target) != before:
                changed = True
    return {ref: frozenset(ids) for ref, ids in out.items()}


def _months_of(t) -> float:
    if isinstance(t, DateValue):
        if not t.is_point:
            raise RoadmapError("solve needs a definite date")
        return t.lo
    return float(t)


def solve(system: ConstraintSystem, t, max_rounds: int = 50,
          keep_round_log: bool = False) -> SolveResult:
    """Solve the system at a definite month; see ``Solver`` for sweeps."""
    return Solver(system, max_rounds=max_rounds,
                  keep_round_log=keep_round_log).at(t)


def make_system(constraints: list[Constraint], ref_types=None,
                model=None) -> ConstraintSystem:
    """A ConstraintSystem from bare constraints (used by tests and tools);
    unknown reference types default to dimensionless numbers."""
    types = dict(ref_types or {})
    refs = set()
    for c in constraints:
        refs.add(c.lhs)
        refs.update(collect_refs(c.rhs))
    for r in refs:
        types.setdefault(r, num_type())
    short: dict[str, str] = {}
    from .model import Model
    return ConstraintSystem(model=model or Model(name="adhoc"),
                            constraints=constraints, ref_types=types,
                            short=short)
