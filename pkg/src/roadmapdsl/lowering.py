"""Lowering a model to a flat constraint system.

Three phases run in order:

1. **Inheritance expansion**: every implementation receives copies of its
   interfaces' properties and requirements (recursion handles transitive
   relations; locals override; the first listed interface wins diamonds).
2. **Identifier resolution**: names bind lexically, first in the containing
   block, then in its ancestors, then at the top level.  Aggregations are
   replaced by their expanded form over the direct children that can resolve
   the aggregated expression; KPI expressions resolve separately in the
   scope of each solution alternative.
3. **Constraint generation**: one equality per model element plus, per
   block, an availability conjunction and a replacement selection via
   ``index_of_max``.  The internal reference forms are ``A.P(T)``,
   ``A.?requirementN(T)``, ``A.?kpiN(B,T)``, ``A.?availability(T)``, and
   ``A.?replacement(T)``; the ``?`` prefix cannot clash with user names.

Every constraint carries the ids of the model elements it came from, which
seeds the solver's traces.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

from .errors import ResolveError, TypeCheckError
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
    parse_expr,
    render,
)
from .model import (
    Block,
    KPI,
    Model,
    Property,
    Requirement,
    allimpls,
    allprops,
    allreqs,
    expanded_members,
)
from .typecheck import BOOL, ExprType, num_type, typecheck
from .units import DIMENSIONLESS
from .values import (
    DateValue,
    DurationValue,
    INF,
    MAYBE,
    NumInterval,
    Ternary,
)


# ---------------------------------------------------------------------------
# references and constraints
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Reference:
    """A solver variable: one property, requirement, KPI instance,
    availability, or replacement selection of a block."""

    block: str  # full block id
    kind: tuple  # ("prop", name) | ("req", n) | ("kpi", n, impl_id)
    #            | ("avail",) | ("repl",)

    def describe(self, short: dict[str, str] | None = None) -> str:
        name = short.get(self.block, self.block) if short else self.block
        k = self.kind
        if k[0] == "prop":
            return f"{name}.{k[1]}"
        if k[0] == "req":
            return f"{name}.?requirement{k[1]}"
        if k[0] == "kpi":
            impl = short.get(k[2], k[2]) if short else k[2]
            return f"{name}.?kpi{k[1]}({impl})"
        if k[0] == "avail":
            return f"{name}.?availability"
        return f"{name}.?replacement"


@dataclass
class Constraint:
    lhs: Reference
    rhs: Expr
    origin: frozenset[str]  # model element ids, for tracing


@dataclass
class ConstraintSystem:
    model: Model  # the expanded model
    constraints: list[Constraint]
    ref_types: dict[Reference, ExprType]
    short: dict[str, str]  # block id -> display name

    def by_lhs(self) -> dict[Reference, Constraint]:
        return {c.lhs: c for c in self.constraints}

    def display(self, ref: Reference) -> str:
        return ref.describe(self.short)

    def reference(self, text: str) -> Reference:
        """Parse a display form like ``Fuse.MaxLoadCurrent`` or
        ``EFuse.?availability`` back into a Reference."""
        text = text.strip()
        if text.endswith("(T)"):
            text = text[:-3]
        head, _, last = text.rpartition(".")
        by_display = {}
        for b in self.model.all_blocks():
            by_display[b.id] = b
            by_display.setdefault(self.short[b.id], b)
        block = by_display.get(head)
        if block is None:
            raise KeyError(f"unknown block {head!r}")
        if last == "?availability":
            return Reference(block.id, ("avail",))
        if last == "?replacement":
            return Reference(block.id, ("repl",))
        if last.startswith("?requirement"):
            return Reference(block.id, ("req", int(last[len("?requirement"):])))
        ref = Reference(block.id, ("prop", last))
        if ref not in self.ref_types:
            raise KeyError(f"unknown reference {text!r}")
        return ref


def reference_path(ref: Reference) -> tuple[str, ...]:
    k = ref.kind
    tail = {"prop": lambda: k[1],
            "req": lambda: f"?requirement{k[1]}",
            "kpi": lambda: f"?kpi{k[1]}",
            "avail": lambda: "?availability",
            "repl": lambda: "?replacement"}[k[0]]()
    return tuple(ref.block.split(".")) + (tail,)


def render_reference(ref: Reference, time: Expr | None,
                     short: dict[str, str] | None = None) -> str:
    base = ref.describe(short)
    t = render(time) if time is not None else "T"
    if ref.kind[0] == "kpi":
        # ?kpiN(B,T): the implementation argument is already in `base`
        return base[:-1] + f",{t})"
    return f"{base}({t})"


# ---------------------------------------------------------------------------
# phase 1: inheritance expansion
# ---------------------------------------------------------------------------


def expand_inheritance(model: Model) -> Model:
    """A model in which every block lists its inherited members explicitly.

    Copies keep the element id of the declaration they came from, so traces
    point at elements that exist in the source model.
    """

    def rebuild(block: Block) -> Block:
        members = [dataclasses.replace(m) for m in expanded_members(model, block)]
        return Block(name=block.name, members=members,
                     children=[rebuild(c) for c in block.children],
                     impls=list(block.impls), span=block.span, id=block.id,
                     impl_targets=list(block.impl_targets))

    out = Model(name=model.name, blocks=[rebuild(b) for b in model.blocks],
                source=model.source)
    for b in out.all_blocks():
        out.by_id[b.id] = b
    out.parent.update(model.parent)
    return out


# ---------------------------------------------------------------------------
# phase 2: identifier resolution and aggregation expansion
# ---------------------------------------------------------------------------


def _lookup_in_block(block: Block, name: str):
    for p in block.props:
        if p.name == name:
            return p
    for c in block.children:
        if c.name == name:
            return c
    return None


def _resolve_path(model: Model, path: tuple[str, ...], scope: Block,
                  span, local_only: bool):
    """Bind a dotted path to a Property (with its owning block) or a Block."""
    chain = []
    cur: Optional[Block] = scope
    while cur is not None:
        chain.append(cur)
        cur = model.parent_of(cur)
    scopes = [chain[0]] if local_only else chain + [None]
    for anchor in scopes:
        if anchor is None:
            target = next((b for b in model.blocks if b.name == path[0]), None)
        else:
            target = _lookup_in_block(anchor, path[0])
        if target is None:
            continue
        owner = anchor if isinstance(target, Property) else None
        for seg in path[1:]:
            if isinstance(target, Property):
                raise ResolveError(
                    f"{'.'.join(path)}: {target.name} is a property and has "
                    f"no member {seg}", span=span)
            owner = target
            target = _lookup_in_block(target, seg)
            if target is None:
                raise ResolveError(
                    f"cannot resolve {seg!r} in block {owner.id}", span=span)
        if isinstance(target, Property):
            # single segment case: the owner is the anchor we found it in
            return (owner if owner is not None else anchor), target
        return target
    raise ResolveError(f"cannot resolve identifier "
                       f"{'.'.join(path)}", span=span)


_AGG_FOLD = {"SUM": "+", "PRODUCT": "*", "AND": "&", "OR": "|"}
_AGG_EMPTY = {
    "SUM": lambda: Lit(value=NumInterval.point(0.0)),
    "PRODUCT": lambda: Lit(value=NumInterval.point(1.0)),
    "AND": lambda: Lit(value=Ternary.TRUE),
    "OR": lambda: Lit(value=Ternary.FALSE),
}


def resolve_expr(model: Model, node: Expr, scope: Block,
                 local_only: bool = False) -> Expr:
    """Replace identifier paths with references and expand aggregations."""
    if isinstance(node, (Lit, TimeSym)):
        return node
    if isinstance(node, Ident):
        if any(seg.startswith("?") for seg in node.path):
            raise ResolveError("internal '?' references are not allowed in "
                               "model expressions", span=node.span)
        target = _resolve_path(model, node.path, scope, node.span, local_only)
        if len(node.args) != 1:
            raise ResolveError("a reference takes exactly one time argument",
                               span=node.span)
        time = resolve_expr(model, node.args[0], scope, local_only)
        if isinstance(target, Block):
            ref = Reference(target.id, ("avail",))
        else:
            owner, prop = target
            ref = Reference(owner.id, ("prop", prop.name))
        return RefExpr(ref=ref, time=time, span=node.span)
    if isinstance(node, Agg):
        return _expand_aggregation(model, node, scope)
    if isinstance(node, Unary):
        return Unary(op=node.op,
                     operand=resolve_expr(model, node.operand, scope, local_only),
                     span=node.span)
    if isinstance(node, Binary):
        return Binary(op=node.op,
                      lhs=resolve_expr(model, node.lhs, scope, local_only),
                      rhs=resolve_expr(model, node.rhs, scope, local_only),
                      span=node.span)
    if isinstance(node, Cond):
        return Cond(cond=resolve_expr(model, node.cond, scope, local_only),
                    then=resolve_expr(model, node.then, scope, local_only),
                    els=resolve_expr(model, node.els, scope, local_only),
                    span=node.span)
    if isinstance(node, IntervalLit):
        return IntervalLit(lo=resolve_expr(model, node.lo, scope, local_only),
                           hi=resolve_expr(model, node.hi, scope, local_only),
                           span=node.span)
    if isinstance(node, Call):
        return Call(name=node.name,
                    args=tuple(resolve_expr(model, a, scope, local_only)
                               for a in node.args),
                    span=node.span)
    if isinstance(node, Cast):
        return Cast(operand=resolve_expr(model, node.operand, scope, local_only),
                    unit=node.unit, symbol=node.symbol, span=node.span)
    if isinstance(node, RefExpr):
        return node
    raise ResolveError(f"cannot resolve node {node!r}", span=node.span)


def _expand_aggregation(model: Model, node: Agg, scope: Block) -> Expr:
    """Aggregations compute over the direct children of the containing block.

    A child participates when the aggregated expression resolves entirely
    within it; children without the referenced property are skipped (the
    running example sums ``Current`` over a mixed set of children)."""
    terms = []
    for child in scope.children:
        try:
            terms.append(resolve_expr(model, node.body, child, local_only=True))
        except ResolveError:
            continue
    if not terms:
        if node.name in _AGG_EMPTY:
            out = _AGG_EMPTY[node.name]()
            out.span = node.span
            return out
        raise ResolveError(
            f"{node.name}: no direct child of {scope.id or scope.name} "
            f"provides the aggregated expression", span=node.span)
    if node.name in _AGG_FOLD:
        op = _AGG_FOLD[node.name]
        out = terms[0]
        for t in terms[1:]:
            out = Binary(op=op, lhs=out, rhs=t, span=node.span)
        return out
    if node.name in ("MIN", "MAX"):
        return Call(name=node.name.lower(), args=tuple(terms), span=node.span)
    # UNION: the interval hull of the children values
    return IntervalLit(lo=Call(name="min", args=tuple(terms), span=node.span),
                       hi=Call(name="max", args=tuple(terms), span=node.span),
                       span=node.span)


@dataclass
class ResolvedModel:
    """The expanded model together with every resolved expression."""

    model: Model
    prop_exprs: dict[tuple[str, str], Optional[Expr]] = field(default_factory=dict)
    req_exprs: dict[tuple[str, int], Expr] = field(default_factory=dict)
    kpi_exprs: dict[tuple[str, int, str], Expr] = field(default_factory=dict)


def resolve(model: Model) -> ResolvedModel:
    """Run identifier resolution over an inheritance-expanded model."""
    out = ResolvedModel(model=model)
    for block in model.all_blocks():
        req_n = 0
        kpi_n = 0
        for member in block.members:
            if isinstance(member, Property):
                expr = None
                if member.formula is not None:
                    expr = resolve_expr(model, member.formula, block)
                out.prop_exprs[(block.id, member.name)] = expr
            elif isinstance(member, Requirement):
                req_n += 1
                out.req_exprs[(block.id, req_n)] = \
                    resolve_expr(model, member.condition, block)
            elif isinstance(member, KPI):
                kpi_n += 1
                for impl in allimpls(model, block):
                    out.kpi_exprs[(block.id, kpi_n, impl.id)] = \
                        resolve_expr(model, member.metric, impl)
    return out


# ---------------------------------------------------------------------------
# phase 3: constraint generation
# ---------------------------------------------------------------------------


def _ref(block_id: str, *kind) -> Reference:
    return Reference(block_id, tuple(kind))


def _refexpr(ref: Reference, span=(0, 0)) -> RefExpr:
    return RefExpr(ref=ref, time=TimeSym(span=(span[1], span[1])), span=span)


def _neg_inf(unit=DIMENSIONLESS) -> Expr:
    return Unary(op="-", operand=Lit(value=NumInterval.point(INF, unit)))


def _unknown_literal(dtype: ExprType) -> Lit:
    if dtype.kind == "bool":
        return Lit(value=MAYBE)
    if dtype.kind == "date":
        return Lit(value=DateValue.full())
    if dtype.kind == "duration":
        return Lit(value=DurationValue.full())
    return Lit(value=NumInterval.full(dtype.unit))


def _replacement_chain(block: Block, impl_list: list[Block], leaf, final: Expr,
                       span=(0, 0)) -> Expr:
    """if (A.?replacement = 1) then leaf(B_1) ... else final"""
    out = final
    repl = _ref(block.id, "repl")
    for i, impl in reversed(list(enumerate(impl_list, start=1))):
        cond = Binary(op="=", lhs=_refexpr(repl, span),
                      rhs=Lit(value=NumInterval.point(float(i))), span=span)
        out = Cond(cond=cond, then=leaf(impl), els=out, span=span)
    return out


def generate_constraints(resolved: ResolvedModel) -> list[Constraint]:
    """The flat constraint system, in document order.

    Per block: one constraint per property (an if-chain over the solution
    alternatives when the block has implementations), one per requirement,
    one per KPI and alternative, the availability conjunction, and the
    replacement selection."""
    model = resolved.model
    out: list[Constraint] = []
    for block in model.all_blocks():
        impl_list = allimpls(model, block)
        req_n = 0
        kpi_n = 0
        for member in block.members:
            if isinstance(member, Property):
                expr = resolved.prop_exprs[(block.id, member.name)]
                if expr is None:
                    expr = _unknown_literal(member.declared_type)
                    expr.span = member.span
                if impl_list:
                    name = member.name
                    expr = _replacement_chain(
                        block, impl_list,
                        lambda impl: _refexpr(_ref(impl.id, "prop", name),
                                              member.span),
                        expr, span=member.span)
                out.append(Constraint(
                    lhs=_ref(block.id, "prop", member.name), rhs=expr,
                    origin=frozenset({member.element_id})))
            elif isinstance(member, Requirement):
                req_n += 1
                origin = {member.element_id}
                if not member.element_id.startswith(block.id + "/"):
                    origin.add(block.id)  # inherited copy: name the host too
                out.append(Constraint(
                    lhs=_ref(block.id, "req", req_n),
                    rhs=resolved.req_exprs[(block.id, req_n)],
                    origin=frozenset(origin)))
            elif isinstance(member, KPI):
                kpi_n += 1
                for impl in impl_list:
                    out.append(Constraint(
                        lhs=_ref(block.id, "kpi", kpi_n, impl.id),
                        rhs=resolved.kpi_exprs[(block.id, kpi_n, impl.id)],
                        origin=frozenset({member.element_id, impl.id})))
        # availability: requirements & selected alternative & children
        span = block.span
        conjuncts: list[Expr] = [
            _refexpr(_ref(block.id, "req", n), span)
            for n in range(1, req_n + 1)]
        if impl_list:
            conjuncts.append(_replacement_chain(
                block, impl_list,
                lambda impl: _refexpr(_ref(impl.id, "avail"), span),
                Lit(value=Ternary.TRUE), span=span))
        conjuncts.extend(_refexpr(_ref(c.id, "avail"), span)
                         for c in block.children)
        avail: Expr = Lit(value=Ternary.TRUE)
        if conjuncts:
            avail = conjuncts[0]
            for c in conjuncts[1:]:
                avail = Binary(op="&", lhs=avail, rhs=c, span=span)
        out.append(Constraint(lhs=_ref(block.id, "avail"), rhs=avail,
                              origin=frozenset({block.id})))
        # replacement: index_of_max over availability-guarded KPI sums
        if impl_list:
            kpi_count = len(block.kpis)
            args = []
            for impl in impl_list:
                total: Expr
                if kpi_count == 0:
                    total = Lit(value=NumInterval.point(0.0))
                else:
                    total = _refexpr(_ref(block.id, "kpi", 1, impl.id), span)
                    for k in range(2, kpi_count + 1):
                        total = Binary(op="+", lhs=total,
                                       rhs=_refexpr(_ref(block.id, "kpi", k,
                                                         impl.id), span),
                                       span=span)
                args.append(Cond(cond=_refexpr(_ref(impl.id, "avail"), span),
                                 then=total, els=_neg_inf(), span=span))
            repl_rhs: Expr = Call(name="index_of_max", args=tuple(args),
                                  span=span)
        else:
            repl_rhs = Unary(op="-", operand=Lit(value=NumInterval.point(1.0)))
        out.append(Constraint(lhs=_ref(block.id, "repl"), rhs=repl_rhs,
                              origin=frozenset({block.id})))
    return out


# ---------------------------------------------------------------------------
# reference typing
# ---------------------------------------------------------------------------


class _TypeEnv:
    """Lazy reference typing with cycle detection, fed by resolved exprs."""

    def __init__(self, resolved: ResolvedModel):
        self.resolved = resolved
        self.types: dict[Reference, ExprType] = {}
        self.busy: set[Reference] = set()

    def __getitem__(self, ref: Reference) -> ExprType:
        if ref in self.types:
            return self.types[ref]
        if ref.kind[0] in ("avail", "req"):
            t = BOOL
        elif ref.kind[0] == "repl":
            t = num_type()
        else:
            if ref in self.busy:
                raise TypeCheckError(
                    f"cannot infer the type of {ref.describe()}: cyclic "
                    f"definition; declare the property type")
            self.busy.add(ref)
            try:
                t = self._member_type(ref)
            finally:
                self.busy.discard(ref)
        self.types[ref] = t
        return t

    def _member_type(self, ref: Reference) -> ExprType:
        if ref.kind[0] == "kpi":
            expr = self.resolved.kpi_exprs[(ref.block, ref.kind[1], ref.kind[2])]
            return typecheck(expr, self)
        block = self.resolved.model.by_id[ref.block]
        prop = next(p for p in block.props if p.name == ref.kind[1])
        if prop.declared_type is not None:
            return prop.declared_type
        expr = self.resolved.prop_exprs[(ref.block, prop.name)]
        return typecheck(expr, self)


def lower(model: Model, check_types: bool = True) -> ConstraintSystem:
    """Full pipeline: expand, resolve, generate, and (optionally) type."""
    expanded = expand_inheritance(model)
    resolved = resolve(expanded)
    constraints = generate_constraints(resolved)
    env = _TypeEnv(resolved)
    if check_types:
        for c in constraints:
            env[c.lhs]
            typecheck(c.rhs, env)
    return ConstraintSystem(model=expanded, constraints=constraints,
                            ref_types=dict(env.types),
                            short=expanded.short_names())


# ---------------------------------------------------------------------------
# text form (the golden listing and --emit-constraints)
# ---------------------------------------------------------------------------


def render_constraint(c: Constraint, short: dict[str, str] | None = None) -> str:
    rhs = render(_with_short_names(c.rhs, short))
    if isinstance(c.rhs, Binary) and c.rhs.op in ("<", "<=", ">", ">=", "=",
                                                  "!="):
        rhs = f"({rhs})"
    return f"{render_reference(c.lhs, None, short)} = {rhs}"


def render_constraints(system: ConstraintSystem) -> str:
    return "\n".join(render_constraint(c, system.short)
                     for c in system.constraints)


def _with_short_names(node: Expr, short: dict[str, str] | None) -> Expr:
    """Rewrite RefExpr nodes so rendering uses display names."""
    if short is None:
        return node
    from .expr import children

    def rewrite(n: Expr) -> Expr:
        if isinstance(n, RefExpr):
            sref = Reference(short.get(n.ref.block, n.ref.block),
                             _short_kind(n.ref.kind, short))
            return RefExpr(ref=sref, time=rewrite(n.time), span=n.span)
        kids = children(n)
        if not kids:
            return n
        replaced = dataclasses.replace(n)
        if isinstance(n, IntervalLit):
            replaced.lo, replaced.hi = rewrite(n.lo), rewrite(n.hi)
        elif isinstance(n, Unary):
            replaced.operand = rewrite(n.operand)
        elif isinstance(n, Binary):
            replaced.lhs, replaced.rhs = rewrite(n.lhs), rewrite(n.rhs)
        elif isinstance(n, Cond):
            replaced.cond = rewrite(n.cond)
            replaced.then = rewrite(n.then)
            replaced.els = rewrite(n.els)
        elif isinstance(n, (Call, Ident)):
            replaced.args = tuple(rewrite(a) for a in n.args)
        elif isinstance(n, Cast):
            replaced.operand = rewrite(n.operand)
        return replaced

    return rewrite(node)


def _short_kind(kind: tuple, short: dict[str, str]) -> tuple:
    if kind[0] == "kpi":
        return ("kpi", kind[1], short.get(kind[2], kind[2]))
    return kind


def parse_constraint_line(line: str) -> tuple[str, Expr]:
    """Split a listing line into its reference text and parsed rhs."""
    head, sep, rest = line.partition(") = ")
    if not sep:
        raise ValueError(f"not a constraint line: {line!r}")
    return head + ")", parse_expr(rest)


_COMMUTATIVE = ("&", "|", "+", "*")


def _flatten(node: Binary, op: str, out: list) -> None:
    for side in (node.lhs, node.rhs):
        if isinstance(side, Binary) and side.op == op:
            _flatten(side, op, out)
        else:
            out.append(side)


def normalize_expr(node: Expr) -> Expr:
    """Sort commutative operand chains so structurally equal constraint
    systems render identically regardless of emission order."""
    from .expr import children as kids_of

    if isinstance(node, Binary) and node.op in _COMMUTATIVE:
        terms: list[Expr] = []
        _flatten(node, node.op, terms)
        terms = sorted((normalize_expr(t) for t in terms), key=render)
        out = terms[0]
        for t in terms[1:]:
            out = Binary(op=node.op, lhs=out, rhs=t)
        return out
    if not kids_of(node):
        return node
    replaced = dataclasses.replace(node)
    if isinstance(node, IntervalLit):
        replaced.lo = normalize_expr(node.lo)
        replaced.hi = normalize_expr(node.hi)
    elif isinstance(node, Unary):
        replaced.operand = normalize_expr(node.operand)
    elif isinstance(node, Binary):
        replaced.lhs = normalize_expr(node.lhs)
        replaced.rhs = normalize_expr(node.rhs)
    elif isinstance(node, Cond):
        replaced.cond = normalize_expr(node.cond)
        replaced.then = normalize_expr(node.then)
        replaced.els = normalize_expr(node.els)
    elif isinstance(node, (Call, Ident)):
        replaced.args = tuple(normalize_expr(a) for a in node.args)
    elif isinstance(node, Cast):
        replaced.operand = normalize_expr(node.operand)
    elif isinstance(node, RefExpr):
        replaced.time = normalize_expr(node.time)
    return replaced


def canonical_text(expr_text: str) -> str:
    """Normal form of an expression's text, stable under reparsing."""
    once = render(normalize_expr(parse_expr(expr_text)))
    return render(normalize_expr(parse_expr(once)))


def constraint_count_formula(model: Model) -> int:
    """|constraints| = sum over blocks of
    |allprops| + |allreqs| + |kpis| * |allimpls| + 2."""
    total = 0
    for b in model.all_blocks():
        total += (len(allprops(model, b)) + len(allreqs(model, b))
                  + len(b.kpis) * len(allimpls(model, b)) + 2)
    return total
