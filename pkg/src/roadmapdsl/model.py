"""The hierarchical roadmap metamodel and its textual concrete syntax.

A model file (``.rdm``) nests blocks; each block lists properties,
requirements, KPIs, and child blocks in declaration order::

    model Name {
      block Vehicle {
        prop TotalCurrent = SUM(Current)
        block Fuse {
          kpi num(Watchdog)
          prop MaxLoadCurrent: A      // declared type only: an unknown
          require MaxLoadCurrent >= Vehicle.TotalCurrent
        }
      }
      block BlFuse implements Vehicle.Fuse { ... }
    }

Implementations inherit properties (local definitions override, first
interface wins on diamonds) and requirements (which always accumulate);
KPIs and child blocks are never inherited.  Blocks are immutable after
parsing and safe for concurrent reads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .errors import ModelSyntaxError, ValidationError
from .expr import (
    AGGREGATIONS,
    FUNCTIONS,
    KEYWORDS,
    Expr,
    Span,
    _Parser,
    tokenize,
)
from .typecheck import BOOL, DATE, DURATION, ExprType, num_type
from .units import is_unit_symbol, parse_unit

_RESERVED = set(KEYWORDS) | set(FUNCTIONS) | set(AGGREGATIONS) | {
    "model", "block", "implements", "prop", "require", "kpi",
    "bool", "num", "date", "duration",
}


@dataclass
class Property:
    name: str
    formula: Optional[Expr]  # None for declared-type-only properties
    declared_type: Optional[ExprType]
    span: Span
    source: str = ""
    element_id: str = ""  # filled when the owning block is registered


@dataclass
class Requirement:
    condition: Expr
    span: Span
    source: str = ""
    element_id: str = ""


@dataclass
class KPI:
    metric: Expr
    span: Span
    source: str = ""
    element_id: str = ""


Member = "Property | Requirement | KPI"


@dataclass
class Block:
    name: str
    members: list = field(default_factory=list)  # declaration order
    children: list["Block"] = field(default_factory=list)
    impls: list[tuple[tuple[str, ...], Span]] = field(default_factory=list)
    span: Span = (0, 0)
    id: str = ""  # fully qualified dotted path, filled on registration
    impl_targets: list[str] = field(default_factory=list)  # resolved block ids

    @property
    def props(self) -> list[Property]:
        return [m for m in self.members if isinstance(m, Property)]

    @property
    def reqs(self) -> list[Requirement]:
        return [m for m in self.members if isinstance(m, Requirement)]

    @property
    def kpis(self) -> list[KPI]:
        return [m for m in self.members if isinstance(m, KPI)]


@dataclass
class Model:
    name: str
    blocks: list[Block] = field(default_factory=list)  # top level
    source: str = ""
    by_id: dict[str, Block] = field(default_factory=dict, repr=False)
    parent: dict[str, Optional[str]] = field(default_factory=dict, repr=False)

    def all_blocks(self) -> Iterator[Block]:
        """Pre-order document traversal."""
        def walk(block):
            yield block
            for child in block.children:
                yield from walk(child)
        for b in self.blocks:
            yield from walk(b)

    def block(self, block_id: str) -> Block:
        return self.by_id[block_id]

    def parent_of(self, block: Block) -> Optional[Block]:
        pid = self.parent[block.id]
        return self.by_id[pid] if pid else None

    def short_names(self) -> dict[str, str]:
        """block id -> shortest unambiguous display name (its own name when
        globally unique, the full path otherwise)."""
        counts: dict[str, int] = {}
        for b in self.all_blocks():
            counts[b.name] = counts.get(b.name, 0) + 1
        return {b.id: (b.name if counts[b.name] == 1 else b.id)
                for b in self.all_blocks()}


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


class _ModelParser:
    def __init__(self, source: str):
        self.source = source
        self.p = _Parser(tokenize(source), source)

    def parse(self) -> Model:
        self.p.expect("model")
        name = self._name("model name")
        self.p.expect("{")
        blocks = []
        while not self.p.at_op("}"):
            blocks.append(self.block())
        self.p.expect("}")
        tok = self.p.peek()
        if tok.kind != "eof":
            raise ModelSyntaxError(f"unexpected trailing input {tok.text!r}",
                                   span=(tok.start, tok.end))
        return Model(name=name, blocks=blocks, source=self.source)

    def _name(self, what: str) -> str:
        tok = self.p.peek()
        if tok.kind != "ident":
            raise ModelSyntaxError(f"expected {what}, found {tok.text!r}",
                                   span=(tok.start, tok.end))
        if tok.text in _RESERVED:
            raise ModelSyntaxError(f"{tok.text!r} is reserved and cannot name "
                                   f"a {what}", span=(tok.start, tok.end))
        self.p.next()
        return tok.text

    def block(self) -> Block:
        start = self.p.expect("block").start
        name = self._name("block name")
        impls = []
        if self.p.at_word("implements"):
            self.p.next()
            impls.append(self._path())
            while self.p.at_op(","):
                self.p.next()
                impls.append(self._path())
        self.p.expect("{")
        block = Block(name=name, impls=impls)
        while not self.p.at_op("}"):
            tok = self.p.peek()
            if tok.text == "block":
                block.children.append(self.block())
            elif tok.text == "prop":
                block.members.append(self.prop())
            elif tok.text == "require":
                self.p.next()
                expr = self.p.expression()
                block.members.append(Requirement(
                    condition=expr, span=expr.span,
                    source=self.source[expr.span[0]:expr.span[1]]))
            elif tok.text == "kpi":
                self.p.next()
                expr = self.p.expression()
                block.members.append(KPI(
                    metric=expr, span=expr.span,
                    source=self.source[expr.span[0]:expr.span[1]]))
            else:
                raise ModelSyntaxError(
                    f"expected prop/require/kpi/block, found {tok.text!r}",
                    span=(tok.start, tok.end))
        end = self.p.expect("}").end
        block.span = (start, end)
        return block

    def prop(self) -> Property:
        self.p.next()  # prop
        tok = self.p.peek()
        name = self._name("property name")
        if self.p.at_op(":"):
            self.p.next()
            ttok = self.p.peek()
            dtype = self._type()
            return Property(name=name, formula=None, declared_type=dtype,
                            span=(tok.start, ttok.end))
        self.p.expect("=")
        expr = self.p.expression()
        return Property(name=name, formula=expr, declared_type=None,
                        span=expr.span,
                        source=self.source[expr.span[0]:expr.span[1]])

    def _type(self) -> ExprType:
        tok = self.p.next()
        if tok.kind != "ident":
            raise ModelSyntaxError(f"expected a type, found {tok.text!r}",
                                   span=(tok.start, tok.end))
        if tok.text == "bool":
            return BOOL
        if tok.text == "num":
            return num_type()
        if tok.text == "date":
            return DATE
        if tok.text == "duration":
            return DURATION
        if is_unit_symbol(tok.text):
            return num_type(parse_unit(tok.text))
        raise ModelSyntaxError(
            f"expected bool/num/date/duration or a unit symbol, "
            f"found {tok.text!r}", span=(tok.start, tok.end))

    def _path(self) -> tuple[tuple[str, ...], Span]:
        tok = self.p.peek()
        first = self._name("block path")
        path = [first]
        end = tok.end
        while self.p.at_op("."):
            self.p.next()
            seg = self.p.next()
            if seg.kind != "ident":
                raise ModelSyntaxError(f"expected a path segment, "
                                       f"found {seg.text!r}",
                                       span=(seg.start, seg.end))
            path.append(seg.text)
            end = seg.end
        return tuple(path), (tok.start, end)


def parse_model(source: str) -> Model:
    """Parse and structurally validate model text."""
    model = _ModelParser(source).parse()
    _register(model)
    _validate(model)
    return model


def _register(model: Model) -> None:
    def walk(block: Block, prefix: str, parent_id: Optional[str]):
        block.id = f"{prefix}{block.name}"
        if block.id in model.by_id:
            raise ValidationError(f"duplicate block name {block.id}",
                                  span=block.span)
        model.by_id[block.id] = block
        model.parent[block.id] = parent_id
        names = set()
        for m in block.members:
            if isinstance(m, Property):
                if m.name in names or any(c.name == m.name
                                          for c in block.children):
                    raise ValidationError(
                        f"duplicate name {m.name!r} in block {block.id}",
                        span=m.span)
                names.add(m.name)
                m.element_id = f"{block.id}.{m.name}"
        for i, m in enumerate(b for b in block.members
                              if isinstance(b, Requirement)):
            m.element_id = f"{block.id}/req{i + 1}"
        for i, m in enumerate(b for b in block.members if isinstance(b, KPI)):
            m.element_id = f"{block.id}/kpi{i + 1}"
        child_names = set()
        for child in block.children:
            if child.name in child_names or child.name in names:
                raise ValidationError(
                    f"duplicate name {child.name!r} in block {block.id}",
                    span=child.span)
            child_names.add(child.name)
            walk(child, block.id + ".", block.id)

    top = set()
    for b in model.blocks:
        if b.name in top:
            raise ValidationError(f"duplicate block name {b.name}", span=b.span)
        top.add(b.name)
        walk(b, "", None)


def resolve_block_path(model: Model, path: tuple[str, ...],
                       scope: Optional[Block]) -> Optional[Block]:
    """Resolve a dotted block path using lexical scoping: look in the scope
    block's children, then in each ancestor's, then at the top level."""
    chain: list[Optional[Block]] = []
    cur = scope
    while cur is not None:
        chain.append(cur)
        cur = model.parent_of(cur)
    chain.append(None)  # top level
    for anchor in chain:
        pool = anchor.children if anchor is not None else model.blocks
        head = next((c for c in pool if c.name == path[0]), None)
        if head is None:
            continue
        target = head
        ok = True
        for seg in path[1:]:
            nxt = next((c for c in target.children if c.name == seg), None)
            if nxt is None:
                ok = False
                break
            target = nxt
        if ok:
            return target
    return None


def _validate(model: Model) -> None:
    for block in model.all_blocks():
        for path, span in block.impls:
            target = resolve_block_path(model, path, model.parent_of(block))
            if target is None:
                raise ValidationError(
                    f"unresolved implements target {'.'.join(path)} "
                    f"in block {block.id}", span=span)
            if target.id == block.id:
                raise ValidationError(f"block {block.id} cannot implement "
                                      f"itself", span=span)
            block.impl_targets.append(target.id)
    # impls must be acyclic (implementation -> interface edges)
    state: dict[str, int] = {}

    def visit(block_id: str):
        if state.get(block_id) == 1:
            raise ValidationError(f"implements cycle through {block_id}")
        if state.get(block_id) == 2:
            return
        state[block_id] = 1
        for impl in impls(model, model.by_id[block_id]):
            visit(impl.id)
        state[block_id] = 2

    for b in model.all_blocks():
        visit(b.id)


# ---------------------------------------------------------------------------
# the set functions over the impls relation
# ---------------------------------------------------------------------------


def impls(model: Model, a: Block) -> list[Block]:
    """Direct implementations of ``a`` in document order."""
    return [b for b in model.all_blocks() if a.id in b.impl_targets]


def interfaces(model: Model) -> list[Block]:
    """Blocks acting as an interface (having at least one implementation)."""
    return [b for b in model.all_blocks() if impls(model, b)]


def allimpls(model: Model, a: Block) -> list[Block]:
    """Transitive closure of ``impls`` in document order, deduplicated."""
    out: list[Block] = []
    seen: set[str] = set()

    def add(block: Block):
        for b in impls(model, block):
            if b.id not in seen:
                seen.add(b.id)
                out.append(b)
                add(b)

    add(a)
    return out


def expanded_members(model: Model, block: Block) -> list:
    """The block's members with inheritance applied.

    Inherited members come first, in each interface's declaration order and
    in the order interfaces are listed (the first interface wins conflicting
    property names); locally declared members follow and override inherited
    properties of the same name.  Requirements always accumulate; KPIs are
    never inherited.
    """
    local_prop_names = {m.name for m in block.members
                        if isinstance(m, Property)}
    inherited: list = []
    seen_props: set[str] = set()
    seen_reqs: set[str] = set()  # one copy per declaration on diamond paths
    for target_id in block.impl_targets:
        iface = model.by_id[target_id]
        for m in expanded_members(model, iface):
            if isinstance(m, Property):
                if m.name in local_prop_names or m.name in seen_props:
                    continue
                seen_props.add(m.name)
                inherited.append(m)
            elif isinstance(m, Requirement):
                if m.element_id in seen_reqs:
                    continue
                seen_reqs.add(m.element_id)
                inherited.append(m)
            # KPIs stay local to the block that declares them
    return inherited + list(block.members)


def allprops(model: Model, block: Block) -> list[Property]:
    """All properties including inherited ones; local definitions override."""
    return [m for m in expanded_members(model, block)
            if isinstance(m, Property)]


def allreqs(model: Model, block: Block) -> list[Requirement]:
    """All requirements including inherited ones; these cannot be removed."""
    return [m for m in expanded_members(model, block)
            if isinstance(m, Requirement)]
