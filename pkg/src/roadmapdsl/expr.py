"""The embedded textual expression language.

Hand-written lexer and recursive descent parser producing a typed AST with
source spans (offsets into the expression source) for highlighting.
Precedence, tightest first: unary ``!``/``-``, ``^``, ``*`` ``/``, ``+``
``-``, relational, ``&``, ``|``, and ``if/then/else`` spanning lowest.
Identifiers without an explicit time argument receive the implicit ``T``.

``render`` produces the canonical text form; parsing the rendered text
yields a structurally identical tree (spans are not compared).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import ExprSyntaxError
from .units import Unit, is_unit_symbol, parse_unit, render_unit
from .values import (
    DateValue,
    MAYBE,
    NumInterval,
    Ternary,
    Value,
    parse_month_literal,
    render_value,
)

Span = tuple[int, int]

AGGREGATIONS = ("SUM", "PRODUCT", "AND", "OR", "MIN", "MAX", "UNION")
FUNCTIONS = ("sin", "cos", "exp", "ln", "log", "sqrt", "min", "max", "num",
             "linear", "months", "years", "index_of_max")
KEYWORDS = ("if", "then", "else", "true", "false", "maybe", "inf", "PI", "T")

COMPARISON_OPS = ("<", "<=", ">", ">=", "=", "!=")


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(eq=True)
class Expr:
    span: Span = field(compare=False, kw_only=True, default=(0, 0))
    etype: object = field(compare=False, kw_only=True, default=None, repr=False)


@dataclass(eq=True)
class Lit(Expr):
    """A literal value: number (with unit), boolean, maybe, inf, or a date."""
    value: Value = None


@dataclass(eq=True)
class IntervalLit(Expr):
    lo: Expr = None
    hi: Expr = None


@dataclass(eq=True)
class TimeSym(Expr):
    """The global time parameter ``T``."""


@dataclass(eq=True)
class Ident(Expr):
    """A dotted identifier path with its argument list.

    ``args`` is ``(time,)`` for ordinary references (the implicit ``T`` is
    materialized at parse time) and ``(implPath, time)`` for internal
    ``?kpiN`` references.
    """
    path: tuple[str, ...] = ()
    args: tuple[Expr, ...] = ()


@dataclass(eq=True)
class Unary(Expr):
    op: str = ""
    operand: Expr = None


@dataclass(eq=True)
class Binary(Expr):
    op: str = ""
    lhs: Expr = None
    rhs: Expr = None


@dataclass(eq=True)
class Cond(Expr):
    cond: Expr = None
    then: Expr = None
    els: Expr = None


@dataclass(eq=True)
class Agg(Expr):
    name: str = ""
    body: Expr = None


@dataclass(eq=True)
class Call(Expr):
    name: str = ""
    args: tuple[Expr, ...] = ()


@dataclass(eq=True)
class Cast(Expr):
    """Unit-cast postfix ``(expr)[A]``: asserts the operand's dimension."""
    operand: Expr = None
    unit: Unit = None
    symbol: str = ""


@dataclass(eq=True)
class RefExpr(Expr):
    """A resolved reference; appears only after identifier resolution."""
    ref: object = None  # lowering.Reference
    time: Expr = None


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<num>\d+\.\d+|\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|==|!=|\.\.|[<>=!&|+\-*/^()\[\],.?{}:])
""", re.VERBOSE)

_DATE_RE = re.compile(r"(Jan|Feb|Mar|Apr|May|Jun|Jul|Aug|Sep|Oct|Nov|Dec)\d{4}$")


@dataclass
class Token:
    kind: str  # num | ident | date | op | eof
    text: str
    start: int
    end: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if not m:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}",
                                  span=(pos, pos + 1))
        pos = m.end()
        if m.lastgroup == "ws":
            continue
        text = m.group()
        kind = m.lastgroup
        if kind == "ident" and _DATE_RE.match(text):
            kind = "date"
        tokens.append(Token(kind, text, m.start(), m.end()))
    tokens.append(Token("eof", "", n, n))
    return tokens


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[Token], source: str):
        self.tokens = tokens
        self.source = source
        self.i = 0

    def peek(self, offset=0) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.kind == "op" and tok.text == text:
            return self.next()
        if tok.kind == "ident" and tok.text == text:
            return self.next()
        raise ExprSyntaxError(
            f"expected {text!r}, found {tok.text or 'end of input'!r}",
            span=(tok.start, tok.end), expected=(text,))

    def at_op(self, *texts: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text in texts

    def at_word(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and tok.text in words

    # expression := if/then/else | or_expr
    def expression(self) -> Expr:
        if self.at_word("if"):
            start = self.next().start
            cond = self.expression()
            self.expect("then")
            then = self.expression()
            self.expect("else")
            els = self.expression()
            return Cond(cond=cond, then=then, els=els, span=(start, els.span[1]))
        return self.or_expr()

    def or_expr(self) -> Expr:
        node = self.and_expr()
        while self.at_op("|"):
            self.next()
            rhs = self.and_expr()
            node = Binary(op="|", lhs=node, rhs=rhs,
                          span=(node.span[0], rhs.span[1]))
        return node

    def and_expr(self) -> Expr:
        node = self.rel_expr()
        while self.at_op("&"):
            self.next()
            rhs = self.rel_expr()
            node = Binary(op="&", lhs=node, rhs=rhs,
                          span=(node.span[0], rhs.span[1]))
        return node

    def rel_expr(self) -> Expr:
        node = self.add_expr()
        if self.at_op("<", "<=", ">", ">=", "=", "==", "!="):
            op = self.next().text
            if op == "==":  # canonical form
                op = "="
            rhs = self.add_expr()
            node = Binary(op=op, lhs=node, rhs=rhs,
                          span=(node.span[0], rhs.span[1]))
        return node

    def add_expr(self) -> Expr:
        node = self.mul_expr()
        while self.at_op("+", "-"):
            op = self.next().text
            rhs = self.mul_expr()
            node = Binary(op=op, lhs=node, rhs=rhs,
                          span=(node.span[0], rhs.span[1]))
        return node

    def mul_expr(self) -> Expr:
        node = self.pow_expr()
        while self.at_op("*", "/"):
            op = self.next().text
            rhs = self.pow_expr()
            node = Binary(op=op, lhs=node, rhs=rhs,
                          span=(node.span[0], rhs.span[1]))
        return node

    # unary binds tighter than ^, so -x^2 is (-x)^2
    def pow_expr(self) -> Expr:
        node = self.unary()
        if self.at_op("^"):
            self.next()
            rhs = self.pow_expr()
            node = Binary(op="^", lhs=node, rhs=rhs,
                          span=(node.span[0], rhs.span[1]))
        return node

    def unary(self) -> Expr:
        if self.at_op("!", "-"):
            tok = self.next()
            operand = self.unary()
            return Unary(op=tok.text, operand=operand,
                         span=(tok.start, operand.span[1]))
        return self.postfix()

    def postfix(self) -> Expr:
        node = self.primary()
        while self.at_op("["):
            lbr = self.next()
            sym = self.peek()
            if sym.kind != "ident" or not is_unit_symbol(sym.text):
                raise ExprSyntaxError(
                    f"expected a unit symbol in cast, found {sym.text!r}",
                    span=(sym.start, sym.end), expected=("unit symbol",))
            self.next()
            end = self.expect("]").end
            node = Cast(operand=node, unit=parse_unit(sym.text).base(),
                        symbol=sym.text, span=(node.span[0], end))
        return node

    def primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            return self.number()
        if tok.kind == "date":
            self.next()
            months = parse_month_literal(tok.text)
            return Lit(value=DateValue.point(months), span=(tok.start, tok.end))
        if tok.kind == "ident":
            text = tok.text
            if text == "true":
                self.next()
                return Lit(value=Ternary.TRUE, span=(tok.start, tok.end))
            if text == "false":
                self.next()
                return Lit(value=Ternary.FALSE, span=(tok.start, tok.end))
            if text == "maybe":
                self.next()
                return Lit(value=MAYBE, span=(tok.start, tok.end))
            if text == "inf":
                self.next()
                return Lit(value=NumInterval.point(float("inf")),
                           span=(tok.start, tok.end))
            if text == "PI":
                self.next()
                import math
                return Lit(value=NumInterval.point(math.pi),
                           span=(tok.start, tok.end))
            if text == "T":
                self.next()
                return TimeSym(span=(tok.start, tok.end))
            if text == "if":
                return self.expression()
            if text in AGGREGATIONS and self.peek(1).text == "(":
                self.next()
                self.expect("(")
                body = self.expression()
                end = self.expect(")").end
                return Agg(name=text, body=body, span=(tok.start, end))
            if text in FUNCTIONS and self.peek(1).text == "(":
                self.next()
                self.expect("(")
                args = self.arg_list()
                end = self.expect(")").end
                return Call(name=text, args=tuple(args), span=(tok.start, end))
            return self.ident_path()
        if self.at_op("("):
            self.next()
            node = self.expression()
            self.expect(")")
            return node
        if self.at_op("["):
            start = self.next().start
            lo = self.expression()
            self.expect("..")
            hi = self.expression()
            end = self.expect("]").end
            return IntervalLit(lo=lo, hi=hi, span=(start, end))
        raise ExprSyntaxError(
            f"expected an expression, found {tok.text or 'end of input'!r}",
            span=(tok.start, tok.end),
            expected=("literal", "identifier", "(", "["))

    def number(self) -> Expr:
        tok = self.next()
        value = float(tok.text)
        end = tok.end
        unit = None
        nxt = self.peek()
        # a unit suffix must be glued to the number: 12V, 400mA
        if nxt.kind in ("ident", "date") and nxt.start == tok.end:
            if not is_unit_symbol(nxt.text):
                raise ExprSyntaxError(f"unknown unit symbol {nxt.text!r}",
                                      span=(nxt.start, nxt.end),
                                      expected=("unit symbol",))
            unit = parse_unit(nxt.text)
            self.next()
            end = nxt.end
        iv = NumInterval.make(value, value, unit) if unit \
            else NumInterval.point(value)
        return Lit(value=iv, span=(tok.start, end))

    def ident_path(self) -> Expr:
        first = self.next()
        if first.kind != "ident":
            raise ExprSyntaxError(f"expected an identifier, found {first.text!r}",
                                  span=(first.start, first.end),
                                  expected=("identifier",))
        path = [first.text]
        end = first.end
        while self.at_op("."):
            self.next()
            seg = ""
            if self.at_op("?"):
                self.next()
                seg = "?"
            tok = self.next()
            if tok.kind not in ("ident", "date"):
                raise ExprSyntaxError(
                    f"expected a path segment, found {tok.text!r}",
                    span=(tok.start, tok.end), expected=("identifier",))
            path.append(seg + tok.text)
            end = tok.end
        args: tuple[Expr, ...]
        if self.at_op("("):
            self.next()
            args = tuple(self.arg_list())
            end = self.expect(")").end
        else:
            # the implicit time argument T
            args = (TimeSym(span=(end, end)),)
        return Ident(path=tuple(path), args=args, span=(first.start, end))

    def arg_list(self) -> list[Expr]:
        args = []
        if self.at_op(")"):
            return args
        args.append(self.expression())
        while self.at_op(","):
            self.next()
            args.append(self.expression())
        return args


def parse_expr(source: str) -> Expr:
    """Parse expression text; raises ExprSyntaxError with a span on failure."""
    parser = _Parser(tokenize(source), source)
    node = parser.expression()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ExprSyntaxError(f"unexpected trailing input {tok.text!r}",
                              span=(tok.start, tok.end), expected=("end of input",))
    return node


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

_PREC_COND = 0
_PREC_OR = 1
_PREC_AND = 2
_PREC_REL = 3
_PREC_ADD = 4
_PREC_MUL = 5
_PREC_POW = 6
_PREC_UNARY = 7
_PREC_POSTFIX = 8

_BINARY_PREC = {"|": _PREC_OR, "&": _PREC_AND,
                "<": _PREC_REL, "<=": _PREC_REL, ">": _PREC_REL,
                ">=": _PREC_REL, "=": _PREC_REL, "!=": _PREC_REL,
                "+": _PREC_ADD, "-": _PREC_ADD,
                "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}


def render(node: Expr) -> str:
    """Canonical text form; reparses to a structurally identical tree."""
    return _render(node, 0)


def _render(node: Expr, min_prec: int) -> str:
    text, prec = _render_prec(node)
    if prec < min_prec:
        return f"({text})"
    return text


def _render_prec(node: Expr) -> tuple[str, int]:
    if isinstance(node, Lit):
        return render_value(node.value), _PREC_POSTFIX
    if isinstance(node, TimeSym):
        return "T", _PREC_POSTFIX
    if isinstance(node, IntervalLit):
        return f"[{_render(node.lo, 0)} .. {_render(node.hi, 0)}]", _PREC_POSTFIX
    if isinstance(node, Ident):
        args = ", ".join(_render(a, 0) for a in node.args)
        return f"{'.'.join(node.path)}({args})", _PREC_POSTFIX
    if isinstance(node, RefExpr):
        from .lowering import render_reference
        return render_reference(node.ref, node.time), _PREC_POSTFIX
    if isinstance(node, Call):
        args = ", ".join(_render(a, 0) for a in node.args)
        return f"{node.name}({args})", _PREC_POSTFIX
    if isinstance(node, Agg):
        return f"{node.name}({_render(node.body, 0)})", _PREC_POSTFIX
    if isinstance(node, Cast):
        return f"{_render(node.operand, _PREC_POSTFIX)}[{node.symbol}]", \
            _PREC_POSTFIX
    if isinstance(node, Unary):
        return f"{node.op}{_render(node.operand, _PREC_UNARY)}", _PREC_UNARY
    if isinstance(node, Binary):
        prec = _BINARY_PREC[node.op]
        if node.op == "^":  # right associative
            lhs = _render(node.lhs, prec + 1)
            rhs = _render(node.rhs, prec)
        elif prec == _PREC_REL:  # non associative
            lhs = _render(node.lhs, prec + 1)
            rhs = _render(node.rhs, prec + 1)
        else:
            lhs = _render(node.lhs, prec)
            rhs = _render(node.rhs, prec + 1)
        return f"{lhs} {node.op} {rhs}", prec
    if isinstance(node, Cond):
        return (f"if {_render(node.cond, 0)} then {_render(node.then, 0)} "
                f"else {_render(node.els, 0)}"), _PREC_COND
    raise TypeError(f"cannot render {node!r}")


# ---------------------------------------------------------------------------
# reference extraction (the computation side of reference highlighting)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RefOccurrence:
    path: tuple[str, ...]
    span: Span


def extract_references(node: Expr) -> list[RefOccurrence]:
    """All identifier-path nodes in source order; ``T`` is not a reference."""
    out: list[RefOccurrence] = []
    _walk_refs(node, out)
    out.sort(key=lambda occ: occ.span)
    return out


def _walk_refs(node: Expr, out: list[RefOccurrence]) -> None:
    if isinstance(node, Ident):
        out.append(RefOccurrence(node.path, node.span))
        for a in node.args:
            _walk_refs(a, out)
    elif isinstance(node, RefExpr):
        from .lowering import reference_path
        out.append(RefOccurrence(reference_path(node.ref), node.span))
        _walk_refs(node.time, out)
    elif isinstance(node, (Lit, TimeSym)):
        pass
    elif isinstance(node, IntervalLit):
        _walk_refs(node.lo, out)
        _walk_refs(node.hi, out)
    elif isinstance(node, Unary):
        _walk_refs(node.operand, out)
    elif isinstance(node, Binary):
        _walk_refs(node.lhs, out)
        _walk_refs(node.rhs, out)
    elif isinstance(node, Cond):
        _walk_refs(node.cond, out)
        _walk_refs(node.then, out)
        _walk_refs(node.els, out)
    elif isinstance(node, Agg):
        _walk_refs(node.body, out)
    elif isinstance(node, Call):
        for a in node.args:
            _walk_refs(a, out)
    elif isinstance(node, Cast):
        _walk_refs(node.operand, out)
    else:
        raise TypeError(f"unknown node {node!r}")


def children(node: Expr) -> tuple[Expr, ...]:
    """Direct child expressions of a node."""
    if isinstance(node, (Lit, TimeSym)):
        return ()
    if isinstance(node, IntervalLit):
        return (node.lo, node.hi)
    if isinstance(node, Ident):
        return node.args
    if isinstance(node, RefExpr):
        return (node.time,)
    if isinstance(node, Unary):
        return (node.operand,)
    if isinstance(node, Binary):
        return (node.lhs, node.rhs)
    if isinstance(node, Cond):
        return (node.cond, node.then, node.els)
    if isinstance(node, Agg):
        return (node.body,)
    if isinstance(node, Call):
        return node.args
    if isinstance(node, Cast):
        return (node.operand,)
    raise TypeError(f"unknown node {node!r}")


def tree_size(node: Expr) -> int:
    return 1 + sum(tree_size(c) for c in children(node))
