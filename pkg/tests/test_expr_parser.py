"""Parser: documented expression forms, precedence, spans, time-argument
defaulting, render round-trip over a generated corpus, and fuzzing."""

import random
import string

import pytest

from roadmapdsl.errors import ExprSyntaxError
from roadmapdsl.expr import (
    Agg,
    Binary,
    Call,
    Cast,
    Cond,
    Ident,
    IntervalLit,
    Lit,
    TimeSym,
    Unary,
    children,
    extract_references,
    parse_expr,
    render,
    tokenize,
)
from roadmapdsl.units import parse_unit
from roadmapdsl.values import DateValue, NumInterval, Ternary, parse_month_literal


def test_documented_requirement_expression():
    node = parse_expr("T >= Jan2022 + [months(12)..months(36)]")
    assert isinstance(node, Binary) and node.op == ">="
    assert isinstance(node.lhs, TimeSym)
    assert isinstance(node.rhs, Binary) and node.rhs.op == "+"
    assert node.rhs.lhs == Lit(value=DateValue.point(parse_month_literal("Jan2022")))
    assert isinstance(node.rhs.rhs, IntervalLit)
    assert isinstance(node.rhs.rhs.lo, Call) and node.rhs.rhs.lo.name == "months"


def test_unit_suffix_literal():
    node = parse_expr("2 * 12V")
    assert isinstance(node, Binary) and node.op == "*"
    assert node.rhs == Lit(value=NumInterval.make(12, 12, parse_unit("V")))


def test_boolean_operators():
    node = parse_expr("a & !b")
    assert isinstance(node, Binary) and node.op == "&"
    assert isinstance(node.rhs, Unary) and node.rhs.op == "!"
    assert node.rhs.operand.path == ("b",)


def test_precedence_arith_over_relational_over_boolean():
    node = parse_expr("1 + 2 * 3 < 4 & x | y")
    # ((1 + (2*3)) < 4) & x) | y
    assert node.op == "|"
    assert node.lhs.op == "&"
    assert node.lhs.lhs.op == "<"
    assert node.lhs.lhs.lhs.op == "+"
    assert node.lhs.lhs.lhs.rhs.op == "*"


def test_unary_binds_tighter_than_power():
    node = parse_expr("-x^2")
    assert node.op == "^"
    assert isinstance(node.lhs, Unary)


def test_power_right_associative():
    node = parse_expr("2^3^2")
    assert node.op == "^"
    assert node.rhs.op == "^"


def test_if_then_else_spans_lowest():
    node = parse_expr("if a then 1 else 2 + 3")
    assert isinstance(node, Cond)
    assert node.els.op == "+"


def test_equality_forms_canonicalized():
    assert parse_expr("a == b") == parse_expr("a = b")


def test_implicit_time_argument_materialized():
    node = parse_expr("Vehicle.Fuse.Watchdog")
    assert isinstance(node, Ident)
    assert node.path == ("Vehicle", "Fuse", "Watchdog")
    assert len(node.args) == 1 and isinstance(node.args[0], TimeSym)
    # zero width span right after the identifier
    assert node.args[0].span == (len("Vehicle.Fuse.Watchdog"),) * 2


def test_explicit_time_argument():
    node = parse_expr("TFLOPS(Jan2030)")
    assert node.args[0] == Lit(value=DateValue.point(parse_month_literal("Jan2030")))
    shifted = parse_expr("A(T - years(2))")
    assert isinstance(shifted.args[0], Binary) and shifted.args[0].op == "-"


def test_unit_cast_postfix():
    node = parse_expr("(ProcessingUnits.PowerConsumption(T) / 12V)[A]")
    assert isinstance(node, Cast)
    assert node.symbol == "A"
    assert node.operand.op == "/"


def test_internal_reference_forms_parse():
    node = parse_expr("Fuse.?kpi1(BlFuse,T)")
    assert node.path == ("Fuse", "?kpi1")
    assert len(node.args) == 2
    avail = parse_expr("EFuse.?availability(T)")
    assert avail.path == ("EFuse", "?availability")


def test_aggregation():
    node = parse_expr("SUM(Current)")
    assert isinstance(node, Agg) and node.name == "SUM"
    assert node.body.path == ("Current",)


def test_comments_and_whitespace():
    node = parse_expr("1 +  // trailing words\n 2")
    assert node.op == "+"


def test_syntax_error_has_span_and_expected():
    with pytest.raises(ExprSyntaxError) as err:
        parse_expr("1 + ")
    assert err.value.span is not None
    assert err.value.expected
    with pytest.raises(ExprSyntaxError):
        parse_expr("a < b < c")
    with pytest.raises(ExprSyntaxError):
        parse_expr("[1..2..3]")
    with pytest.raises(ExprSyntaxError):
        parse_expr("5x")  # unknown unit


def test_spans_nested_and_ordered():
    src = "max(2, 3) >= 2.5"
    node = parse_expr(src)
    assert src[slice(*node.span)] == src
    assert src[slice(*node.lhs.span)] == "max(2, 3)"
    assert src[slice(*node.rhs.span)] == "2.5"

    def check(n):
        kids = [k for k in children(n) if k.span[0] != k.span[1]]
        for a, b in zip(kids, kids[1:]):
            assert a.span[1] <= b.span[0]  # siblings do not overlap
        for k in kids:
            assert n.span[0] <= k.span[0] and k.span[1] <= n.span[1]
            check(k)

    check(node)


# -- reference extraction -------------------------------------------------------

def test_extract_references_source_order():
    occ = extract_references(parse_expr("MaxLoadCurrent >= Vehicle.TotalCurrent"))
    assert [o.path for o in occ] == [("MaxLoadCurrent",),
                                     ("Vehicle", "TotalCurrent")]


def test_extract_references_literal_only():
    assert extract_references(parse_expr("5A")) == []


def test_extract_references_inside_time_argument():
    occ = extract_references(parse_expr("A(T - years(2))"))
    assert [o.path for o in occ] == [("A",)]
    nested = extract_references(parse_expr("A(B.Start(T))"))
    assert [o.path for o in nested] == [("A",), ("B", "Start")]


# -- round trip over a generated corpus ------------------------------------------

class _Gen:
    """Random well-formed expression source generator."""

    def __init__(self, seed):
        self.rng = random.Random(seed)

    def name(self):
        return self.rng.choice("a b c x y z Alpha Beta load Cur_rent".split())

    def number(self):
        if self.rng.random() < 0.5:
            return str(self.rng.randint(0, 500))
        return f"{self.rng.uniform(0.01, 99):.3f}"

    def atom(self, depth):
        roll = self.rng.random()
        if roll < 0.22:
            unit = self.rng.choice(["", "A", "V", "W", "m", "mA", "kW"])
            return self.number() + unit
        if roll < 0.3:
            return self.rng.choice(["true", "false", "maybe", "inf", "T"])
        if roll < 0.38:
            mon = self.rng.choice(["Jan", "Jun", "Dec"])
            return f"{mon}{self.rng.randint(2000, 2099)}"
        if roll < 0.48:
            return f"months({self.number()})"
        if roll < 0.56:
            path = ".".join(self.name() for _ in range(self.rng.randint(1, 3)))
            if self.rng.random() < 0.3:
                return f"{path}(T)"
            return path
        if depth <= 0:
            return self.number()
        if roll < 0.64:
            return f"[{self.expr(depth - 1)} .. {self.expr(depth - 1)}]"
        if roll < 0.72:
            fn = self.rng.choice(["sin", "sqrt", "num", "min", "max"])
            n = 1 if fn in ("sin", "sqrt", "num") else self.rng.randint(1, 3)
            args = ", ".join(self.expr(depth - 1) for _ in range(n))
            return f"{fn}({args})"
        if roll < 0.8:
            agg = self.rng.choice(["SUM", "AND", "UNION"])
            return f"{agg}({self.expr(depth - 1)})"
        return f"({self.expr(depth - 1)})"

    def expr(self, depth):
        if depth <= 0:
            return self.atom(0)
        roll = self.rng.random()
        if roll < 0.12:
            return (f"if {self.expr(depth - 1)} then {self.expr(depth - 1)} "
                    f"else {self.expr(depth - 1)}")
        if roll < 0.3:
            op = self.rng.choice(["&", "|"])
            return f"{self.atom(depth - 1)} {op} {self.atom(depth - 1)}"
        if roll < 0.45:
            op = self.rng.choice(["<", "<=", ">", ">=", "=", "!="])
            return f"{self.atom(depth - 1)} {op} {self.atom(depth - 1)}"
        if roll < 0.75:
            op = self.rng.choice(["+", "-", "*", "/", "^"])
            return f"{self.atom(depth - 1)} {op} {self.atom(depth - 1)}"
        if roll < 0.83:
            return f"!{self.atom(depth - 1)}"
        if roll < 0.9:
            return f"-{self.atom(depth - 1)}"
        return self.atom(depth)


def test_render_parse_round_trip_corpus():
    gen = _Gen(20210614)
    for _ in range(10_000):
        src = gen.expr(3)
        try:
            tree = parse_expr(src)
        except ExprSyntaxError:
            # the generator can juxtapose a number and a name ("2 x" etc.)
            continue
        rendered = render(tree)
        again = parse_expr(rendered)
        assert again == tree, f"{src!r} -> {rendered!r}"
        assert render(again) == rendered


def test_parse_is_total_on_garbage():
    rng = random.Random(99)
    alphabet = string.printable
    for _ in range(500):
        src = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 60)))
        try:
            parse_expr(src)
        except ExprSyntaxError:
            pass  # one of exactly two outcomes


def test_tokenizer_dotdot_vs_decimal():
    kinds = [(t.kind, t.text) for t in tokenize("[1..2.5]")]
    assert ("num", "1") in kinds and ("num", "2.5") in kinds
    assert ("op", "..") in kinds
