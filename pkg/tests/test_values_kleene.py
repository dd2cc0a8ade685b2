"""Three-valued logic: the nine documented table rows, full closure over all
3^3 triples, and the comparison semantics that feed it."""

import itertools

import pytest

from roadmapdsl.errors import EvalTypeError
from roadmapdsl.units import parse_unit
from roadmapdsl.values import (
    FALSE,
    MAYBE,
    TRUE,
    NumInterval,
    Ternary,
    apply_function,
    compare,
    kleene,
    kleene_and,
    kleene_not,
    kleene_or,
)

M = parse_unit("m")


def ivl(lo, hi, unit=None):
    return NumInterval.make(lo, hi, unit) if unit else NumInterval.make(lo, hi)


# the full table: (A, B, !A, A & B, A | B)
TABLE = [
    (FALSE, MAYBE, TRUE, FALSE, MAYBE),
    (MAYBE, FALSE, MAYBE, FALSE, MAYBE),
    (TRUE, MAYBE, FALSE, MAYBE, TRUE),
    (MAYBE, TRUE, MAYBE, MAYBE, TRUE),
    (MAYBE, MAYBE, MAYBE, MAYBE, MAYBE),
    # classical rows for completeness
    (TRUE, TRUE, FALSE, TRUE, TRUE),
    (TRUE, FALSE, FALSE, FALSE, TRUE),
    (FALSE, TRUE, TRUE, FALSE, TRUE),
    (FALSE, FALSE, TRUE, FALSE, FALSE),
]


@pytest.mark.parametrize("a,b,not_a,a_and_b,a_or_b", TABLE)
def test_truth_table_rows(a, b, not_a, a_and_b, a_or_b):
    assert kleene_not(a) is not_a
    assert kleene_and(a, b) is a_and_b
    assert kleene_or(a, b) is a_or_b


def test_kleene_dispatch():
    assert kleene("!", MAYBE) is MAYBE
    assert kleene("&", TRUE, MAYBE) is MAYBE
    assert kleene("|", FALSE, MAYBE) is MAYBE


PROPER = (TRUE, FALSE, MAYBE)


def test_closure_commutativity_associativity_exhaustive():
    for a, b, c in itertools.product(PROPER, repeat=3):
        for op in (kleene_and, kleene_or):
            assert op(a, b) in PROPER
            assert op(a, b) is op(b, a)
            assert op(a, op(b, c)) is op(op(a, b), c)
        assert kleene_not(kleene_not(a)) is a


def _rank(t):
    return {FALSE: 0, MAYBE: 1, TRUE: 2}[t]


def test_monotone_in_truth_order():
    # false < maybe < true; & and | are monotone in both arguments
    for a, b, b2 in itertools.product(PROPER, repeat=3):
        if _rank(b) <= _rank(b2):
            assert _rank(kleene_and(a, b)) <= _rank(kleene_and(a, b2))
            assert _rank(kleene_or(a, b)) <= _rank(kleene_or(a, b2))


def test_tainted_boolean_absorbs():
    for a in PROPER:
        assert kleene_and(a, Ternary.TAINTED) is Ternary.TAINTED
        assert kleene_or(Ternary.TAINTED, a) is Ternary.TAINTED
    assert kleene_not(Ternary.TAINTED) is Ternary.TAINTED


# -- comparison semantics ------------------------------------------------------

def test_compare_overlapping_equality_is_maybe():
    assert compare("==", ivl(1, 3), ivl(0, 2)) is MAYBE


def test_compare_meters_example_is_true():
    assert compare("<=", ivl(-2, 1, M), ivl(5, 6, M)) is TRUE


def test_compare_single_point_equality():
    assert compare("==", ivl(2, 2, M), ivl(2, 2, M)) is TRUE
    assert compare("==", ivl(2, 2, M), ivl(3, 3, M)) is FALSE
    assert compare("==", ivl(0, 12, M), ivl(2, 2, M)) is MAYBE
    assert compare("==", ivl(0, 12, M), ivl(13, 14, M)) is FALSE


def test_compare_strictness_cases():
    assert compare("<", ivl(0, 1), ivl(1, 2)) is MAYBE
    assert compare("<=", ivl(0, 1), ivl(1, 2)) is TRUE
    assert compare(">", ivl(3, 4), ivl(1, 2)) is TRUE
    assert compare(">=", ivl(0, 5), ivl(6, 7)) is FALSE
    assert compare("!=", ivl(1, 1), ivl(1, 1)) is FALSE
    assert compare("!=", ivl(1, 1), ivl(2, 2)) is TRUE
    assert compare("!=", ivl(0, 2), ivl(1, 3)) is MAYBE


def test_compare_point_soundness():
    import random
    rng = random.Random(11)
    ops = ("<", "<=", ">", ">=", "==", "!=")
    pyop = {"<": lambda x, y: x < y, "<=": lambda x, y: x <= y,
            ">": lambda x, y: x > y, ">=": lambda x, y: x >= y,
            "==": lambda x, y: x == y, "!=": lambda x, y: x != y}
    for _ in range(300):
        a = ivl(*sorted(rng.uniform(-5, 5) for _ in range(2)))
        b = ivl(*sorted(rng.uniform(-5, 5) for _ in range(2)))
        for op in ops:
            out = compare(op, a, b)
            if out is MAYBE:
                continue
            for _ in range(8):
                x = rng.uniform(a.lo, a.hi)
                y = rng.uniform(b.lo, b.hi)
                assert pyop[op](x, y) is (out is TRUE)


def test_compare_rejects_booleans():
    with pytest.raises(EvalTypeError):
        compare("==", TRUE, FALSE)


# -- num(): boolean to number --------------------------------------------------

def test_num_conversion():
    one = apply_function("num", [TRUE])
    zero = apply_function("num", [FALSE])
    rng = apply_function("num", [MAYBE])
    assert (one.lo, one.hi) == (1, 1)
    assert (zero.lo, zero.hi) == (0, 0)
    assert (rng.lo, rng.hi) == (0, 1)
