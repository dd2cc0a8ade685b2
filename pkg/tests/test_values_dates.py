"""Date and duration arithmetic: the full typing table, positive and negative,
plus month/ISO conversions and rendering."""

import itertools

import pytest

from roadmapdsl.errors import EvalTypeError
from roadmapdsl.values import (
    TRUE,
    FALSE,
    DateValue,
    DurationValue,
    NumInterval,
    arith,
    compare,
    is_tainted,
    negate,
    parse_iso_month,
    parse_month_literal,
    render_iso_month,
    render_month,
    render_value,
)


def date(text):
    return DateValue.point(parse_month_literal(text))


def months(n):
    return DurationValue.point(n)


def num(x):
    return NumInterval.point(x)


def test_month_literal_round_trip():
    idx = parse_month_literal("Jan2021")
    assert idx == 2021 * 12
    assert render_month(idx) == "Jan2021"
    assert parse_month_literal("Dec2035") == 2035 * 12 + 11
    assert render_month(parse_month_literal("Feb2035")) == "Feb2035"


def test_iso_round_trip():
    assert parse_iso_month("2030-01") == 2030 * 12
    assert render_iso_month(2030 * 12) == "2030-01"
    assert render_iso_month(parse_iso_month("2026-12")) == "2026-12"


# -- the typing table, allowed rows -------------------------------------------

def test_date_plus_duration():
    out = arith("+", date("Jan2021"), months(5))
    assert out == date("Jun2021")


def test_date_minus_duration():
    assert arith("-", date("Jun2021"), months(5)) == date("Jan2021")


def test_duration_plus_date_commutes():
    assert arith("+", months(5), date("Jan2021")) == date("Jun2021")


def test_date_minus_date_is_duration():
    assert arith("-", date("Jun2021"), date("Jan2021")) == months(5)


def test_duration_plus_minus_duration():
    assert arith("+", months(2), months(3)) == months(5)
    assert arith("-", months(5), months(3)) == months(2)


def test_duration_times_number_both_ways():
    assert arith("*", months(2), num(3)) == months(6)
    assert arith("*", num(3), months(2)) == months(6)


def test_duration_divided_by_number():
    assert arith("/", months(6), num(3)) == months(2)


def test_date_comparisons():
    assert compare("<=", date("Jan2021"), date("Jun2021")) is TRUE
    assert compare("<=", months(4), months(2)) is FALSE


def test_interval_duration_shifts_date_to_interval():
    # Jan2022 + [months(12)..months(36)] covers Jan2023 through Jan2025
    dur = DurationValue.make(12, 36)
    out = arith("+", date("Jan2022"), dur)
    assert out == DateValue.make(parse_month_literal("Jan2023"),
                                 parse_month_literal("Jan2025"))
    assert render_value(out) == "[Jan2023..Jan2025]"


def test_interval_date_plus_interval_duration():
    out = arith("+", DateValue.make(parse_month_literal("Jan2022"),
                                    parse_month_literal("Mar2022")),
                DurationValue.make(1, 2))
    assert out.lo == parse_month_literal("Feb2022")
    assert out.hi == parse_month_literal("May2022")


# -- disallowed combinations, exhaustively ------------------------------------

KINDS = {
    "number": num(2),
    "date": date("Jan2021"),
    "duration": months(2),
}

ALLOWED = {
    ("date", "+", "duration"), ("date", "-", "duration"),
    ("duration", "+", "date"),
    ("date", "-", "date"),
    ("duration", "+", "duration"), ("duration", "-", "duration"),
    ("duration", "*", "number"), ("number", "*", "duration"),
    ("duration", "/", "number"),
    ("number", "+", "number"), ("number", "-", "number"),
    ("number", "*", "number"), ("number", "/", "number"),
    ("number", "^", "number"),
}


def test_typing_table_exhaustive():
    for ka, kb in itertools.product(KINDS, repeat=2):
        for op in ("+", "-", "*", "/", "^"):
            if (ka, op, kb) in ALLOWED:
                arith(op, KINDS[ka], KINDS[kb])  # must not raise
            else:
                with pytest.raises(EvalTypeError):
                    arith(op, KINDS[ka], KINDS[kb])


def test_date_date_comparable_duration_duration_comparable():
    compare("<", date("Jan2021"), date("Feb2021"))
    compare(">=", months(1), months(2))
    with pytest.raises(EvalTypeError):
        compare("<", date("Jan2021"), months(2))
    with pytest.raises(EvalTypeError):
        compare("<", months(2), num(2))


def test_negate_duration_but_not_date():
    assert negate(months(5)) == months(-5)
    with pytest.raises(EvalTypeError):
        negate(date("Jan2021"))


def test_taint_propagates_through_date_ops():
    bad = DurationValue(0, 0, tainted=True)
    assert is_tainted(arith("+", date("Jan2021"), bad))
    assert is_tainted(arith("-", DateValue(0, 0, tainted=True), date("Jan2021")))


def test_render_durations():
    assert render_value(months(5)) == "months(5)"
    assert render_value(DurationValue.make(12, 36)) == "[months(12)..months(36)]"
