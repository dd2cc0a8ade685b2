"""Local soundness of the symbolic rule families: simplification never
changes (or only widens) the evaluated value of a random well-typed
expression, across random point and interval environments."""

import random

import pytest

from roadmapdsl.expr import Binary, Call, Cond, Lit, RefExpr, TimeSym, render
from roadmapdsl.lowering import Reference
from roadmapdsl.solver import _EvalEnv, eval_expr, simplify, substitute_time
from roadmapdsl.typecheck import BOOL, num_type
from roadmapdsl.values import (
    NumInterval,
    Ternary,
    contains,
    is_tainted,
    parse_month_literal,
)

T0 = parse_month_literal("Jan2030")
REFS = [Reference(f"r{i}", ("prop", "v")) for i in range(4)]
BREFS = [Reference(f"b{i}", ("prop", "v")) for i in range(2)]
TYPES = {**{r: num_type() for r in REFS}, **{r: BOOL for r in BREFS}}


class _ExprGen:
    """Well-typed random numeric/boolean expressions over a few references."""

    def __init__(self, rng):
        self.rng = rng

    def num(self, depth) -> object:
        roll = self.rng.random()
        if depth <= 0 or roll < 0.25:
            if self.rng.random() < 0.5:
                return Lit(value=NumInterval.point(self.rng.randint(-9, 9)))
            return RefExpr(ref=self.rng.choice(REFS), time=TimeSym())
        if roll < 0.6:
            return Binary(op=self.rng.choice(["+", "-", "*"]),
                          lhs=self.num(depth - 1), rhs=self.num(depth - 1))
        if roll < 0.75:
            return Call(name=self.rng.choice(["min", "max"]),
                        args=(self.num(depth - 1), self.num(depth - 1)))
        if roll < 0.85:
            # shapes that exercise merging and raising/lowering
            shared = self.num(depth - 1)
            return Binary(op="+", lhs=shared, rhs=shared)
        return Cond(cond=self.boolean(depth - 1), then=self.num(depth - 1),
                    els=self.num(depth - 1))

    def boolean(self, depth) -> object:
        roll = self.rng.random()
        if depth <= 0 or roll < 0.3:
            if self.rng.random() < 0.4:
                return Lit(value=self.rng.choice(
                    [Ternary.TRUE, Ternary.FALSE]))
            return RefExpr(ref=self.rng.choice(BREFS), time=TimeSym())
        if roll < 0.6:
            return Binary(op=self.rng.choice(["&", "|"]),
                          lhs=self.boolean(depth - 1),
                          rhs=self.boolean(depth - 1))
        return Binary(op=self.rng.choice(["<", "<=", ">", ">=", "="]),
                      lhs=self.num(depth - 1), rhs=self.num(depth - 1))


def _env(rng, points: bool) -> _EvalEnv:
    bounds = {}
    for r in REFS:
        if points:
            x = rng.randint(-9, 9)
            bounds[r] = NumInterval.point(float(x))
        else:
            lo, hi = sorted(rng.randint(-9, 9) for _ in range(2))
            bounds[r] = NumInterval.make(float(lo), float(hi))
    for r in BREFS:
        choices = [Ternary.TRUE, Ternary.FALSE] if points else \
            [Ternary.TRUE, Ternary.FALSE, Ternary.MAYBE]
        bounds[r] = rng.choice(choices)
    return _EvalEnv(bounds=bounds, t=float(T0), ref_types=TYPES)


@pytest.mark.parametrize("points", [True, False])
def test_simplify_preserves_value_under_random_environments(points):
    rng = random.Random(4242 if points else 2424)
    gen = _ExprGen(rng)
    for _ in range(120):
        expr = gen.num(3) if rng.random() < 0.7 else gen.boolean(3)
        expr = substitute_time(expr, float(T0))  # as the solver does
        simplified = simplify(expr, TYPES)
        for _ in range(100):
            env = _env(rng, points)
            original = eval_expr(expr, env)
            after = eval_expr(simplified, env)
            if points:
                # definite environments: the value must be identical
                assert after == original, \
                    f"{render(expr)} -> {render(simplified)}"
            else:
                # interval environments: simplification may only be equal or
                # tighter than the naive evaluation, never outside it
                assert is_tainted(original) or contains(original, after) \
                    or after == original, \
                    f"{render(expr)} -> {render(simplified)}"
