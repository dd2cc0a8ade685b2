"""Time-sweep evaluation over a month grid.

A sweep re-solves the system at every sampled month (each sample equals a
standalone solve; samples are independent and could run in parallel) and
derives from the series:

* the six availability cases: always, currently, not_yet, no_longer,
  maybe, never;
* per-reference value curves;
* per-interface replacement timelines;
* month-over-month change flags used for trace coloring.

``always`` is reserved for elements whose availability constraint is the
literal ``true`` (no requirements or children influence it); a ``maybe``
sample counts as neither true nor false in the history tests, and a false
sample with satisfied samples both earlier and later classifies forward
looking as ``not_yet``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import RoadmapError
from .expr import Lit
from .lowering import ConstraintSystem, Reference
from .solver import SolveResult, Solver
from .values import (
    FALSE,
    MAYBE,
    TRUE,
    Ternary,
    Value,
    display_value,
    parse_month_literal,
    render_iso_month,
)

DEFAULT_FROM = parse_month_literal("Jan2021")
DEFAULT_TO = parse_month_literal("Jan2040")

CASES = ("always", "currently", "not_yet", "no_longer", "maybe", "never")


@dataclass
class Sweep:
    system: ConstraintSystem
    months: list[int]
    results: list[SolveResult]
    solver: Solver
    step: int = 1
    _structural: dict[Reference, bool] = field(default_factory=dict,
                                               repr=False)

    def index_of(self, t: int) -> int:
        if t not in self.months:
            raise RoadmapError(f"{render_iso_month(t)} is outside the sweep")
        return self.months.index(t)

    def series(self, ref: Reference) -> list[Value]:
        return [r.bounds[ref] for r in self.results]

    def structurally_true(self, ref: Reference) -> bool:
        if ref not in self._structural:
            c = self.system.by_lhs().get(ref)
            self._structural[ref] = (
                c is not None and isinstance(c.rhs, Lit)
                and c.rhs.value is TRUE)
        return self._structural[ref]

    def classify(self, ref: Reference, t: int) -> str:
        """Availability case of a block's ?availability or a requirement
        reference at month t."""
        return classify(self.series(ref), self.index_of(t),
                        self.structurally_true(ref))

    def changed_since_previous(self, ref: Reference, t: int) -> bool:
        """True iff the displayed bounds differ between t-1 and t."""
        if t - 1 < self.months[0]:
            raise RoadmapError("no previous month inside the sweep")
        now = self.solver.at(t).bounds[ref]
        before = self.solver.at(t - 1).bounds[ref]
        return display_value(now) != display_value(before)


def classify(series: list[Ternary], idx: int,
             structurally_true: bool = False) -> str:
    """The six availability cases over a ternary series."""
    if not 0 <= idx < len(series):
        raise RoadmapError("sample index outside the sweep")
    now = series[idx]
    if structurally_true and all(v is TRUE for v in series):
        return "always"
    if now is TRUE:
        return "currently"
    if now is MAYBE:
        return "maybe"
    # now is false (or tainted): look at the history, maybe counts as neither
    if any(v is TRUE for v in series[idx + 1:]):
        return "not_yet"
    if any(v is TRUE for v in series[:idx]):
        return "no_longer"
    return "never"


def sweep(system: ConstraintSystem, from_month: int = DEFAULT_FROM,
          to_month: int = DEFAULT_TO, step: int = 1,
          solver: Optional[Solver] = None) -> Sweep:
    """Solve at every sampled month in [from_month, to_month]."""
    if from_month > to_month:
        raise RoadmapError("sweep range is empty (from > to)")
    if step < 1:
        raise RoadmapError("sweep step must be at least 1 month")
    solver = solver or Solver(system)
    months = list(range(int(from_month), int(to_month) + 1, step))
    results = [solver.at(t) for t in months]
    return Sweep(system=system, months=months, results=results,
                 solver=solver, step=step)


def availability_ref(block_id: str) -> Reference:
    return Reference(block_id, ("avail",))


def replacement_ref(block_id: str) -> Reference:
    return Reference(block_id, ("repl",))


def requirement_refs(system: ConstraintSystem,
                     block_id: str) -> list[Reference]:
    return [c.lhs for c in system.constraints
            if c.lhs.block == block_id and c.lhs.kind[0] == "req"]
