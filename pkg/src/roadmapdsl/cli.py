"""Command line interface.

Subcommands: ``check`` (parse + validate + typecheck), ``solve`` (bounds at
one month, optionally the constraint listing or a trace), ``sweep`` (value
curves and availability classification over a month range), and ``serve``
(the HTTP API plus the bundled browser UI).

Exit codes: 0 ok, 1 model/validation/type errors (diagnostics with spans on
stderr), 2 usage errors.
"""

from __future__ import annotations

import os
import pathlib
import sys

import click

from .analysis import DEFAULT_FROM, DEFAULT_TO, sweep as run_sweep
from .errors import RoadmapError
from .lowering import lower, render_constraints
from .model import parse_model
from .serialize import dumps, solve_json, sweep_csv, sweep_json
from .solver import Solver
from .values import display_value, parse_iso_month, render_iso_month


def _load(path: str):
    source = pathlib.Path(path).read_text()
    try:
        model = parse_model(source)
        system = lower(model)
    except RoadmapError as err:
        _diagnose(err, source, path)
        sys.exit(1)
    return model, system


def _diagnose(err: RoadmapError, source: str, path: str) -> None:
    click.echo(f"{path}: error: {err.message}", err=True)
    if err.span:
        start, end = err.span
        line = source.count("\n", 0, start) + 1
        col = start - (source.rfind("\n", 0, start) + 1) + 1
        snippet = source[start:end]
        click.echo(f"  at line {line}, column {col}: {snippet!r}", err=True)
    other = getattr(err, "other_span", None)
    if other:
        click.echo(f"  conflicting with offset {other[0]}..{other[1]}",
                   err=True)


def _parse_month_option(text: str, what: str) -> int:
    try:
        return parse_iso_month(text)
    except (ValueError, IndexError):
        raise click.UsageError(f"{what} must look like YYYY-MM, got {text!r}")


@click.group()
def main() -> None:
    """Analyze time-dependent technology roadmap models."""


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
def check(file: str) -> None:
    """Parse, validate, and typecheck a model file."""
    _load(file)
    click.echo(f"{file}: ok")


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--at", "at", required=True, metavar="YYYY-MM",
              help="The month to solve at.")
@click.option("--emit-constraints", is_flag=True,
              help="Print the generated constraint system and exit.")
@click.option("--trace", "trace_ref", metavar="REF",
              help="Print the model elements a reference's value depends on.")
@click.option("--json", "as_json", is_flag=True, help="JSON output.")
@click.option("--trace-rounds", is_flag=True,
              help="Dump per-round narrowing steps.")
@click.option("--max-rounds", default=50, show_default=True)
def solve(file, at, emit_constraints, trace_ref, as_json, trace_rounds,
          max_rounds) -> None:
    """Solve FILE at a fixed month and print the value bounds."""
    t = _parse_month_option(at, "--at")
    model, system = _load(file)
    if emit_constraints:
        click.echo(render_constraints(system))
        return
    solver = Solver(system, max_rounds=max_rounds,
                    keep_round_log=trace_rounds)
    result = solver.at(t)
    if trace_rounds and result.round_log:
        for line in result.round_log:
            click.echo(line, err=True)
    if trace_ref:
        try:
            ref = system.reference(trace_ref)
        except KeyError as err:
            raise click.UsageError(str(err))
        for element in sorted(result.trace(ref)):
            click.echo(element)
        return
    if as_json:
        ctx = run_sweep(system, DEFAULT_FROM, DEFAULT_TO, solver=solver) \
            if DEFAULT_FROM <= t <= DEFAULT_TO else None
        click.echo(dumps(solve_json(system, result, t, sweep_ctx=ctx)))
        return
    if not result.converged:
        click.echo(f"# not converged after {result.rounds} rounds; bounds "
                   f"are a safe superset", err=True)
    for ref in sorted(result.bounds, key=system.display):
        click.echo(f"{system.display(ref)} = "
                   f"{display_value(result.bounds[ref])}")


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--from", "from_", required=True, metavar="YYYY-MM")
@click.option("--to", required=True, metavar="YYYY-MM")
@click.option("--step", default=1, show_default=True, help="Months per step.")
@click.option("--csv", "as_csv", is_flag=True, help="CSV output.")
@click.option("--json", "as_json", is_flag=True, help="JSON output.")
def sweep(file, from_, to, step, as_csv, as_json) -> None:
    """Re-solve FILE monthly between two months."""
    lo = _parse_month_option(from_, "--from")
    hi = _parse_month_option(to, "--to")
    if lo > hi:
        raise click.UsageError("--from must not be after --to")
    if step < 1:
        raise click.UsageError("--step must be at least 1")
    model, system = _load(file)
    sw = run_sweep(system, lo, hi, step)
    if as_csv:
        click.echo(sweep_csv(system, sw), nl=False)
        return
    if as_json:
        click.echo(dumps(sweep_json(system, sw)))
        return
    # compact text: one availability strip per block
    palette = {"always": "A", "currently": "+", "not_yet": "y",
               "no_longer": "o", "maybe": "?", "never": "-"}
    width = max(len(system.short[b.id])
                for b in system.model.all_blocks())
    click.echo(f"{'':{width}}  {render_iso_month(sw.months[0])} .. "
               f"{render_iso_month(sw.months[-1])} (step {step})")
    from .analysis import availability_ref
    for block in system.model.all_blocks():
        cases = [sw.classify(availability_ref(block.id), m)
                 for m in sw.months]
        strip = "".join(palette[c] for c in cases)
        click.echo(f"{system.short[block.id]:{width}}  {strip}")


@main.command()
@click.argument("files", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--port", default=8000, show_default=True,
              help="Overridable with the PORT environment variable.")
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(files, port, host) -> None:
    """Serve the HTTP API (and UI) for one or more model files."""
    import uvicorn

    from .service import create_app

    sources = {}
    for f in files:
        sources[pathlib.Path(f).stem] = pathlib.Path(f).read_text()
    app = create_app(sources)
    uvicorn.run(app, host=host, port=int(os.environ.get("PORT", port)))


if __name__ == "__main__":
    main()
