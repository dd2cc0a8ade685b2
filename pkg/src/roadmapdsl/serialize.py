"""One serializer for every external surface.

The CLI and the HTTP API share these builders, so their JSON output is
byte-identical for the same inputs: keys are emitted in sorted order and
numbers are rounded to 4 significant digits (display precision; internal
arithmetic stays full precision).  Infinite bounds serialize as null.
"""

from __future__ import annotations

import json
import math
from typing import Optional

from .analysis import Sweep, availability_ref, replacement_ref, requirement_refs
from .expr import extract_references, render
from .lowering import ConstraintSystem, Reference
from .model import KPI, Block, Model, Property, Requirement
from .solver import SolveResult, Solver
from .units import render_unit
from .values import (
    DateValue,
    DurationValue,
    NumInterval,
    Ternary,
    Value,
    render_iso_month,
)


def round4(x: float) -> Optional[float]:
    if math.isinf(x):
        return None
    return float(f"{x:.4g}")


def value_json(v: Value) -> dict:
    if isinstance(v, Ternary):
        return {"kind": "boolean", "value": v.value}
    if isinstance(v, NumInterval):
        out = {"kind": "number", "lower": round4(v.lo), "upper": round4(v.hi),
               "unit": render_unit(v.unit)}
        if v.tainted:
            out["tainted"] = True
        return out
    if isinstance(v, DateValue):
        out = {"kind": "date",
               "lower": None if math.isinf(v.lo) else render_iso_month(int(v.lo)),
               "upper": None if math.isinf(v.hi) else render_iso_month(int(v.hi))}
        if v.tainted:
            out["tainted"] = True
        return out
    out = {"kind": "duration", "lowerMonths": round4(v.lo),
           "upperMonths": round4(v.hi)}
    if v.tainted:
        out["tainted"] = True
    return out


def dumps(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"),
                      allow_nan=False)


# ---------------------------------------------------------------------------
# model serialization (with spans and reference lists for highlighting)
# ---------------------------------------------------------------------------


def _member_json(member) -> dict:
    if isinstance(member, Property):
        out = {"element": "property", "id": member.element_id,
               "name": member.name, "span": list(member.span)}
        if member.formula is not None:
            out["formula"] = member.source or render(member.formula)
            out["references"] = [
                {"path": ".".join(occ.path), "span": list(occ.span)}
                for occ in extract_references(member.formula)]
        else:
            out["declaredType"] = member.declared_type.render()
        return out
    if isinstance(member, Requirement):
        return {"element": "requirement", "id": member.element_id,
                "span": list(member.span),
                "condition": member.source or render(member.condition),
                "references": [
                    {"path": ".".join(occ.path), "span": list(occ.span)}
                    for occ in extract_references(member.condition)]}
    assert isinstance(member, KPI)
    return {"element": "kpi", "id": member.element_id,
            "span": list(member.span),
            "metric": member.source or render(member.metric),
            "references": [
                {"path": ".".join(occ.path), "span": list(occ.span)}
                for occ in extract_references(member.metric)]}


def _block_json(block: Block) -> dict:
    return {
        "id": block.id,
        "name": block.name,
        "implements": list(block.impl_targets),
        "members": [_member_json(m) for m in block.members],
        "children": [_block_json(c) for c in block.children],
    }


def model_json(model: Model, source: str = "") -> dict:
    return {
        "name": model.name,
        "source": source or model.source,
        "blocks": [_block_json(b) for b in model.blocks],
    }


# ---------------------------------------------------------------------------
# solve serialization
# ---------------------------------------------------------------------------


def solve_json(system: ConstraintSystem, result: SolveResult, t: int,
               sweep_ctx: Optional[Sweep] = None) -> dict:
    """Bounds plus per-block availability/replacement and, when a sweep is
    available, the six-case classification for colors."""
    values = {}
    for ref, bound in result.bounds.items():
        values[system.display(ref)] = value_json(bound)
    blocks = {}
    for block in system.model.all_blocks():
        avail = availability_ref(block.id)
        repl = replacement_ref(block.id)
        entry = {
            "availability": value_json(result.bounds[avail]),
            "replacement": value_json(result.bounds[repl]),
        }
        requirements = []
        for ref in requirement_refs(system, block.id):
            req_entry = {"reference": system.display(ref),
                         "value": value_json(result.bounds[ref])}
            if sweep_ctx is not None:
                req_entry["case"] = sweep_ctx.classify(ref, t)
            requirements.append(req_entry)
        if requirements:
            entry["requirements"] = requirements
        if sweep_ctx is not None:
            entry["case"] = sweep_ctx.classify(avail, t)
        repl_bound = result.bounds[repl]
        if isinstance(repl_bound, NumInterval) and repl_bound.is_point \
                and repl_bound.lo >= 1:
            from .model import allimpls
            impl_list = allimpls(system.model, block)
            idx = int(repl_bound.lo) - 1
            if 0 <= idx < len(impl_list):
                entry["selected"] = impl_list[idx].id
        blocks[block.id] = entry
    return {
        "t": render_iso_month(t),
        "converged": result.converged,
        "rounds": result.rounds,
        "values": values,
        "blocks": blocks,
    }


def trace_json(system: ConstraintSystem, result: SolveResult, ref: Reference,
               t: int, sweep_ctx: Optional[Sweep] = None) -> dict:
    elements = sorted(result.trace(ref))
    changed = {}
    if sweep_ctx is not None and t - 1 >= sweep_ctx.months[0]:
        for ref2 in result.bounds:
            key = system.display(ref2)
            try:
                changed[key] = sweep_ctx.changed_since_previous(ref2, t)
            except Exception:
                continue
    return {
        "reference": system.display(ref),
        "t": render_iso_month(t),
        "value": value_json(result.bounds[ref]),
        "elements": elements,
        "changedSincePrevious": changed,
    }


# ---------------------------------------------------------------------------
# sweep serialization
# ---------------------------------------------------------------------------


def sweep_json(system: ConstraintSystem, sw: Sweep) -> dict:
    months = [render_iso_month(m) for m in sw.months]
    series = {}
    for ref in sorted(sw.results[0].bounds,
                      key=lambda r: system.display(r)):
        series[system.display(ref)] = [value_json(v) for v in sw.series(ref)]
    blocks = {}
    for block in system.model.all_blocks():
        avail = availability_ref(block.id)
        cases = [classify_at(sw, avail, i) for i in range(len(sw.months))]
        entry = {
            "availability": [v.value for v in sw.series(avail)],
            "cases": cases,
        }
        reqs = {}
        for ref in requirement_refs(system, block.id):
            reqs[system.display(ref)] = {
                "values": [v.value for v in sw.series(ref)],
                "cases": [classify_at(sw, ref, i)
                          for i in range(len(sw.months))],
            }
        if reqs:
            entry["requirements"] = reqs
        repl = sw.series(replacement_ref(block.id))
        if any(not (isinstance(v, NumInterval) and v.is_point and v.lo == -1)
               for v in repl):
            entry["replacement"] = [value_json(v) for v in repl]
        blocks[block.id] = entry
    return {
        "from": months[0],
        "to": months[-1],
        "step": sw.step,
        "months": months,
        "series": series,
        "blocks": blocks,
    }


def classify_at(sw: Sweep, ref: Reference, idx: int) -> str:
    from .analysis import classify
    return classify(sw.series(ref), idx, sw.structurally_true(ref))


def sweep_csv(system: ConstraintSystem, sw: Sweep) -> str:
    """Columns: monthISO, reference, lower, upper, unit, ternary, case."""
    import csv
    import io

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["month", "reference", "lower", "upper", "unit",
                     "ternary", "case"])
    refs = sorted(sw.results[0].bounds, key=lambda r: system.display(r))
    classified = {}
    for ref in refs:
        if ref.kind[0] in ("avail", "req"):
            classified[ref] = [classify_at(sw, ref, i)
                               for i in range(len(sw.months))]
    for i, month in enumerate(sw.months):
        iso = render_iso_month(month)
        for ref in refs:
            v = sw.results[i].bounds[ref]
            display = system.display(ref)
            case = classified.get(ref, [""] * len(sw.months))[i]
            if isinstance(v, Ternary):
                writer.writerow([iso, display, "", "", "", v.value, case])
            elif isinstance(v, NumInterval):
                writer.writerow([iso, display, _csv_num(v.lo), _csv_num(v.hi),
                                 render_unit(v.unit), "", case])
            elif isinstance(v, DateValue):
                writer.writerow([iso, display,
                                 render_iso_month(int(v.lo)) if not math.isinf(v.lo) else "",
                                 render_iso_month(int(v.hi)) if not math.isinf(v.hi) else "",
                                 "month", "", case])
            else:
                writer.writerow([iso, display, _csv_num(v.lo), _csv_num(v.hi),
                                 "months", "", case])
    return out.getvalue()


def _csv_num(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.4g}"
