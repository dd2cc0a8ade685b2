"""Model parsing, structural validation, and the inheritance set functions,
including a brute-force closure oracle on random implementation DAGs."""

import random

import pytest

from roadmapdsl.errors import ValidationError
from roadmapdsl.model import (
    allimpls,
    allprops,
    allreqs,
    impls,
    interfaces,
    parse_model,
)

FUSE_BLOCK_NAMES = {
    "AutonomousDriving", "Vehicle", "Headlights", "DetectionSoftware",
    "Autopilot", "ProcessingUnits", "Fuse", "PowerSupply", "ErrorDetection",
    "BlFuse", "EFuse",
}


def test_fuse_block_inventory(fuse_model):
    names = {b.name for b in fuse_model.all_blocks()}
    assert names == FUSE_BLOCK_NAMES
    vehicle = fuse_model.block("Vehicle")
    assert [c.name for c in vehicle.children] == [
        "Headlights", "DetectionSoftware", "Autopilot", "ProcessingUnits",
        "Fuse"]
    assert fuse_model.block("Vehicle.Fuse").children == []


def test_empty_model():
    m = parse_model("model M {}")
    assert m.name == "M" and m.blocks == []


def test_implements_cycle_rejected():
    src = """model M {
      block A implements B { }
      block B implements A { }
    }"""
    with pytest.raises(ValidationError):
        parse_model(src)


def test_duplicate_sibling_names_rejected():
    with pytest.raises(ValidationError):
        parse_model("model M { block A {} block A {} }")
    with pytest.raises(ValidationError):
        parse_model("model M { block A { prop P = 1 prop P = 2 } }")
    with pytest.raises(ValidationError):
        parse_model("model M { block A { prop B = 1 block B {} } }")


def test_unresolved_implements_target():
    with pytest.raises(ValidationError):
        parse_model("model M { block A implements Nope { } }")


def test_impls_and_interfaces(fuse_model):
    fuse = fuse_model.block("Vehicle.Fuse")
    assert [b.name for b in impls(fuse_model, fuse)] == ["BlFuse", "EFuse"]
    assert [b.name for b in interfaces(fuse_model)] == ["Fuse"]
    assert allimpls(fuse_model, fuse) == impls(fuse_model, fuse)


def test_allimpls_transitive_chain():
    src = """model M {
      block A {}
      block B implements A {}
      block C implements B {}
    }"""
    m = parse_model(src)
    assert [b.name for b in allimpls(m, m.block("A"))] == ["B", "C"]


def test_allprops_of_blfuse(fuse_model):
    blfuse = fuse_model.block("BlFuse")
    names = [p.name for p in allprops(fuse_model, blfuse)]
    # inherited BatteryVoltage first, then the local overrides
    assert names == ["BatteryVoltage", "MaxLoadCurrent", "Watchdog"]
    by_name = {p.name: p for p in allprops(fuse_model, blfuse)}
    assert by_name["BatteryVoltage"].element_id == "Vehicle.Fuse.BatteryVoltage"
    assert by_name["MaxLoadCurrent"].element_id == "BlFuse.MaxLoadCurrent"


def test_allreqs_of_blfuse_inherited(fuse_model):
    blfuse = fuse_model.block("BlFuse")
    reqs = allreqs(fuse_model, blfuse)
    assert len(reqs) == 1
    assert reqs[0].source == "MaxLoadCurrent >= Vehicle.TotalCurrent"
    efuse_reqs = allreqs(fuse_model, fuse_model.block("EFuse"))
    assert len(efuse_reqs) == 2
    assert efuse_reqs[0].element_id == "Vehicle.Fuse/req1"  # inherited first


def test_block_without_impls_allprops_is_props(fuse_model):
    headlights = fuse_model.block("Vehicle.Headlights")
    assert allprops(fuse_model, headlights) == headlights.props


def test_kpis_never_inherited(fuse_model):
    assert fuse_model.block("BlFuse").kpis == []
    assert fuse_model.block("EFuse").kpis == []
    assert len(fuse_model.block("Vehicle.Fuse").kpis) == 1


def test_children_not_inherited():
    src = """model M {
      block A { block Inner {} }
      block B implements A {}
    }"""
    m = parse_model(src)
    assert m.block("B").children == []


def test_diamond_first_interface_wins():
    src = """model M {
      block A { prop P = 1 }
      block B implements A { prop P = 2 }
      block C implements A { prop P = 3 }
      block D implements B, C {}
      block E implements C, B {}
    }"""
    m = parse_model(src)
    d = {p.name: p for p in allprops(m, m.block("D"))}
    assert d["P"].element_id == "B.P"
    e = {p.name: p for p in allprops(m, m.block("E"))}
    assert e["P"].element_id == "C.P"


def test_diamond_requirement_not_duplicated():
    src = """model M {
      block A { require true }
      block B implements A {}
      block C implements A {}
      block D implements B, C {}
    }"""
    m = parse_model(src)
    assert len(allreqs(m, m.block("D"))) == 1


# -- random DAG oracle ---------------------------------------------------------


def brute_force_props(m, block):
    """Name -> defining element id, by the recursive first-wins definition."""
    out = {}
    for p in block.props:
        out[p.name] = p.element_id
    inherited = {}
    for target in block.impl_targets:
        for name, eid in brute_force_props(m, m.by_id[target]).items():
            if name not in inherited:
                inherited[name] = eid
    for name, eid in inherited.items():
        if name not in out:
            out[name] = eid
    return out


def brute_force_reqs(m, block):
    out = {r.element_id for r in block.reqs}
    for target in block.impl_targets:
        out |= brute_force_reqs(m, m.by_id[target])
    return out


def random_dag_source(rng):
    n = rng.randint(2, 8)
    lines = [f"model R{rng.randint(0, 999)} {{"]
    for i in range(n):
        # only implement earlier blocks: guarantees a DAG
        targets = [f"B{j}" for j in range(i) if rng.random() < 0.4]
        impl = f" implements {', '.join(targets)}" if targets else ""
        lines.append(f"  block B{i}{impl} {{")
        for p in range(rng.randint(0, 3)):
            if rng.random() < 0.6:
                lines.append(f"    prop P{rng.randint(0, 3)} = {rng.randint(0, 9)}")
        if rng.random() < 0.5:
            lines.append("    require true")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines)


def test_allprops_allreqs_against_closure_oracle():
    rng = random.Random(4810)
    for _ in range(150):
        src = random_dag_source(rng)
        try:
            m = parse_model(src)
        except ValidationError:
            continue  # duplicate P names within a block
        for b in m.all_blocks():
            got_props = {p.name: p.element_id for p in allprops(m, b)}
            assert got_props == brute_force_props(m, b)
            got_reqs = {r.element_id for r in allreqs(m, b)}
            assert got_reqs == brute_force_reqs(m, b)


def test_short_names(fuse_model):
    short = fuse_model.short_names()
    assert short["Vehicle.Fuse"] == "Fuse"
    assert short["Vehicle.TotalCurrent" if False else "Vehicle"] == "Vehicle"
    assert short["BlFuse"] == "BlFuse"
