"""CLI and HTTP API: subcommand behavior, exit codes, JSON determinism, and
the one-serializer guarantee (API solve == CLI solve)."""

import json

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from roadmapdsl.cli import main
from roadmapdsl.service import create_app

from conftest import FUSE_PATH


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def client(fuse_source):
    app = create_app({"fuse": fuse_source})
    return TestClient(app)


FUSE = str(FUSE_PATH)


# -- check ---------------------------------------------------------------------


def test_check_ok(runner):
    out = runner.invoke(main, ["check", FUSE])
    assert out.exit_code == 0


def test_check_reports_errors_with_span(runner, tmp_path):
    bad = tmp_path / "bad.rdm"
    bad.write_text("model M { block A { prop P = Nope + 1 } }")
    out = runner.invoke(main, ["check", str(bad)])
    assert out.exit_code == 1
    assert "error" in out.output and "line" in out.output


def test_usage_error_exit_code(runner):
    out = runner.invoke(main, ["solve", FUSE, "--at", "January"])
    assert out.exit_code == 2


# -- solve ----------------------------------------------------------------------


def test_solve_text_output(runner):
    out = runner.invoke(main, ["solve", FUSE, "--at", "2030-01"])
    assert out.exit_code == 0
    lines = dict(line.split(" = ", 1)
                 for line in out.output.strip().splitlines())
    assert lines["Fuse.?replacement"] == "1"
    assert lines["Vehicle.TotalCurrent"] == "49.64A"
    assert lines["Fuse.MaxLoadCurrent"] == "50A"
    assert lines["Fuse.?availability"] == "true"


def test_solve_emit_constraints_matches_lowering(runner, fuse_model):
    from roadmapdsl.lowering import lower, render_constraints
    out = runner.invoke(main, ["solve", FUSE, "--at", "2030-01",
                               "--emit-constraints"])
    assert out.exit_code == 0
    assert out.output.strip() == render_constraints(lower(fuse_model)).strip()


def test_solve_trace_lists_elements(runner):
    out = runner.invoke(main, ["solve", FUSE, "--at", "2030-01",
                               "--trace", "Vehicle.TotalCurrent"])
    assert out.exit_code == 0
    got = set(out.output.split())
    assert "Vehicle.DetectionSoftware.TFLOPS" in got
    assert "Vehicle.Headlights.Current" in got


def test_solve_json_deterministic(runner):
    first = runner.invoke(main, ["solve", FUSE, "--at", "2030-01", "--json"])
    second = runner.invoke(main, ["solve", FUSE, "--at", "2030-01", "--json"])
    assert first.exit_code == 0
    assert first.output == second.output  # byte identical


def test_trace_rounds_dump(runner):
    out = runner.invoke(main, ["solve", FUSE, "--at", "2030-01",
                               "--trace-rounds"])
    assert out.exit_code == 0
    assert "round 1" in out.output


# -- sweep ---------------------------------------------------------------------


def test_sweep_csv(runner):
    out = runner.invoke(main, ["sweep", FUSE, "--from", "2021-01",
                               "--to", "2026-01", "--csv"])
    assert out.exit_code == 0
    header, *rows = out.output.strip().splitlines()
    assert header == "month,reference,lower,upper,unit,ternary,case"
    total = [r for r in rows if r.startswith("2021-01,Vehicle.TotalCurrent")]
    assert total and total[0] == "2021-01,Vehicle.TotalCurrent,36.25,36.25,A,,"
    efuse = [r for r in rows if r.startswith("2021-01,EFuse.?availability")]
    assert efuse and efuse[0].endswith("false,not_yet")


def test_sweep_text_strip(runner):
    out = runner.invoke(main, ["sweep", FUSE, "--from", "2021-01",
                               "--to", "2030-01", "--step", "12"])
    assert out.exit_code == 0
    assert "Headlights" in out.output
    assert "EFuse" in out.output


def test_sweep_rejects_reversed_range(runner):
    out = runner.invoke(main, ["sweep", FUSE, "--from", "2030-01",
                               "--to", "2021-01"])
    assert out.exit_code == 2


# -- API ------------------------------------------------------------------------


def test_api_list_models(client):
    assert client.get("/api/models").json() == {"models": ["fuse"]}


def test_api_model_json_spans_and_references(client, fuse_source):
    body = client.get("/api/models/fuse").json()
    assert body["name"] == "Fuse"
    vehicle = next(b for b in body["blocks"] if b["name"] == "Vehicle")
    total = vehicle["members"][0]
    assert total["name"] == "TotalCurrent"
    lo, hi = total["span"]
    assert fuse_source[lo:hi] == "SUM(Current)"
    fuse_block = next(c for c in vehicle["children"] if c["name"] == "Fuse")
    req = next(m for m in fuse_block["members"]
               if m["element"] == "requirement")
    paths = [r["path"] for r in req["references"]]
    assert paths == ["MaxLoadCurrent", "Vehicle.TotalCurrent"]
    for occ in req["references"]:
        lo, hi = occ["span"]
        assert fuse_source[lo:hi] == occ["path"]


def test_api_solve_payload(client):
    body = client.get("/api/models/fuse/solve", params={"t": "2030-01"}).json()
    total = body["values"]["Vehicle.TotalCurrent"]
    assert total == {"kind": "number", "lower": 49.64, "upper": 49.64,
                     "unit": "A"}
    fuse = body["blocks"]["Vehicle.Fuse"]
    assert fuse["availability"] == {"kind": "boolean", "value": "true"}
    assert fuse["selected"] == "BlFuse"
    assert fuse["replacement"]["lower"] == 1
    efuse = body["blocks"]["EFuse"]
    assert efuse["case"] == "no_longer"
    req_cases = {r["reference"]: r["case"] for r in efuse["requirements"]}
    assert req_cases["EFuse.?requirement1"] == "no_longer"
    assert req_cases["EFuse.?requirement2"] == "currently"


def test_api_solve_equals_cli_solve(client, runner):
    cli_out = runner.invoke(main, ["solve", FUSE, "--at", "2030-01", "--json"])
    api_body = client.get("/api/models/fuse/solve",
                          params={"t": "2030-01"}).content.decode()
    assert json.loads(cli_out.output) == json.loads(api_body)


def test_api_trace(client):
    body = client.get("/api/models/fuse/trace",
                      params={"ref": "Fuse.MaxLoadCurrent",
                              "t": "2030-01"}).json()
    assert "EFuse/req1" in body["elements"]
    assert "Vehicle.TotalCurrent" in body["elements"]
    changed = body["changedSincePrevious"]
    assert changed["Vehicle.TotalCurrent"] is True
    assert changed["BlFuse.MaxLoadCurrent"] is False


def test_api_sweep(client):
    body = client.get("/api/models/fuse/sweep",
                      params={"from": "2021-01", "to": "2026-01"}).json()
    assert body["months"][0] == "2021-01" and body["months"][-1] == "2026-01"
    efuse = body["blocks"]["EFuse"]
    assert efuse["cases"][0] == "not_yet"
    current = body["series"]["ProcessingUnits.Current"]
    assert current[0]["lower"] == 31.25


def test_api_errors(client):
    assert client.get("/api/models/nope").status_code == 404
    assert client.get("/api/models/fuse/solve",
                      params={"t": "monday"}).status_code == 400
    assert client.get("/api/models/fuse/sweep",
                      params={"from": "2030-01",
                              "to": "2021-01"}).status_code == 400
    assert client.get("/api/models/fuse/trace",
                      params={"ref": "No.Such", "t": "2030-01"}
                      ).status_code == 404


def test_api_put_source_validates_and_swaps(fuse_source):
    app = create_app({"fuse": fuse_source})
    c = TestClient(app)
    bad = c.put("/api/models/fuse/source",
                content="model M { block A { prop P = Nope } }")
    assert bad.status_code == 422
    assert "error" in bad.json()
    # still the old model
    assert c.get("/api/models/fuse").json()["name"] == "Fuse"
    ok = c.put("/api/models/fuse/source",
               content="model Tiny { block Solo { prop P = 1 } }")
    assert ok.status_code == 200
    body = c.get("/api/models/fuse").json()
    assert body["name"] == "Tiny"
    solved = c.get("/api/models/fuse/solve", params={"t": "2030-01"}).json()
    assert solved["values"]["Solo.P"]["lower"] == 1
    assert c.put("/api/models/unknown/source", content="x").status_code == 404
