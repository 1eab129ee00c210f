import json

import pytest
from click.testing import CliRunner

from stripdef import cli


@pytest.fixture
def runner():
    return CliRunner()


def _invoke(runner, args):
    return runner.invoke(cli.main, args, catch_exceptions=False)


def test_gen_and_margulis(runner, tmp_path):
    rep, dfn = tmp_path / "rep.json", tmp_path / "def.json"
    r = _invoke(runner, ["gen", "--n", "1", "--out", str(rep), "--def-out", str(dfn)])
    assert r.exit_code == 0, r.output
    data = json.loads(rep.read_text())
    assert data["n"] == 1 and "schottky" in data
    csv = tmp_path / "alpha.csv"
    r = _invoke(runner, ["margulis", "--rep", str(rep), "--def", str(dfn), "--max-len", "3",
                         "--csv-out", str(csv)])
    assert r.exit_code == 0, r.output
    assert csv.read_text().startswith("word,length,t,alpha,ratio")


def test_margulis_controls(runner):
    r = _invoke(runner, ["margulis", "--n", "1", "--max-len", "3", "--coboundary"])
    assert r.exit_code == 0, r.output
    r = _invoke(runner, ["margulis", "--n", "1", "--max-len", "3", "--corrupt", "1"])
    assert r.exit_code == 2


def test_semigroup(runner, tmp_path):
    out = tmp_path / "sg.json"
    r = _invoke(runner, ["semigroup", "--n", "1", "--trials", "50", "--out", str(out)])
    assert r.exit_code == 0, r.output
    assert json.loads(out.read_text())["status"] == "PASS"


def test_domain_and_tile(runner, tmp_path):
    out = tmp_path / "dom.json"
    r = _invoke(runner, ["domain", "--n", "1", "--check-disjoint", "--samples", "100", "--out", str(out)])
    assert r.exit_code == 0, r.output
    tiles = tmp_path / "tiles.json"
    r = _invoke(runner, ["tile", "--n", "1", "--points", "100", "--out", str(tiles)])
    assert r.exit_code == 0, r.output
    assert json.loads(tiles.read_text())["located"] == 100


def test_mesh(runner, tmp_path):
    out = tmp_path / "plane.obj"
    r = _invoke(runner, ["mesh", "--n", "1", "--arc", "a", "--out", str(out)])
    assert r.exit_code == 0, r.output
    text = out.read_text()
    assert text.count("\nf ") == 8


def test_mesh_rejects_higher_rank(runner, tmp_path):
    r = _invoke(runner, ["mesh", "--n", "2", "--arc", "a", "--out", str(tmp_path / "x.obj")])
    assert r.exit_code == 4


def test_config_errors(runner, tmp_path):
    bad = tmp_path / "cfg.json"
    bad.write_text(json.dumps({"n": 1, "bogus": 3}))
    assert _invoke(runner, ["run", "--config", str(bad)]).exit_code == 4
    bad.write_text(json.dumps({"n": 0}))
    assert _invoke(runner, ["run", "--config", str(bad)]).exit_code == 4
    assert _invoke(runner, ["--eps-sign", "-1", "semigroup", "--n", "1"]).exit_code == 4
    assert _invoke(runner, ["margulis", "--n", "1", "--scales", "1,-2"]).exit_code == 4


def test_run_is_deterministic(runner, tmp_path):
    cfg = tmp_path / "cfg.json"
    outputs = []
    for k in range(2):
        out = tmp_path / f"out{k}"
        cfg.write_text(json.dumps({"n": 1, "max_len": 3, "disjoint_samples": 50, "tile_points": 50,
                                   "out_dir": str(out)}))
        r = _invoke(runner, ["run", "--config", str(cfg)])
        assert r.exit_code == 0, r.output
        outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.name != "report.json"})
    assert outputs[0] == outputs[1]
    assert {"rep.json", "def.json", "alpha.csv", "domain.json", "tiles.json"} <= set(outputs[0])
