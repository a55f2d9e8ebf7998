import json

import pytest
from click.testing import CliRunner

from pwlab import __version__
from pwlab import serialization as se
from pwlab.cli import main


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def workspace(tmp_path):
    (tmp_path / "square.json").write_text(json.dumps({"kind": "BoxN", "half_widths": [1.0, 1.0]}))
    (tmp_path / "disc.json").write_text(json.dumps({"kind": "Disc2D", "radius": 1.0}))
    return tmp_path


def invoke(runner, *args):
    result = runner.invoke(main, [str(a) for a in args], catch_exceptions=False)
    return result


def test_version(runner):
    result = invoke(runner, "--version")
    assert result.exit_code == 0 and __version__ in result.output


def test_weight_table(runner, workspace):
    out = workspace / "w.csv"
    assert invoke(runner, "weight", "--domain", workspace / "disc.json", "--grid", 9, "--out", out).exit_code == 0
    header, rows = se.read_csv(out)
    assert header.startswith("# pwlab")
    assert len(rows) == 81
    assert max(float(r[list(r)[-1]]) for r in rows) == pytest.approx(1.0)


def test_levelsets_are_reproducible(runner, workspace):
    args = ["levelsets", "--domain", workspace / "square.json", "--jmax", 4, "--samples", 5000, "--seed", 4]
    invoke(runner, *args, "--out", workspace / "a.csv")
    invoke(runner, *args, "--out", workspace / "b.csv")
    assert (workspace / "a.csv").read_bytes() == (workspace / "b.csv").read_bytes()


def test_pipeline_decompose_partition_symbol_besov_hankel(runner, workspace):
    dec, pou, sym = workspace / "dec.json", workspace / "pou.npz", workspace / "sym.npz"
    assert invoke(runner, "decompose", "--domain", workspace / "square.json", "--jmax", 3, "--out", dec).exit_code == 0
    result = invoke(runner, "partition", "--dec", dec, "--grid", 48, "--out", pou)
    assert result.exit_code == 0
    assert json.loads(result.output)["checks"]["sum_error"] < 1e-8
    assert invoke(runner, "symbol", "--domain", workspace / "square.json", "--spacing", 0.05, "--seed", 2,
                  "--modes", 6, "--out", sym).exit_code == 0
    result = invoke(runner, "besov", "--symbol", sym, "--pou", pou, "--s", 0.5, "--p", 2, "--q", 2,
                    "--out", workspace / "b.json")
    assert result.exit_code == 0 and json.loads(result.output)["value"] > 0
    result = invoke(runner, "hankel", "--domain", workspace / "square.json", "--symbol", sym, "--h", 0.2,
                    "--p", 1, "--p", 2, "--out", workspace / "h.json")
    report = json.loads(result.output)
    assert report["schatten"]["2"] ** 2 == pytest.approx(report["hilbert_schmidt_squared"], rel=1e-9)
    assert "overlap_integral" in report


def test_partition_l1_report(runner, workspace):
    (workspace / "line_dom.json").write_text(json.dumps({"kind": "BoxN", "half_widths": [1.0]}))
    dec = workspace / "line.json"
    invoke(runner, "decompose", "--domain", workspace / "line_dom.json", "--jmax", 5, "--out", dec)
    result = invoke(runner, "partition", "--dec", dec, "--out", workspace / "p.npz", "--report", workspace / "l1.csv")
    assert result.exit_code == 0
    _, rows = se.read_csv(workspace / "l1.csv")
    assert len(rows) == 11
    assert all(float(r["l1"]) >= 1 and float(r["lo0"]) < float(r["hi0"]) for r in rows)


def test_schur_command(runner, workspace):
    dec = workspace / "line.json"
    (workspace / "line_dom.json").write_text(json.dumps({"kind": "BoxN", "half_widths": [1.0]}))
    invoke(runner, "decompose", "--domain", workspace / "line_dom.json", "--jmax", 20, "--out", dec)
    result = invoke(runner, "schur", "--dec", dec, "--sigma", 0.3, "--tau", 0.3, "--jmax", 20,
                    "--out", workspace / "s.csv")
    assert json.loads(result.output)["verdict"] == "stable"
    result = invoke(runner, "schur", "--dec", dec, "--sigma", 0.3, "--tau", 0.3, "--jmax", 25)
    assert result.exit_code == 2
    assert json.loads(result.stderr)["error"] == "component_error"


def test_containment_error_exit_code(runner, workspace):
    result = invoke(runner, "decompose", "--domain", workspace / "disc.json", "--jmax", 2, "--m", 1, "--eps", 0.4,
                    "--out", workspace / "d.json")
    assert result.exit_code == 2
    error = json.loads(result.stderr)
    assert error["error"] == "A_not_in_domain" and error["details"]["excess"] > 0


def test_run_config(runner, workspace):
    cfg = {"experiment": "levelset", "seed": 1, "domain": "square.json", "grid": {"samples": 5000},
           "decomposition": {"j_max": 4}, "output": {"csv": "ls.csv", "json": "ls.json"}}
    (workspace / "cfg.json").write_text(json.dumps(cfg))
    result = invoke(runner, "run", "--config", workspace / "cfg.json")
    assert result.exit_code == 0
    assert json.loads(result.output)["experiment"] == "levelset"
    assert (workspace / "ls.csv").exists()
    (workspace / "bad.json").write_text(json.dumps({"experiment": "levelset", "domain": "square.json"}))
    result = invoke(runner, "run", "--config", workspace / "bad.json")
    assert result.exit_code == 2 and json.loads(result.stderr)["error"] == "invalid_config"
