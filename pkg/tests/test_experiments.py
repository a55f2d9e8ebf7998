import json
import math
import os

import pytest

from pwlab import experiments as ex

SQUARE = {"kind": "BoxN", "half_widths": [1.0, 1.0]}
DISC = {"kind": "Disc2D", "radius": 1.0}


def config(kind, tmp_path, **extra):
    data = {"experiment": kind, "seed": 3, "domain": SQUARE,
            "output": {"csv": str(tmp_path / f"{kind}.csv"), "json": str(tmp_path / f"{kind}.json")}}
    data.update(extra)
    return ex.ExperimentConfig.from_dict(data)


class TestConfig:
    def test_seed_is_mandatory(self):
        with pytest.raises(ex.ExperimentError) as info:
            ex.ExperimentConfig.from_dict({"experiment": "levelset", "domain": SQUARE})
        assert info.value.code == "invalid_config"
        with pytest.raises(ex.ExperimentError):
            ex.ExperimentConfig.from_dict({"experiment": "levelset", "domain": SQUARE, "seed": 1.5})

    @pytest.mark.parametrize("patch", [
        {"experiment": "fourier"},
        {"decomposition": {"epsilon": 0.7}},
        {"decomposition": {"j_max": -1}},
        {"decomposition": {"a": 1.0}},
        {"grid": {"samples": 0}},
        {"exponents": {"p": [0.5]}},
        {"symbols": {"count": 0}},
        {"domain": {"kind": "Torus"}},
    ])
    def test_invalid_fields(self, patch):
        data = {"experiment": "levelset", "seed": 1, "domain": SQUARE}
        data.update(patch)
        with pytest.raises(ex.ExperimentError) as info:
            ex.ExperimentConfig.from_dict(data)
        assert info.value.stage == "config"

    @pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
    def test_unwritable_directory(self, tmp_path):
        locked = tmp_path / "locked"
        locked.mkdir(mode=0o500)
        with pytest.raises(ex.ExperimentError):
            ex.ExperimentConfig.from_dict({"experiment": "levelset", "seed": 1, "domain": SQUARE,
                                           "output": {"csv": str(locked / "x.csv")}})

    def test_output_below_a_regular_file(self, tmp_path):
        (tmp_path / "plain").write_text("")
        with pytest.raises(ex.ExperimentError) as info:
            ex.ExperimentConfig.from_dict({"experiment": "levelset", "seed": 1, "domain": SQUARE,
                                           "output": {"json": str(tmp_path / "plain" / "x.json")}})
        assert info.value.code == "invalid_config"

    def test_missing_output_directory(self, tmp_path):
        with pytest.raises(ex.ExperimentError) as info:
            ex.ExperimentConfig.from_dict({"experiment": "levelset", "seed": 1, "domain": SQUARE,
                                           "output": {"csv": str(tmp_path / "absent" / "x.csv")}})
        assert info.value.details == {"output": "csv"}

    def test_domain_from_file_and_hash(self, tmp_path):
        (tmp_path / "dom.json").write_text(json.dumps(DISC))
        (tmp_path / "cfg.json").write_text(json.dumps({"experiment": "levelset", "seed": 2, "domain": "dom.json"}))
        cfg = ex.load_config(tmp_path / "cfg.json")
        assert cfg.domain.kind == "Disc2D"
        inline = ex.ExperimentConfig.from_dict({"experiment": "levelset", "seed": 2, "domain": DISC})
        assert cfg.hash == inline.hash

    def test_symbol_seeds_are_distinct_and_stable(self):
        seeds = [ex.symbol_seed(7, i) for i in range(50)]
        assert len(set(seeds)) == 50
        assert seeds == [ex.symbol_seed(7, i) for i in range(50)]


class TestRunners:
    def test_levelset_rerun_is_byte_identical(self, tmp_path):
        first = ex.run(config("levelset", tmp_path, grid={"samples": 20000}, decomposition={"j_max": 5}))
        text = (tmp_path / "levelset.csv").read_bytes()
        second = ex.run(config("levelset", tmp_path, grid={"samples": 20000}, decomposition={"j_max": 5}))
        assert (tmp_path / "levelset.csv").read_bytes() == text
        assert first.csv_text == second.csv_text
        summary = json.loads((tmp_path / "levelset.json").read_text())
        assert summary["seed"] == 3 and summary["config_hash"] == first.summary["config_hash"]

    def test_admissibility_on_interval(self, tmp_path):
        result = ex.run(config("admissibility", tmp_path, domain={"kind": "BoxN", "half_widths": [1.0]},
                               decomposition={"j_max": 6}))
        assert result.summary["measure_ratio"] == pytest.approx(2.0)
        assert result.summary["finite"]

    def test_schur_scan_on_interval(self, tmp_path):
        result = ex.run(config("schur", tmp_path, domain={"kind": "BoxN", "half_widths": [1.0]},
                               decomposition={"j_max": 30}, exponents={"sigma": [-0.2, 0.3]}))
        verdicts = [p["verdict"] for p in result.summary["points"]]
        assert verdicts == ["growing", "stable"]
        assert result.summary["toeplitz"]["bounded"]
        assert set(result.column("log_rule_verdict")) <= {"growing", "stable"}

    def test_schur_truncations_checked(self, tmp_path):
        cfg = config("schur", tmp_path, domain={"kind": "BoxN", "half_widths": [1.0]},
                     decomposition={"j_max": 10}, grid={"truncations": [8, 9, 12]})
        with pytest.raises(ex.ExperimentError):
            ex.run(cfg)

    def test_small_equivalence_sweep(self, tmp_path):
        cfg = config("equivalence", tmp_path, decomposition={"j_max": 3}, grid={"h_divisor": 12},
                     symbols={"count": 2, "subsample": 1, "modes": 6}, exponents={"p": [2]})
        result = ex.run(cfg)
        assert len(result.rows) == 3
        entry = result.summary["by_p"][0]
        assert entry["band"] >= 1 and math.isfinite(entry["band"])
        ratios = result.column("ratio")
        assert all(r > 0 for r in ratios)

    def test_containment_failure_is_reported(self, tmp_path):
        cfg = config("admissibility", tmp_path, domain=DISC, decomposition={"j_max": 2, "m": 1, "epsilon": 0.4})
        with pytest.raises(ex.ExperimentError) as info:
            ex.run(cfg)
        assert info.value.code == "A_not_in_domain"
        assert info.value.details["excess"] > 0
        assert info.value.to_dict()["error"] == "A_not_in_domain"
