import json
import os

import numpy as np
import pytest
from click.testing import CliRunner

from geodetect.cli import ExperimentConfig, main, run_experiment, run_histogram, run_toy, window_stats
from geodetect.datastore import ToySpec
from geodetect.exceptions import ConfigError

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_config(setting="black_box", **extra):
    cfg = {
        "train": os.path.join(FIXTURES, "train"),
        "test_in": os.path.join(FIXTURES, "test_in"),
        "test_out": {"easy": os.path.join(FIXTURES, "test_out_easy")},
        "validation": os.path.join(FIXTURES, "validation"),
        "model": os.path.join(FIXTURES, "model"),
        "setting": setting,
        "seed": 0,
    }
    cfg.update(extra)
    return cfg


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def read_report(out_dir):
    with open(os.path.join(out_dir, "report.json")) as fh:
        return json.load(fh)


class TestConfigParsing:
    def test_unknown_setting(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(fixture_config(setting="sideways"))

    def test_white_box_plus_requires_validation(self):
        cfg = fixture_config("white_box_plus")
        cfg.pop("validation")
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(cfg)

    def test_grey_box_requires_model(self):
        cfg = fixture_config("grey_box")
        cfg.pop("model")
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(cfg)

    def test_missing_keys(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"setting": "black_box"})


class TestRunCommand:
    def test_exit_codes(self, tmp_path):
        runner = CliRunner()
        # config error: white_box_plus without validation
        cfg = fixture_config("white_box_plus")
        cfg.pop("validation")
        res = runner.invoke(main, ["run", "--config", write_config(tmp_path, cfg),
                                   "--out", str(tmp_path / "o1")])
        assert res.exit_code == 1
        # data error: train dump path does not exist
        cfg = fixture_config()
        cfg["train"] = str(tmp_path / "nope")
        res = runner.invoke(main, ["run", "--config", write_config(tmp_path, cfg, "c2.json"),
                                   "--out", str(tmp_path / "o2")])
        assert res.exit_code == 2
        # missing config file entirely
        res = runner.invoke(main, ["run", "--config", str(tmp_path / "absent.json")])
        assert res.exit_code == 1

    def test_black_box_golden_report(self, tmp_path):
        cfg = fixture_config(
            grid={"temperatures": [1.0, 2.0, 5.0], "epsilons": [0.0]},
            scorers=[
                {"kind": "fr0", "aggregation": "sum"},
                {"kind": "fr0", "aggregation": "min"},
                {"kind": "fr0", "aggregation": "sum", "distance": "kl"},
                {"kind": "fr0", "aggregation": "min", "distance": "kl"},
                {"kind": "msp"}, {"kind": "odin", "temperature": 1.0}, {"kind": "energy"},
            ],
        )
        out = tmp_path / "golden_rerun"
        run_experiment(ExperimentConfig.from_dict(cfg), str(out))
        fresh = (out / "report.csv").read_text().strip().splitlines()
        golden = open(os.path.join(FIXTURES, "golden_black_box", "report.csv")).read().strip().splitlines()
        assert fresh[0] == golden[0]
        assert len(fresh) == len(golden)
        for got, want in zip(fresh[1:], golden[1:]):
            g, w = got.split(","), want.split(",")
            assert g[:3] == w[:3]
            for a, b in zip(g[3:], w[3:]):
                if a == "" and b == "":
                    continue
                assert float(a) == pytest.approx(float(b), rel=1e-9, abs=1e-12)

    def test_grey_box_eps_zero_matches_black_box(self, tmp_path):
        for setting, out in (("black_box", "b"), ("grey_box", "g")):
            cfg = fixture_config(setting, eps=0.0)
            run_experiment(ExperimentConfig.from_dict(cfg), str(tmp_path / out))
        black = (tmp_path / "b" / "scores.csv").read_bytes()
        grey = (tmp_path / "g" / "scores.csv").read_bytes()
        assert black == grey

    def test_report_rows_in_unit_range(self, tmp_path):
        cfg = fixture_config("white_box")
        rep = run_experiment(ExperimentConfig.from_dict(cfg), str(tmp_path / "w"))
        for row in rep["rows"]:
            for key in ("tnr_at_tpr95", "auroc", "aupr"):
                assert 0.0 <= row[key] <= 1.0
            assert np.isfinite(row["delta"])

    def test_determinism_byte_identical(self, tmp_path):
        cfg = fixture_config("white_box_plus",
                             grid={"temperatures": [1.0, 2.0], "epsilons": [0.0]})
        run_experiment(ExperimentConfig.from_dict(cfg), str(tmp_path / "r1"))
        run_experiment(ExperimentConfig.from_dict(cfg), str(tmp_path / "r2"))
        for name in ("report.csv", "scores.csv", "report.json"):
            assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()

    def test_layerwise_scorer_columns(self, tmp_path):
        cfg = fixture_config(
            "white_box_plus",
            scorers=[
                {"kind": "fr_layer", "layer_index": 0},
                {"kind": "fr_layer", "layer_index": 1},
                {"kind": "fr_layer_ood", "layer_index": 0},
                {"kind": "mahalanobis_layer", "layer_index": 1},
            ],
        )
        rep = run_experiment(ExperimentConfig.from_dict(cfg), str(tmp_path / "lw"))
        scorers = {row["scorer"] for row in rep["rows"]}
        assert {"ensemble_plus", "fr_layer_0", "fr_layer_1", "fr_layer_ood_0",
                "mahalanobis_layer_1"} <= scorers
        assert rep["orientations"]["fr_layer_0"] == "lower_is_in"
        assert rep["orientations"]["mahalanobis_layer_1"] == "higher_is_in"

    def test_layer_index_out_of_range(self, tmp_path):
        cfg = fixture_config("black_box",
                             scorers=[{"kind": "fr_layer", "layer_index": 9}])
        with pytest.raises(ConfigError):
            run_experiment(ExperimentConfig.from_dict(cfg), str(tmp_path / "bad"))

    def test_thread_count_does_not_change_results(self, tmp_path):
        cfg = fixture_config("grey_box", eps=0.001)
        run_experiment(ExperimentConfig.from_dict(cfg), str(tmp_path / "t1"), threads=1)
        run_experiment(ExperimentConfig.from_dict(cfg), str(tmp_path / "t3"), threads=3)
        assert (tmp_path / "t1" / "scores.csv").read_bytes() == \
               (tmp_path / "t3" / "scores.csv").read_bytes()


class TestHistogramCommand:
    def write_scores(self, tmp_path, rows):
        path = tmp_path / "scores.csv"
        lines = ["population,s"] + [f"{p},{v}" for p, v in rows]
        path.write_text("\n".join(lines) + "\n")
        return str(path)

    def parse_hist(self, path):
        lines = open(path).read().strip().splitlines()[1:]
        return [ln.split(",") for ln in lines]

    def test_single_population_single_bin(self, tmp_path):
        scores = self.write_scores(tmp_path, [("a", float(i)) for i in range(7)])
        out = tmp_path / "h.csv"
        run_histogram(scores, 1, str(out))
        rows = self.parse_hist(out)
        assert len(rows) == 1
        assert int(rows[0][5]) == 7

    def test_counts_sum_preserved(self, tmp_path):
        rng = np.random.default_rng(0)
        rows = [("a", float(v)) for v in rng.normal(size=40)]
        rows += [("b", float(v)) for v in rng.normal(2.0, 1.0, size=25)]
        scores = self.write_scores(tmp_path, rows)
        for bins in (1, 3, 10):
            out = tmp_path / f"h{bins}.csv"
            run_histogram(scores, bins, str(out))
            parsed = self.parse_hist(out)
            totals = {}
            for r in parsed:
                totals[r[1]] = totals.get(r[1], 0) + int(r[5])
            assert totals == {"a": 40, "b": 25}

    def test_disjoint_populations_share_no_bin(self, tmp_path):
        rows = [("lo", float(v)) for v in np.linspace(0, 1, 30)]
        rows += [("hi", float(v)) for v in np.linspace(10, 11, 30)]
        scores = self.write_scores(tmp_path, rows)
        out = tmp_path / "h.csv"
        run_histogram(scores, 8, str(out))
        occupied = {}
        for r in self.parse_hist(out):
            if int(r[5]) > 0:
                occupied.setdefault(r[2], set()).add(r[1])
        for bin_index, pops in occupied.items():
            assert len(pops) == 1

    def test_bins_below_one_config_error(self, tmp_path):
        scores = self.write_scores(tmp_path, [("a", 1.0)])
        runner = CliRunner()
        res = runner.invoke(main, ["histogram", "--input", scores, "--bins", "0",
                                   "--out", str(tmp_path / "h.csv")])
        assert res.exit_code == 1

    def test_non_numeric_scores_rejected(self, tmp_path):
        path = tmp_path / "scores.csv"
        path.write_text("population,s\na,1.0\na,oops\n")
        runner = CliRunner()
        res = runner.invoke(main, ["histogram", "--input", str(path), "--bins", "3",
                                   "--out", str(tmp_path / "h.csv")])
        assert res.exit_code == 2


class TestToyCommand:
    def test_report_structure_and_ood1_closeness(self, tmp_path):
        rep = run_toy(ToySpec(n=5000, seed=0), window=25, out_dir=str(tmp_path))
        rows = {(r["score"], r["ood_set"]): r for r in rep["rows"]}
        assert set(rows) == {("fisher_rao", "ood_shift"), ("mahalanobis", "ood_shift"),
                             ("fisher_rao", "ood_wide"), ("mahalanobis", "ood_wide")}
        # mean-shift-only population: the two scores perform comparably
        a = rows[("fisher_rao", "ood_shift")]["auroc"]
        b = rows[("mahalanobis", "ood_shift")]["auroc"]
        assert abs(a - b) < 0.05
        for suffix in ("ood_shift", "ood_wide"):
            assert (tmp_path / f"toy_scores_{suffix}.csv").exists()
            assert (tmp_path / f"toy_hist_{suffix}.csv").exists()

    def test_zero_samples_config_error(self, tmp_path):
        runner = CliRunner()
        res = runner.invoke(main, ["toy", "--n", "0", "--out", str(tmp_path)])
        assert res.exit_code == 1

    def test_window_stats_hand_values(self):
        mu, sd = window_stats(np.array([0.0, 2.0, 10.0, 12.0]), 2)
        np.testing.assert_allclose(mu, [1.0, 11.0])
        np.testing.assert_allclose(sd, [1.0, 1.0])

    def test_cli_invocation(self, tmp_path):
        runner = CliRunner()
        res = runner.invoke(main, ["toy", "--n", "500", "--seed", "3",
                                   "--out", str(tmp_path)])
        assert res.exit_code == 0
        assert (tmp_path / "toy_report.csv").exists()
