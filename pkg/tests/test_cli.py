import csv
import hashlib
import json
import math

import pytest

from stabledp.cli import (
    ConfigError,
    DatasetConfig,
    SweepConfig,
    cmd_select,
    cmd_sweep,
    cmd_train,
    cmd_verify,
    config_from_dict,
    load_config,
    main,
)
from stabledp.data_io import SplitPlan


def tiny_config(**overrides):
    base = dict(
        dataset=DatasetConfig(kind="synthetic", n=120, d=12, classes=2, sparsity=4,
                              noise=0.3, structured_noise=False, seed=3, reduce_to=6),
        split=SplitPlan(seed=0, repeats=3),
        lambda_grid=(0.05, 0.2),
        epsilon_grid=(1.0, 4.0),
        noise_mode="stability_optimal",
        tolerance=1e-7,
    )
    base.update(overrides)
    return SweepConfig(**base)


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestConfig:
    def test_defaults_match_experiment_protocol(self):
        cfg = SweepConfig()
        assert cfg.gamma == 0.85 and cfg.eta == 0.15
        assert cfg.split.train_fraction == 0.8 and cfg.split.repeats == 10
        assert cfg.dataset.reduce_to == 32

    def test_field_path_in_errors(self):
        with pytest.raises(ConfigError, match="lambda_grid"):
            SweepConfig(lambda_grid=())
        with pytest.raises(ConfigError, match=r"epsilon_grid\[0\]"):
            SweepConfig(epsilon_grid=(-1.0,))
        with pytest.raises(ConfigError, match="fixed_scale_b"):
            SweepConfig(noise_mode="fixed_scale")
        with pytest.raises(ConfigError, match="dataset"):
            config_from_dict({"dataset": {"bogus_field": 1}})
        with pytest.raises(ConfigError, match="split"):
            config_from_dict({"split": {"repeats": 0}})

    def test_json_round_trip_with_overrides(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"lambda_grid": [0.1], "epsilon_grid": [1.0],
                                 "dataset": {"n": 50, "d": 6, "reduce_to": None}}))
        cfg = load_config(p, {"epsilon_grid": [2.0], "split.repeats": 2})
        assert cfg.lambda_grid == (0.1,)
        assert cfg.epsilon_grid == (2.0,)
        assert cfg.split.repeats == 2


class TestSweep:
    def test_schema_and_noise_scale_formula(self, tmp_path):
        cfg = tiny_config()
        path = cmd_sweep(cfg, tmp_path)
        rows = read_rows(path)
        assert list(rows[0].keys()) == [
            "lambda", "epsilon", "noise_mode", "noise_scale", "beta", "sensitivity_l2",
            "repeat", "test_accuracy", "test_accuracy_std",
        ]
        n_train = int(0.8 * 120)
        for row in rows:
            lam, eps = float(row["lambda"]), float(row["epsilon"])
            beta = 2.0 * cfg.L**2 * 1.0 / (n_train * lam * cfg.gamma)
            assert float(row["beta"]) == pytest.approx(beta, rel=1e-12)
            # stability-optimal scale reproduces the release formula per cell
            expect = math.sqrt(2 * beta / (lam * cfg.gamma)) / eps
            assert float(row["noise_scale"]) == pytest.approx(expect, rel=1e-12)
            assert float(row["sensitivity_l2"]) == pytest.approx(
                math.sqrt(2 * beta / (2 * lam * cfg.gamma)), rel=1e-12
            )
        # per-repeat rows plus one aggregate row per cell
        assert len(rows) == 2 * 2 * (3 + 1)
        agg = [r for r in rows if r["repeat"] == "-1"]
        assert len(agg) == 4 and all(r["test_accuracy_std"] != "" for r in agg)

    def test_fixed_scale_constant_across_lambda(self, tmp_path):
        cfg = tiny_config(noise_mode="fixed_scale", fixed_scale_b=0.25)
        rows = read_rows(cmd_sweep(cfg, tmp_path))
        assert {row["noise_scale"] for row in rows} == {"0.25"}

    def test_byte_identical_reruns(self, tmp_path):
        cfg = tiny_config()
        p1 = cmd_sweep(cfg, tmp_path / "a")
        p2 = cmd_sweep(cfg, tmp_path / "b")
        assert p1.read_bytes() == p2.read_bytes()
        assert (tmp_path / "a/sweep.meta.json").read_bytes() == \
            (tmp_path / "b/sweep.meta.json").read_bytes()

    def test_cell_isolation(self, tmp_path):
        full = read_rows(cmd_sweep(tiny_config(), tmp_path / "full"))
        single = read_rows(cmd_sweep(tiny_config(lambda_grid=(0.2,), epsilon_grid=(4.0,)),
                                     tmp_path / "single"))
        pick = {(r["lambda"], r["epsilon"], r["repeat"]): r["test_accuracy"]
                for r in full if r["lambda"] == "0.2" and r["epsilon"] == "4.0"}
        for r in single:
            key = (r["lambda"], r["epsilon"], r["repeat"])
            assert r["test_accuracy"] == pick[key]

    def test_meta_is_schema_versioned(self, tmp_path):
        cmd_sweep(tiny_config(), tmp_path)
        meta = json.loads((tmp_path / "sweep.meta.json").read_text())
        assert meta["schema_version"] == 1
        assert meta["command"] == "sweep"
        assert meta["config"]["gamma"] == 0.85


class TestTrain:
    def test_uses_first_epsilon_only(self, tmp_path):
        rows = read_rows(cmd_train(tiny_config(), tmp_path))
        assert {r["epsilon"] for r in rows} == {"1.0"}

    def test_none_mode_equals_nonprivate_accuracy(self, tmp_path):
        rows_none = read_rows(cmd_train(tiny_config(noise_mode="none"), tmp_path / "n"))
        rows_huge = read_rows(cmd_train(tiny_config(epsilon_grid=(1e8,)), tmp_path / "h"))
        acc_none = [r["test_accuracy"] for r in rows_none if r["repeat"] == "-1"]
        acc_huge = [r["test_accuracy"] for r in rows_huge if r["repeat"] == "-1"]
        for a, b in zip(acc_none, acc_huge):
            assert abs(float(a) - float(b)) <= 0.005

    def test_none_mode_scale_zero_and_deterministic(self, tmp_path):
        cfg = tiny_config(noise_mode="none")
        p1 = cmd_train(cfg, tmp_path / "1")
        p2 = cmd_train(cfg, tmp_path / "2")
        assert p1.read_bytes() == p2.read_bytes()
        assert {r["noise_scale"] for r in read_rows(p1)} == {"0.0"}


class TestSelect:
    def test_schema_and_limits(self, tmp_path):
        cfg = tiny_config(epsilon_grid=(2.0,), threshold_mode="dynamic", threshold_k=1.0)
        path = cmd_select(cfg, tmp_path)
        rows = read_rows(path)
        assert list(rows[0].keys()) == [
            "lambda", "epsilon", "noise_mode", "noise_scale", "threshold_mode",
            "threshold_T", "repeat", "f1_similarity", "observed_flip_rate",
            "predicted_flip_rate", "f1_similarity_std",
        ]
        for r in rows:
            assert 0.0 <= float(r["f1_similarity"]) <= 1.0
        flips = read_rows(tmp_path / "select_flips.csv")
        assert len(flips) == 1 * 2 * 6  # eps x lambda x flattened features (1x12)
        for r in flips:
            assert 0.0 <= float(r["observed_flip_rate"]) <= 1.0
            assert 0.0 <= float(r["predicted_flip_rate"]) <= 1.0

    def test_huge_epsilon_gives_perfect_f1(self, tmp_path):
        # dense non-private weights (tiny lambda) so the vanishing-noise
        # limit leaves no zero-weight coordinate to flip by chance
        cfg = tiny_config(epsilon_grid=(1e9,), lambda_grid=(0.005,))
        rows = read_rows(cmd_select(cfg, tmp_path))
        agg = [r for r in rows if r["repeat"] == "-1"]
        assert agg and all(float(r["f1_similarity"]) == 1.0 for r in agg)

    def test_zero_noise_mode_gives_exact_f1(self, tmp_path):
        cfg = tiny_config(noise_mode="none", epsilon_grid=(1.0,))
        rows = read_rows(cmd_select(cfg, tmp_path))
        assert all(float(r["f1_similarity"]) == 1.0 for r in rows)

    def test_static_threshold_variant(self, tmp_path):
        cfg = tiny_config(epsilon_grid=(2.0,), threshold_mode="static", static_T=0.05)
        rows = read_rows(cmd_select(cfg, tmp_path))
        assert {r["threshold_mode"] for r in rows} == {"static"}
        assert {r["threshold_T"] for r in rows} == {"0.05"}

    def test_byte_identical_reruns(self, tmp_path):
        cfg = tiny_config(epsilon_grid=(2.0,))
        p1 = cmd_select(cfg, tmp_path / "a")
        p2 = cmd_select(cfg, tmp_path / "b")
        assert p1.read_bytes() == p2.read_bytes()
        assert (tmp_path / "a/select_flips.csv").read_bytes() == \
            (tmp_path / "b/select_flips.csv").read_bytes()


class TestVerifyCommand:
    def test_gradients_suite_passes(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = cmd_verify("gradients", out_path=out)
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 2 and all(line.startswith("[PASS]") for line in lines)
        payload = json.loads(out.read_text())
        assert payload["all_ok"] is True

    def test_flips_suite(self, capsys):
        assert cmd_verify("flips", draws=20_000) == 0

    def test_sensitivity_suite_small(self, capsys):
        assert cmd_verify("sensitivity", trials=10) == 0

    def test_stability_suite_small(self, capsys):
        assert cmd_verify("stability", trials=8, probes=10) == 0

    def test_dp_suite_small(self, capsys):
        assert cmd_verify("dp", samples=150_000) == 0
        out = capsys.readouterr().out
        assert "expected failure" in out

    def test_unknown_suite(self):
        with pytest.raises(ValueError, match="unknown suite"):
            cmd_verify("everything")

    def test_exit_code_one_when_a_check_lands_wrong(self, monkeypatch, capsys):
        from stabledp import cli as cli_mod
        from stabledp.verify import OracleReport

        bad = OracleReport(name="stub", bound_value=1.0, empirical_value=2.0,
                           trials=1, margin=-1.0, passed=False)
        monkeypatch.setattr(cli_mod, "run_verify_suite",
                            lambda *a, **k: [("stub", bad, True, False)])
        assert cli_mod.cmd_verify("gradients") == 1
        assert "[FAIL] stub" in capsys.readouterr().out


class TestMainEntrypoint:
    def test_verify_exit_code(self, capsys):
        assert main(["verify", "gradients"]) == 0

    def test_sweep_via_argv(self, tmp_path, capsys):
        cfg = {"dataset": {"n": 60, "d": 8, "classes": 2, "sparsity": 3, "noise": 0.3,
                           "structured_noise": False, "seed": 1, "reduce_to": None},
               "split": {"repeats": 2}, "lambda_grid": [0.1], "epsilon_grid": [1.0],
               "tolerance": 1e-6}
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(cfg))
        code = main(["sweep", "--config", str(p), "--out", str(tmp_path / "res")])
        assert code == 0
        assert (tmp_path / "res" / "sweep.csv").exists()

    def test_config_error_exit_code(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"lambda_grid": []}))
        assert main(["sweep", "--config", str(p), "--out", str(tmp_path)]) == 2

    def test_fetch_via_argv(self, tmp_path, capsys):
        content = ("1, Private, 2, Bachelors, 3, Never-married, Sales, Own-child, White,"
                   " Male, 0, 0, 40, United-States, <=50K\n"
                   "2, Private, 3, Bachelors, 4, Never-married, Sales, Own-child, Black,"
                   " Female, 0, 0, 50, United-States, >50K\n")
        src = tmp_path / "raw.data"
        src.write_text(content)
        digest = hashlib.sha256(content.encode()).hexdigest()
        code = main(["fetch", "adult", "--dest", str(tmp_path / "adult.csv"),
                     "--url", src.as_uri(), "--sha256", digest,
                     "--cache-dir", str(tmp_path / "cache")])
        assert code == 0
        assert (tmp_path / "adult.csv").exists()

    def test_fetch_failure_exit_code(self, tmp_path, capsys):
        code = main(["fetch", "adult", "--dest", str(tmp_path / "x.csv"),
                     "--url", (tmp_path / "missing.data").as_uri(),
                     "--sha256", "0" * 64, "--cache-dir", str(tmp_path / "c")])
        assert code == 1
