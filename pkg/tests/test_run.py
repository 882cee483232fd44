import json
import math
import numpy as np
import pandas as pd
import yaml
from jsonschema import Draft202012Validator
from pathlib import Path
from pytest import approx, fixture, mark
from pointerwork import cli
from pointerwork.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main
from pointerwork.params import read
from pointerwork.run import (
    RunManifest,
    config_hash,
    file_digest,
    pool_map,
    scaling_summary,
    self_test,
    write_csv,
    write_json,
)

SMALL_MODEL = {"bath_dim": 64, "window_count": 16}
SCHEMAS = Path(__file__).resolve().parent.parent / "schemas"


@fixture
def config_file(tmp_path):
    def write(**blocks):
        raw = {"model": dict(SMALL_MODEL), "numerics": {"n_samples": 60}, "output": {"verbose": 0}}
        for block, values in blocks.items():
            raw.setdefault(block, {}).update(values)
        path = tmp_path / "config.yaml"
        with open(path, "w") as f:
            yaml.safe_dump(raw, f)
        return path

    return write


class TestIO:
    def test_csv_format(self, tmp_path):
        frame = pd.DataFrame({"epsilon": [1e-3, 2e-3], "rate": [math.nan, math.inf]})
        text = write_csv(frame, tmp_path / "x.csv").read_text(encoding="utf-8")
        assert text == "epsilon,rate\n0.001,nan\n0.002,inf\n"

    def test_json_nulls(self, tmp_path):
        path = write_json({"a": math.nan, "b": np.float64(1.5), "c": np.array([1, 2]), "d": np.bool_(True)}, tmp_path / "x.json")
        assert json.loads(path.read_text()) == {"a": None, "b": 1.5, "c": [1, 2], "d": True}

    def test_config_hash_ignores_output(self):
        a = read.fill_defaults({})
        b = read.fill_defaults({"output": {"directory": "elsewhere/"}})
        c = read.fill_defaults({"sweep": {"seeds": [1]}})
        assert config_hash(a) == config_hash(b)
        assert config_hash(a) != config_hash(c)

    def test_manifest(self, tmp_path):
        config = read.fill_defaults({})
        data = write_json({"x": 1}, tmp_path / "data.json")
        manifest = RunManifest.start("border", config)
        path = manifest.finish(tmp_path, [data])
        written = json.loads(path.read_text())
        assert written["exit_status"] == 0
        assert written["files"] == [{"path": "data.json", "sha256": file_digest(data), "bytes": data.stat().st_size}]
        assert written["seeds"] == [0]


class TestSelfTest:
    def test_passes_and_writes(self, tmp_path):
        checks = self_test(tmp_path, verbose=0)
        assert all(check["passed"] for check in checks.values())
        assert checks["gaussian"]["recovered"] == approx(0.05, abs=1e-6)
        assert (tmp_path / "selftest.json").is_file()


class TestScalingSummary:
    @staticmethod
    def frame(epsilons, seeds=(0, 1)):
        rows = []
        for seed in seeds:
            for point, eps in enumerate(epsilons):
                rows.append(
                    dict(
                        seed=seed,
                        point=point,
                        epsilon=eps,
                        above_border=False,
                        r_d_predicted=3 * eps,
                        r_d_fitted=3 * eps,
                        r_e_predicted=5 * eps**2,
                        r_e_fitted=5 * eps**2,
                        r_e_upper_bound=False,
                    )
                )
        return pd.DataFrame(rows)

    def test_power_laws_recovered(self):
        per_point, summary = scaling_summary(self.frame([1e-3, 2e-3, 4e-3, 8e-3]))
        assert summary["regression"] == "ok"
        assert summary["r_d_slope"]["slope"] == approx(1.0, abs=1e-6)
        assert summary["r_e_slope"]["slope"] == approx(2.0, abs=1e-6)
        assert summary["ratio_monotone"]
        assert summary["ratio_at_smallest_epsilon"] == approx(0.6 / 1e-3)
        assert summary["n_seeds"] == 2
        assert summary["warnings"] == []
        assert len(per_point) == 4

    def test_single_epsilon_refused(self):
        per_point, summary = scaling_summary(self.frame([1e-3]))
        assert summary["regression"] == "refused"
        assert summary["r_d_slope"] is None
        assert len(per_point) == 1

    def test_upper_bounds_left_out(self):
        frame = self.frame([1e-3, 2e-3, 4e-3])
        frame.loc[frame["point"] == 0, "r_e_upper_bound"] = True
        frame.loc[frame["point"] == 0, "r_e_fitted"] = 1.0
        per_point, summary = scaling_summary(frame)
        assert math.isnan(per_point["r_e_fitted"].iloc[0])
        assert summary["r_e_slope"]["n_points"] == 2
        assert summary["r_e_slope"]["slope"] == approx(2.0, abs=1e-6)


class TestPool:
    @mark.parametrize("workers", [1, 3])
    def test_order_preserved(self, workers):
        assert pool_map(abs, [-3, 1, -2, 5], workers) == [3, 1, 2, 5]


class TestCli:
    def test_self_test(self, tmp_path):
        assert main(["--self-test", "--out", str(tmp_path)]) == EXIT_OK

    def test_missing_config(self, tmp_path):
        assert main(["border", "--config", str(tmp_path / "nope.yaml")]) == EXIT_CONFIG

    def test_invalid_config(self, config_file):
        path = config_file(model={"window_count": 4})
        assert main(["border", "--config", str(path)]) == EXIT_CONFIG

    def test_border(self, config_file, tmp_path):
        out = tmp_path / "border"
        assert main(["border", "--config", str(config_file()), "--out", str(out), "--seed", "3"]) == EXIT_OK
        frame = pd.read_csv(out / "border.csv")
        assert list(frame.columns) == [
            "seed", "alpha", "beta", "sigma_v", "vnd_sq_mean", "delta_mls", "epsilon_p", "epsilon_p_infinite"
        ]
        assert len(frame) == 1 and frame["seed"].iloc[0] == 3
        row = frame.iloc[0]
        for name in ("sigma_v", "vnd_sq_mean", "delta_mls", "epsilon_p"):
            assert np.isfinite(row[name]) and row[name] > 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert {f["path"] for f in manifest["files"]} >= {"border.csv", "border.json", "run_config.yaml"}

    def test_border_is_deterministic(self, config_file, tmp_path):
        path = str(config_file())
        for name in ("a", "b"):
            assert main(["border", "--config", path, "--out", str(tmp_path / name)]) == EXIT_OK
        assert (tmp_path / "a" / "border.csv").read_bytes() == (tmp_path / "b" / "border.csv").read_bytes()

    def test_decay_smoke(self, config_file, tmp_path):
        out = tmp_path / "decay"
        path = config_file(
            numerics={"n_samples": 60, "decay_time": 50.0, "transition_time": 50.0},
            output={"formats": ["csv", "json"]},
        )
        assert main(["decay", "--config", str(path), "--out", str(out)]) == EXIT_OK
        decay = pd.read_csv(out / "decay.csv")
        assert list(decay.columns) == ["time", "coherence", "coherence_normalized", "predicted"]
        assert decay["coherence_normalized"].iloc[0] == approx(1.0)
        rates = json.loads((out / "rates.json").read_text())
        for key in ("epsilon", "sigma_v", "vnd_sq_mean", "delta_mls", "epsilon_p", "r_d_predicted",
                    "r_e_predicted", "rho_e", "h1nd_sq_mean"):
            assert rates[key] is not None and rates[key] > 0, key
        assert rates["fit_status"] in ("ok", "insufficient-decay")

    def test_work_smoke(self, config_file, tmp_path):
        out = tmp_path / "work"
        path = config_file(sweep={"ramp_times": [5.0]}, work={"fast_ramp_time": 2.0})
        assert main(["work", "--config", str(path), "--out", str(out)]) == EXIT_OK
        records = json.loads((out / "work.json").read_text())["records"]
        assert [r["ramp_time"] for r in records] == [5.0, 2.0]
        for record in records:
            assert sum(p for _, p in record["tpm"]["entries"]) == approx(1.0)
            assert record["discrepancy"] == approx(abs(record["mixture_work"] - record["tpm_mean"]), abs=1e-12)
        frame = pd.read_csv(out / "work.csv")
        assert len(frame) == 2
        coherence = pd.read_csv(out / "coherence_T5.csv")
        assert {"coherence_instantaneous", "coherence_bare", "coherence_coherent"} <= set(coherence.columns)
        assert (out / "work_distribution_T2.csv").is_file()

    def test_window_trend_smoke(self, config_file, tmp_path):
        out = tmp_path / "trend"
        path = config_file(sweep={"window_counts": [16, 32, 64]}, numerics={"n_samples": 40, "decay_time": 20.0})
        assert main(["window-trend", "--config", str(path), "--out", str(out)]) == EXIT_OK
        frame = pd.read_csv(out / "window_trend.csv")
        assert list(frame["window_count"]) == [16, 32, 64]
        assert (frame["duration"] == 240.0).all()
        summary = json.loads((out / "window_trend.json").read_text())
        assert isinstance(summary["monotone_decreasing"], bool)

    def test_linear_algebra_failure_exit_code(self, config_file, tmp_path, monkeypatch):
        def diverge(config, workers):
            raise np.linalg.LinAlgError("eigh did not converge")

        monkeypatch.setitem(cli.COMMANDS, "border", diverge)
        assert main(["border", "--config", str(config_file()), "--out", str(tmp_path / "x")]) == EXIT_NUMERICAL

    def test_window_count_above_bath_dim(self, config_file, tmp_path):
        path = config_file(sweep={"window_counts": [16, 128]})
        assert main(["window-trend", "--config", str(path), "--out", str(tmp_path / "x")]) == EXIT_CONFIG


@mark.slow
class TestAcceptance:
    def test_gaussian_regime_on_demo_config(self, tmp_path):
        out = tmp_path / "demo"
        assert main(["decay", "--config", "configs/demo.yaml", "--out", str(out)]) == EXIT_OK
        rates = json.loads((out / "rates.json").read_text())
        assert rates["fit_quality"] >= 0.95
        assert rates["r_d_fitted"] == approx(rates["r_d_predicted"], rel=0.3)

    def test_decay_is_deterministic(self, config_file, tmp_path):
        path = str(config_file(output={"formats": ["csv"]}))
        for name in ("a", "b"):
            assert main(["decay", "--config", path, "--out", str(tmp_path / name)]) == EXIT_OK
        assert (tmp_path / "a" / "decay.csv").read_bytes() == (tmp_path / "b" / "decay.csv").read_bytes()

    def test_scaling(self, tmp_path):
        out = tmp_path / "scaling"
        assert main(["scaling", "--config", "configs/scaling.yaml", "--out", str(out), "--workers", "4"]) == EXIT_OK
        summary = json.loads((out / "scaling_summary.json").read_text())
        assert summary["r_d_slope"]["slope"] == approx(1.0, abs=0.15)
        assert summary["r_e_slope"]["slope"] == approx(2.0, abs=0.3)
        assert summary["ratio_at_smallest_epsilon"] >= 10

    def test_work(self, tmp_path):
        out = tmp_path / "work"
        assert main(["work", "--config", "configs/work.yaml", "--out", str(out)]) == EXIT_OK
        records = json.loads((out / "work.json").read_text())["records"]
        slow = max(records, key=lambda r: r["ramp_time"])
        fast = min(records, key=lambda r: r["ramp_time"])
        assert slow["extras"]["relative_discrepancy"] <= 0.05
        assert slow["residual_coherence"] <= 0.05
        assert slow["relative_jarzynski_deviation"] <= 0.1
        assert fast["discrepancy"] > slow["discrepancy"]

    def test_window_trend(self, tmp_path):
        out = tmp_path / "trend"
        assert main(["window-trend", "--config", "configs/demo.yaml", "--out", str(out)]) == EXIT_OK
        assert json.loads((out / "window_trend.json").read_text())["monotone_decreasing"]

    def test_null_drive_on_demo_config(self, tmp_path):
        with open("configs/demo.yaml") as f:
            raw = yaml.safe_load(f)
        raw["protocol"]["lambda1"] = raw["protocol"]["lambda0"]
        raw["sweep"]["ramp_times"] = [2000.0]
        raw["work"].update(fast_ramp_time=2000.0, coherent_run=False)
        path = tmp_path / "null.yaml"
        with open(path, "w") as f:
            yaml.safe_dump(raw, f)
        out = tmp_path / "null"
        assert main(["work", "--config", str(path), "--out", str(out)]) == EXIT_OK
        (record,) = json.loads((out / "work.json").read_text())["records"]
        span = record["extras"]["spectral_span"]
        assert abs(record["mixture_work"]) <= 1e-12
        assert abs(record["tpm_mean"]) <= 0.01 * span


class TestSchemas:
    @staticmethod
    def check(path, schema):
        with open(SCHEMAS / schema) as f:
            validator = Draft202012Validator(json.load(f))
        errors = [e.message for e in validator.iter_errors(json.loads(path.read_text()))]
        assert errors == [], path.name

    @mark.parametrize(
        "command, blocks, written",
        [
            ("border", {}, {"border.json": "border.schema.json"}),
            (
                "decay",
                {"numerics": {"n_samples": 60, "decay_time": 50.0, "transition_time": 50.0}},
                {"rates.json": "rate_report.schema.json"},
            ),
            (
                "scaling",
                {"numerics": {"n_samples": 60, "decay_time": 50.0, "transition_time": 50.0}},
                {"scaling_summary.json": "scaling_summary.schema.json"},
            ),
            (
                "work",
                {"sweep": {"ramp_times": [5.0]}, "work": {"fast_ramp_time": 2.0}},
                {"work.json": "work_record.schema.json"},
            ),
            (
                "window-trend",
                {"sweep": {"window_counts": [16, 32, 64]}, "numerics": {"n_samples": 40, "decay_time": 20.0}},
                {"window_trend.json": "window_trend.schema.json"},
            ),
        ],
    )
    def test_outputs_validate(self, config_file, tmp_path, command, blocks, written):
        out = tmp_path / command
        assert main([command, "--config", str(config_file(**blocks)), "--out", str(out)]) == EXIT_OK
        for name, schema in dict(written, **{"manifest.json": "manifest.schema.json"}).items():
            self.check(out / name, schema)
