import json
from pathlib import Path

import pytest
import yaml

from matchsim.cli import ConfigError, apply_overrides, load_scenario, main

COUNTEREXAMPLE_DOC = {
    "seed": 0,
    "instance": {"inline": {
        "productivity": [[6.0, 2.0], [5.0, 4.0]],
        "cost": [[1.0, 2.0], [1.0, 2.0]],
        "quality": [2.0, 1.0],
        "max_effort": 1.0,
        "effort_step": 1.0}},
    "mechanism": {"kind": "FILI", "horizon": 10},
    "payment": {"family": "quadratic", "alpha": "star"},
    "strategies": "mtbb",
    "mode": "limit",
}


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "scenario.yaml"
    doc = dict(COUNTEREXAMPLE_DOC, output_dir=str(tmp_path / "out"))
    path.write_text(yaml.safe_dump(doc))
    return path


class TestScenarioLoading:
    def test_round_trip_is_identical(self, config_path):
        scenario = load_scenario(str(config_path))
        reparsed = yaml.safe_load(scenario.to_yaml())
        assert reparsed == scenario.raw
        assert yaml.safe_dump(reparsed, sort_keys=True) == scenario.to_yaml()

    def test_alpha_star_resolves(self, config_path):
        scenario = load_scenario(str(config_path))
        assert scenario.payment.alpha == pytest.approx(1.0 / 12.0)

    def test_overrides_reach_nested_keys(self, config_path):
        scenario = load_scenario(str(config_path),
                                 ["mechanism.horizon=12", "seed=5"])
        assert scenario.horizon == 12 and scenario.seed == 5

    def test_missing_key_names_the_path(self, tmp_path):
        path = tmp_path / "bad.yaml"
        doc = {k: v for k, v in COUNTEREXAMPLE_DOC.items() if k != "payment"}
        path.write_text(yaml.safe_dump(doc))
        with pytest.raises(ConfigError, match="payment"):
            load_scenario(str(path))

    def test_unknown_mechanism_kind(self, config_path):
        with pytest.raises(ConfigError, match="mechanism.kind"):
            load_scenario(str(config_path), ["mechanism.kind=lottery"])

    def test_alpha_cap_enforced(self, config_path):
        with pytest.raises(ConfigError, match="payment.alpha"):
            load_scenario(str(config_path), ["payment.alpha=0.5"])

    def test_horizon_floor_enforced(self, config_path):
        with pytest.raises(ConfigError, match="mechanism.horizon"):
            load_scenario(str(config_path), ["mechanism.horizon=3"])

    def test_yaml_parse_error_carries_line(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("seed: 1\n  bad indent: [\n")
        with pytest.raises(ConfigError, match="line"):
            load_scenario(str(path))

    def test_env_seed_override(self, config_path, monkeypatch):
        monkeypatch.setenv("MATCHSIM_SEED", "123")
        scenario = load_scenario(str(config_path))
        assert scenario.seed == 123 and scenario.raw["seed"] == 123

    def test_bad_override_shape(self):
        with pytest.raises(ConfigError):
            apply_overrides({}, ["novalue"])


class TestSimulate:
    def test_counterexample_run(self, config_path, tmp_path, capsys):
        assert main(["simulate", str(config_path)]) == 0
        out = capsys.readouterr().out
        assert "final matching: [0, 1]" in out
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["worker_utilities"] == [5.0, 0.0]
        assert report["_meta"]["tool"] == "matchsim"

    def test_outputs_carry_version_and_hash(self, config_path, tmp_path):
        main(["simulate", str(config_path)])
        first = (tmp_path / "out" / "trace.csv").read_text().splitlines()[0]
        assert first.startswith("# matchsim 0.1.0 config=")
        meta = json.loads((tmp_path / "out" / "trace.jsonl")
                          .read_text().splitlines()[0])
        assert meta["version"] == "0.1.0" and len(meta["config"]) == 12

    def test_deterministic_byte_identical(self, config_path, tmp_path):
        main(["simulate", str(config_path)])
        once = (tmp_path / "out" / "trace.csv").read_bytes()
        main(["simulate", str(config_path)])
        assert (tmp_path / "out" / "trace.csv").read_bytes() == once

    def test_single_worker_market(self, tmp_path, capsys):
        doc = {
            "seed": 0, "output_dir": str(tmp_path / "o"),
            "instance": {"inline": {
                "productivity": [[2.0]], "cost": [[0.5]], "quality": [1.5],
                "max_effort": 1.0, "effort_step": 1.0}},
            "mechanism": {"kind": "FILI", "horizon": 4},
            "payment": {"family": "quadratic", "alpha": "star"},
        }
        path = tmp_path / "one.yaml"
        path.write_text(yaml.safe_dump(doc))
        assert main(["simulate", str(path)]) == 0
        report = json.loads((tmp_path / "o" / "report.json").read_text())
        alpha = 1.0 / (2.0 * 2.0)
        want = max(0.0, (alpha * 4.0 * 1.5 - 0.5) * 1.0)
        assert report["worker_utilities"][0] == pytest.approx(want)

    def test_config_error_exit_code(self, config_path):
        assert main(["simulate", str(config_path), "mechanism.horizon=1"]) == 2

    def test_missing_file_exit_code(self):
        assert main(["simulate", "/nonexistent/conf.yaml"]) == 2


class TestVerify:
    def test_stability_pass(self, config_path):
        assert main(["verify", str(config_path), "--check", "stability"]) == 0

    def test_stability_fail_prints_pair(self, config_path, capsys):
        code = main(["verify", str(config_path), "--check", "stability",
                     "mechanism.kind=average-output-assortative"])
        assert code == 1
        assert "blocking pair: worker 0, task 0" in capsys.readouterr().out

    def test_equilibrium_single_instance(self, config_path):
        assert main(["verify", str(config_path), "--check", "equilibrium"]) == 0

    def test_efficiency_requires_assumptions(self, config_path, capsys):
        code = main(["verify", str(config_path), "--check", "efficiency"])
        assert code == 2
        assert "assumption" in capsys.readouterr().err

    def test_efficiency_waiver(self, config_path):
        assert main(["verify", str(config_path), "--check", "efficiency",
                     "--waive-assumptions"]) == 0


class TestOtherCommands:
    def test_generate_instance_round_trip(self, tmp_path):
        doc = {
            "seed": 1, "output_dir": str(tmp_path / "g"),
            "instance": {"generate": {
                "n_workers": 4, "productivity_upper_1": 20.0,
                "productivity_upper_2": 14.0, "cost_intercept": 2.0,
                "cost_slope": 0.05, "quality_offset": 2.0,
                "quality_scale": 10.0, "seed": 3}},
            "mechanism": {"kind": "FILI", "horizon": 8},
            "payment": {"family": "quadratic", "alpha": "star"},
        }
        path = tmp_path / "gen.yaml"
        path.write_text(yaml.safe_dump(doc))
        out = tmp_path / "inst"
        assert main(["generate-instance", str(path), "--out", str(out)]) == 0
        from matchsim import MarketInstance
        text = (tmp_path / "inst.txt").read_text()
        body = "\n".join(ln for ln in text.splitlines()
                         if not ln.startswith("#")) + "\n"
        a = MarketInstance.from_text(body)
        b = MarketInstance.from_json(
            json.dumps({k: v for k, v in
                        json.loads((tmp_path / "inst.json").read_text()).items()
                        if k != "_meta"}))
        assert a.to_text() == b.to_text()

    def test_sweep_writes_grid(self, config_path, tmp_path):
        assert main(["sweep", str(config_path), "--points", "5"]) == 0
        lines = (tmp_path / "out" / "sweep_quadratic.csv").read_text().splitlines()
        assert lines[1] == "param,revenue,profit"
        assert len(lines) == 2 + 5

    def test_reproduce_counterexample(self, tmp_path):
        assert main(["reproduce", "counterexample-223", "--out",
                     str(tmp_path)]) == 0
        assert (tmp_path / "counterexample_223.csv").exists()

    def test_reproduce_appendix_h(self, tmp_path):
        assert main(["reproduce", "appendix-h", "--out", str(tmp_path)]) == 0
