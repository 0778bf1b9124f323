"""Tests for the command-line experiments."""
import json

import pytest

from halpern_rates.services import fuzz_service
from halpern_rates.services.fuzz_service import Outcome
from run import cli


@pytest.fixture(autouse=True)
def testing_env(monkeypatch):
    monkeypatch.setenv("HALPERN_ENV", "testing")


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / "results"


def with_lines(path, *lines):
    with open(path, "a", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")
    return str(path)


def load_report(out_dir, command):
    return json.loads((out_dir / f"{command}.json").read_text(encoding="utf-8"))


class TestRates:
    """Tests for the rates command."""

    def test_rates(self, runner, sample_config_file, out_dir):
        path = with_lines(sample_config_file, "rates.tower = false")
        result = runner.invoke(cli, ["rates", "--config", path, "--out", str(out_dir), "--digit-budget", "50"])
        assert result.exit_code == 0, result.output
        assert "Φ̃=1024" in result.output
        report = load_report(out_dir, "rates")
        assert report["format"] == "halpern-report/1"
        assert report["seed"] == 7
        assert report["status"] == "ok"
        row = report["rows"][0]
        assert row["Φ"] == {"mode": "exact", "value": "16384"}
        assert "tower" not in row

    def test_rates_with_aoyama(self, runner, sample_config_file, out_dir):
        path = with_lines(
            sample_config_file,
            "rates.tower = false",
            'aoyama = {"eps": 1.5, "L": 0.5, "theta": {"kind": "identity"}, '
            '"psi": {"kind": "constant", "value": 1}}',
        )
        result = runner.invoke(cli, ["rates", "--config", path, "--out", str(out_dir), "--digit-budget", "50"])
        assert result.exit_code == 0, result.output
        section = load_report(out_dir, "rates")["aoyama"]
        assert section["Θ"]["value"] == "2"

    def test_missing_config(self, runner, tmp_path):
        result = runner.invoke(cli, ["rates", "--config", str(tmp_path / "absent.conf")])
        assert result.exit_code == 2
        assert "configuration error" in result.output

    def test_invalid_section(self, runner, sample_config_file, out_dir):
        path = with_lines(sample_config_file, "ball.radius = 2")
        result = runner.invoke(cli, ["rates", "--config", path, "--out", str(out_dir)])
        assert result.exit_code == 2


class TestExperiments:
    """Tests for the trace-driven experiments."""

    @pytest.mark.parametrize("map_lines", [(), ("map.kind = rotation", "map.angle = 0.3")])
    def test_asreg(self, runner, sample_config_file, out_dir, map_lines):
        path = with_lines(sample_config_file, *map_lines)
        result = runner.invoke(cli, ["asreg", "--config", path, "--out", str(out_dir)])
        assert result.exit_code == 0, result.output
        report = load_report(out_dir, "asreg")
        assert report["N"] == 16384
        row = report["rows"][0]
        assert row["verdict"] == "respected"
        assert row["step_index"] <= int(row["phi_tilde"]["value"])
        assert row["residual_index"] <= int(row["phi"]["value"])
        trace_csv = (out_dir / "asreg_trace.csv").read_text(encoding="utf-8")
        assert trace_csv.startswith("# format:")

    @pytest.mark.parametrize("map_lines", [(), ("map.kind = rotation", "map.angle = 0.3")])
    def test_browder(self, runner, sample_config_file, out_dir, map_lines):
        path = with_lines(sample_config_file, *map_lines)
        result = runner.invoke(cli, ["browder", "--config", path, "--out", str(out_dir)])
        assert result.exit_code == 0, result.output
        report = load_report(out_dir, "browder")
        assert report["monotone"] is True
        row = report["rows"][0]
        assert row["verdict"] == "respected"
        assert row["K"]["mode"] == "exact"
        assert row["K_emp"] <= int(row["K"]["value"])
        assert (out_dir / "browder_family.csv").exists()

    def test_browder_eps_range(self, runner, sample_config_file, out_dir):
        path = with_lines(sample_config_file, "eps = [1.5]")
        result = runner.invoke(cli, ["browder", "--config", path, "--out", str(out_dir)])
        assert result.exit_code == 2

    def test_meta_log_estimate(self, runner, sample_config_file, out_dir):
        """Test a tower beyond the digit budget still gives a verdict."""
        result = runner.invoke(
            cli, ["meta", "--config", str(sample_config_file), "--out", str(out_dir), "--log-estimate"]
        )
        assert result.exit_code == 0, result.output
        row = load_report(out_dir, "meta")["rows"][0]
        assert row["N_emp"] == 0
        assert row["estimate"] is True


class TestFuzz:
    """Tests for the fuzz command."""

    def test_single_oracle(self, runner, out_dir):
        result = runner.invoke(
            cli, ["fuzz", "--oracle", "sin_sum", "--trials", "5", "--seed", "1", "--out", str(out_dir)]
        )
        assert result.exit_code == 0, result.output
        data = json.loads((out_dir / "fuzz_sin_sum.json").read_text(encoding="utf-8"))
        assert data["accepted"] == 5
        assert data["passed"] is True

    def test_violated_oracle_exit_code(self, runner, out_dir, monkeypatch):
        """Test a corrupted oracle fails the run with exit code 3."""

        def always_violated(rng, setting):
            return Outcome(residual=1.0, excess=1.0, config=setting.to_dict())

        monkeypatch.setitem(fuzz_service._CAMPAIGNS, "sin_sum", (always_violated, 1e-12))
        result = runner.invoke(
            cli, ["fuzz", "--oracle", "sin_sum", "--trials", "3", "--seed", "1", "--out", str(out_dir)]
        )
        assert result.exit_code == 3, result.output
        data = json.loads((out_dir / "fuzz_sin_sum.json").read_text(encoding="utf-8"))
        assert data["passed"] is False
        assert data["violations"] == 3
        assert load_report(out_dir, "fuzz")["status"] == "inequality-violation"

    def test_unknown_oracle(self, runner):
        result = runner.invoke(cli, ["fuzz", "--oracle", "nope"])
        assert result.exit_code == 2
