import json
import os

import pytest

from samplize.cli import cli, parse_state_spec
from samplize.errors import ConfigError
from samplize.harness import csv_body


CONFIG = (
    "method = \"query\"\n"
    "epsilons = [0.3, 0.2, 0.1]\n"
    "trials = 2\n"
    "base_seed = 7\n"
    "\n"
    "[pair]\n"
    "kind = \"psi_x\"\n"
    "x = 0.6\n"
)


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "exp.toml"
    path.write_text(CONFIG)
    return str(path)


class TestStateSpec:
    def test_named_states(self):
        assert parse_state_spec("zero").dim == 2
        assert parse_state_spec("zero:2").dim == 4
        assert abs(parse_state_spec("plus").amplitudes[1] - 2**-0.5) < 1e-12
        assert parse_state_spec("one").amplitudes[1] == 1.0
        assert abs(parse_state_spec("psi_x:0.3").amplitudes[1] - 0.3) < 1e-15
        assert parse_state_spec("haar:2:7").dim == 4

    def test_malformed(self):
        for bad in ("psi_x", "haar:2", "wat", "psi_x:pi"):
            with pytest.raises(ConfigError):
                parse_state_spec(bad)


class TestExitCodes:
    def test_demo_success(self, capsys):
        assert cli(["demo"]) == 0
        out = capsys.readouterr().out
        assert "0.70711" in out
        assert "samples" in out

    def test_missing_config(self, capsys):
        assert cli(["run", "--config", "/no/such/file.toml"]) == 1

    def test_unknown_flag(self, capsys):
        assert cli(["run", "--config", "x", "--frobnicate"]) == 1
        assert "usage" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        assert cli(["simulate"]) == 1

    def test_bad_config_contents(self, tmp_path, capsys):
        path = tmp_path / "bad.toml"
        path.write_text("method = \"query\"\n")
        assert cli(["run", "--config", str(path)]) == 1
        assert "required" in capsys.readouterr().err


class TestRunAndFit:
    def test_run_writes_csv_and_figure(self, config_file, tmp_path, capsys):
        out = str(tmp_path / "results.csv")
        assert cli(["run", "--config", config_file, "--out", out]) == 0
        assert os.path.exists(out)
        assert os.path.exists(str(tmp_path / "results.png"))
        assert "6 rows" in capsys.readouterr().out

    def test_run_reproducible_bodies(self, config_file, tmp_path):
        a = str(tmp_path / "a.csv")
        b = str(tmp_path / "b.csv")
        assert cli(["run", "--config", config_file, "--out", a, "--no-plot"]) == 0
        assert cli(["run", "--config", config_file, "--out", b, "--no-plot",
                    "--workers", "4"]) == 0
        assert csv_body(open(a).read()) == csv_body(open(b).read())

    def test_fit_pipeline(self, config_file, tmp_path, capsys):
        out = str(tmp_path / "results.csv")
        assert cli(["run", "--config", config_file, "--out", out, "--no-plot"]) == 0
        capsys.readouterr()
        png = str(tmp_path / "scaling.png")
        assert cli(["fit", "--in", out, "--method", "query", "--plot-out", png]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["method"] == "query"
        assert len(report["points"]) == 3
        assert os.path.exists(png)

    def test_fit_method_without_rows(self, config_file, tmp_path, capsys):
        out = str(tmp_path / "results.csv")
        assert cli(["run", "--config", config_file, "--out", out, "--no-plot"]) == 0
        assert cli(["fit", "--in", out, "--method", "samplized", "--no-plot"]) == 2


class TestCalibrate:
    def test_calibrate_output(self, capsys):
        assert cli(["calibrate", "--state", "plus", "--delta", "0.2"]) == 0
        blob = json.loads(capsys.readouterr().out)
        assert blob["rounds"] >= 1
        assert blob["choi_distance"] <= 0.1
        assert blob["controlled"] is False

    def test_calibrate_controlled(self, capsys):
        assert cli(["calibrate", "--state", "psi_x:0.5", "--delta", "0.3",
                    "--controlled"]) == 0
        blob = json.loads(capsys.readouterr().out)
        assert blob["controlled"] is True

    def test_calibrate_bad_state(self, capsys):
        assert cli(["calibrate", "--state", "wat", "--delta", "0.2"]) == 1
