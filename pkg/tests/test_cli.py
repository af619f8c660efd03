import json

import pytest

from sseleak.cli import main
from test_experiment import base_config_dict


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(base_config_dict()))
    return path


class TestValidate:
    def test_ok(self, config_file, capsys):
        assert main(["validate", str(config_file)]) == 0
        assert "ok" in capsys.readouterr().out

    def test_invalid_config(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(base_config_dict(master_seed=None)))
        assert main(["validate", str(bad)]) == 2
        assert "invalid config" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["validate", str(tmp_path / "none.json")]) == 2


class TestRun:
    def test_writes_reports(self, config_file, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["run", str(config_file), "--out", str(out)]) == 0
        assert (out / "report.json").exists()
        assert (out / "metrics.csv").exists()
        assert "accuracy=" in capsys.readouterr().out

    def test_trials_override(self, config_file, tmp_path):
        out = tmp_path / "out"
        assert main(["run", str(config_file), "--out", str(out), "--trials", "1"]) == 0
        lines = (out / "metrics.csv").read_text().strip().split("\n")
        assert len(lines) == 2

    def test_failed_trials_nonzero_exit(self, tmp_path):
        data = base_config_dict(tau=0)
        data["attack_params"]["base_rec"] = 100
        data["attack_params"]["conf_rec"] = 100
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(data))
        out = tmp_path / "out"
        assert main(["run", str(path), "--out", str(out)]) == 1
        report = json.loads((out / "report.json").read_text())
        assert report["failed_trials"] == 2

    def test_no_output_dir_is_an_error(self, config_file, capsys):
        assert main(["run", str(config_file)]) == 2
        assert "output" in capsys.readouterr().err


class TestSweep:
    def test_grid_over_defense_parameter(self, tmp_path, capsys):
        data = base_config_dict(defense={"kind": "cgpr_padding", "k": 5, "seed": 1},
                                trials=1)
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(data))
        out = tmp_path / "sweep"
        rc = main(["sweep", str(path), "--param", "defense.k",
                   "--values", "5,20", "--out", str(out)])
        assert rc == 0
        summary = (out / "sweep.csv").read_text().strip().split("\n")
        assert summary[0].startswith("defense.k,")
        assert len(summary) == 3
        assert (out / "defense.k=5" / "metrics.csv").exists()
        assert (out / "defense.k=20" / "metrics.csv").exists()

    def test_sweep_over_tau(self, tmp_path):
        data = base_config_dict(trials=1)
        data["frequency"]["intervals"] = 30
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(data))
        out = tmp_path / "sweep"
        rc = main(["sweep", str(path), "--param", "tau",
                   "--values", "0,5", "--out", str(out)])
        assert rc == 0
        assert (out / "tau=0" / "report.json").exists()
