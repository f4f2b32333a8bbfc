"""
End-to-end tests of the command-line interface
"""

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from funcnet.core.dataset_io import read_csv
from funcnet.core.serialization import load_model
from funcnet.main import main

FIXTURES = Path(__file__).parent / "fixtures"


def run(capsys, *args):
    code = main([str(a) for a in args])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_config(path: Path, content: dict) -> Path:
    path.write_text(json.dumps(content))
    return path


def read_column(path: Path) -> np.ndarray:
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    return np.array([float(row[0]) for row in rows[1:]])


@pytest.fixture
def small_config(tmp_path):
    return write_config(
        tmp_path / "small.json",
        {
            "scenario": {"n": 60, "grid_size": 30},
            "train": {"max_epochs": 5},
            "model": {"hidden": [2], "grid_size": 11},
        },
    )


@pytest.fixture
def dataset(tmp_path, small_config, capsys):
    path = tmp_path / "data.csv"
    assert run(capsys, "simulate", "--config", small_config, "--seed", 7, "--out", path)[0] == 0
    return path


class TestSimulate:
    def test_default_size(self, tmp_path, capsys):
        path = tmp_path / "linear.csv"
        code, out, _ = run(capsys, "simulate", "--seed", 7, "--out", path)
        assert code == 0
        assert "n=1500 m=200 scenario=linear" in out
        lines = path.read_text().splitlines()
        assert len(lines) == 1501
        assert len(lines[0].split(",")) == 201

    def test_byte_identical(self, tmp_path, small_config, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, "simulate", "--config", small_config, "--seed", 3, "--out", a)
        run(capsys, "simulate", "--config", small_config, "--seed", 3, "--out", b)
        assert a.read_bytes() == b.read_bytes()

    def test_flags_override_file(self, tmp_path, capsys):
        config = write_config(tmp_path / "c.json", {"seed": 3, "scenario": {"n": 10, "grid_size": 8}})
        _, out, _ = run(capsys, "simulate", "--config", config, "--out", tmp_path / "d.csv")
        assert "seed=3" in out
        _, out, _ = run(capsys, "simulate", "--config", config, "--seed", 5, "--out", tmp_path / "d.csv")
        assert "seed=5" in out and "n=10 m=8" in out

    def test_logistic_scenario(self, tmp_path, small_config, capsys):
        path = tmp_path / "binary.csv"
        code, out, _ = run(capsys, "simulate", "--config", small_config, "--scenario", "logistic", "--out", path)
        assert code == 0 and "response=binary" in out
        assert set(read_csv(path).responses) <= {0.0, 1.0}

    def test_unknown_scenario(self, tmp_path, capsys):
        code, _, err = run(capsys, "simulate", "--scenario", "bogus", "--out", tmp_path / "x.csv")
        assert code == 2
        assert "scenario.name" in err and "linear" in err

    def test_out_required(self, capsys):
        code, _, err = run(capsys, "simulate")
        assert code == 2 and "--out" in err

    def test_unwritable_path(self, tmp_path, small_config, capsys):
        code, _, err = run(capsys, "simulate", "--config", small_config, "--out", tmp_path / "missing" / "x.csv")
        assert code == 1 and "missing" in err


class TestFitAndPredict:
    def test_round_trip_reproduces_training_metrics(self, tmp_path, small_config, dataset, capsys):
        model_path, preds = tmp_path / "model.json", tmp_path / "preds.csv"
        code, out, _ = run(
            capsys, "fit", "--config", small_config, "--data", dataset, "--model", "FDNN", "--out", model_path
        )
        assert code == 0
        report = json.loads(out.strip().splitlines()[-1])
        assert report["kind"] == "fdnn" and report["test_metrics"]["classification_error"] is None

        code, _, _ = run(capsys, "predict", "--weights", model_path, "--data", dataset, "--out", preds)
        assert code == 0
        yhat = read_column(preds)
        y = read_csv(dataset).responses
        train = np.array(report["train_idx"])
        rmse = np.sqrt(np.mean((yhat[train] - y[train]) ** 2))
        assert rmse == pytest.approx(report["train_metrics"]["rmse"], abs=1e-10)

    def test_flm_and_stdout_predictions(self, tmp_path, dataset, capsys):
        model_path = tmp_path / "flm.json"
        code, out, _ = run(capsys, "fit", "--data", dataset, "--model", "FLM", "--out", model_path)
        assert code == 0 and json.loads(out.strip().splitlines()[-1])["epochs_run"] == 0
        code, out, _ = run(capsys, "predict", "--weights", model_path, "--data", dataset)
        lines = out.strip().splitlines()
        assert code == 0 and lines[0] == "prediction" and len(lines) == 61

    def test_fdnn_rejects_other_grids(self, tmp_path, small_config, dataset, capsys):
        model_path = tmp_path / "fdnn.json"
        run(capsys, "fit", "--config", small_config, "--data", dataset, "--model", "FDNN", "--out", model_path)
        code, _, err = run(capsys, "predict", "--weights", model_path, "--data", FIXTURES / "growth_like.csv")
        assert code == 1
        assert "30 points" in err and "31 points" in err

    def test_fbnn_projects_other_grids(self, tmp_path, small_config, dataset, capsys):
        model_path = tmp_path / "fbnn.json"
        code, _, _ = run(
            capsys, "fit", "--config", small_config, "--data", dataset, "--model", "FBNN(2)", "--out", model_path
        )
        assert code == 0
        other = write_config(tmp_path / "fine.json", {"scenario": {"n": 12, "grid_size": 41}})
        fine = tmp_path / "fine.csv"
        run(capsys, "simulate", "--config", other, "--out", fine)
        code, out, _ = run(capsys, "predict", "--weights", model_path, "--data", fine)
        assert code == 0 and len(out.strip().splitlines()) == 13

        coarse_config = write_config(tmp_path / "coarse.json", {"scenario": {"n": 12, "grid_size": 10}})
        coarse = tmp_path / "coarse.csv"
        run(capsys, "simulate", "--config", coarse_config, "--out", coarse)
        code, out, _ = run(capsys, "predict", "--weights", model_path, "--data", coarse)
        assert code == 0 and len(out.strip().splitlines()) == 13

        preds = tmp_path / "on_grid.csv"
        run(capsys, "predict", "--weights", model_path, "--data", dataset, "--out", preds)
        direct = load_model(model_path).model.predict(read_csv(dataset).predictors)
        np.testing.assert_allclose(read_column(preds), direct, atol=1e-8)

    def test_binary_fixture(self, tmp_path, capsys):
        config = write_config(tmp_path / "c.json", {"train": {"max_epochs": 5}, "model": {"hidden": [2], "grid_size": 11}})
        model_path = tmp_path / "growth.json"
        code, out, _ = run(
            capsys, "fit", "--config", config, "--data", FIXTURES / "growth_like.csv", "--out", model_path
        )
        assert code == 0
        report = json.loads(out.strip().splitlines()[-1])
        assert 0.0 <= report["test_metrics"]["classification_error"] <= 1.0
        code, out, _ = run(capsys, "predict", "--weights", model_path, "--data", FIXTURES / "growth_like.csv")
        assert out.splitlines()[0] == "probability,label"
        assert load_model(model_path).domain == (1.0, 18.0)

    def test_missing_data(self, tmp_path, capsys):
        code, _, err = run(capsys, "fit", "--data", tmp_path / "absent.csv")
        assert code == 1 and "absent.csv" in err

    def test_malformed_data(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("grid,0,0.5,1\n1,2,3\n")
        code, _, err = run(capsys, "fit", "--data", path)
        assert code == 1 and "row 2, column 4" in err

    def test_bad_config(self, tmp_path, dataset, capsys):
        config = tmp_path / "broken.json"
        config.write_text("{")
        assert run(capsys, "fit", "--config", config, "--data", dataset)[0] == 2
        config = write_config(tmp_path / "unknown.json", {"train": {"learning_rate": 0.1}})
        code, _, err = run(capsys, "fit", "--config", config, "--data", dataset)
        assert code == 2 and "train.learning_rate" in err


class TestBenchmark:
    @pytest.fixture
    def config(self, tmp_path):
        return write_config(
            tmp_path / "bench.json",
            {
                "train": {"max_epochs": 3},
                "benchmark": {
                    "reps": 3,
                    "n_train": 40,
                    "n_validation": 15,
                    "n_test": 20,
                    "grid_size": 21,
                    "models": ["FLM", "FDNN(2)", "FBNN(2)"],
                },
            },
        )

    def test_tables(self, tmp_path, config, capsys):
        code, out, _ = run(capsys, "benchmark", "--config", config, "--out", tmp_path / "a")
        assert code == 0 and out.startswith("Test RMSE")
        cells = (tmp_path / "a" / "cells.csv").read_text().splitlines()
        summary = (tmp_path / "a" / "summary.csv").read_text().splitlines()
        assert len(cells) == 1 + 9 and len(summary) == 1 + 3

        run(capsys, "benchmark", "--config", config, "--out", tmp_path / "b")
        assert (tmp_path / "a" / "cells.csv").read_bytes() == (tmp_path / "b" / "cells.csv").read_bytes()

    def test_flags(self, tmp_path, config, capsys):
        code, _, _ = run(
            capsys, "benchmark", "--config", config, "--reps", 1, "--model", "FLM", "--scenario", "cam",
            "--out", tmp_path / "c",
        )
        assert code == 0
        cells = (tmp_path / "c" / "cells.csv").read_text().splitlines()
        assert len(cells) == 2 and cells[1].startswith("cam,FLM,0,")

    def test_zero_reps(self, tmp_path, capsys):
        code, _, err = run(capsys, "benchmark", "--reps", 0, "--out", tmp_path / "z")
        assert code == 2 and "benchmark.reps" in err

    def test_failed_cells(self, tmp_path, capsys):
        config = write_config(
            tmp_path / "fail.json",
            {
                "benchmark": {
                    "reps": 1,
                    "n_train": 10,
                    "n_validation": 5,
                    "n_test": 10,
                    "grid_size": 21,
                    "models": [{"kind": "flm", "ridge": 0.0, "n_basis": 30}],
                }
            },
        )
        code, _, err = run(capsys, "benchmark", "--config", config, "--out", tmp_path / "f")
        assert code == 1 and "1 of 1" in err
        assert (tmp_path / "f" / "cells.csv").exists()


def test_unknown_command(capsys):
    assert run(capsys, "train")[0] == 2
