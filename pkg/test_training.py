"""
Tests for losses, splits, the training loop, metrics and the benchmark driver
"""

import numpy as np
import pytest

from funcnet.core.benchmark import benchmark, cell_train_config, summarize, summary_table, write_report
from funcnet.core.errors import GridMismatchError, InvalidArgumentError, NumericFailureError
from funcnet.core.grid import make_uniform_grid
from funcnet.core.simulate import (
    CurveSet,
    MaternParams,
    ResponseKind,
    Scenario,
    ScenarioKind,
    simulate_curve_set,
    true_response_values,
)
from funcnet.core.training import (
    Split,
    evaluate,
    fit,
    gradient_check,
    loss_and_grad,
    make_split,
    metrics_for,
    split_from_config,
)
from funcnet.models.activation import ActivationKind
from funcnet.models.base import FunctionalModel
from funcnet.models.flm import flm_fit
from funcnet.models.registry import build_model
from funcnet.schemas.config import BenchmarkConfig, LossKind, ModelConfig, ModelKind, SplitConfig, TrainConfig
from funcnet.schemas.report import BenchmarkCell, BenchmarkReport


@pytest.fixture
def data():
    return simulate_curve_set(Scenario(), 60, make_uniform_grid(21), MaternParams(), seed=17)


def small_fdnn(data, seed=0, response=ResponseKind.CONTINUOUS):
    cfg = ModelConfig(kind=ModelKind.FDNN, hidden=[2], grid_size=11)
    return build_model(cfg, data.grid, 1, response, seed)


def small_benchmark(**overrides) -> BenchmarkConfig:
    fields = dict(
        reps=2,
        n_train=40,
        n_validation=15,
        n_test=20,
        grid_size=21,
        models=[ModelConfig(kind=ModelKind.FLM), ModelConfig(kind=ModelKind.FDNN, hidden=[2], grid_size=11)],
    )
    fields.update(overrides)
    return BenchmarkConfig(**fields)


class TestLosses:
    def test_squared_error(self):
        assert loss_and_grad(LossKind.SQUARED_ERROR, 1.5, 1.5) == (0.0, 0.0)
        assert loss_and_grad(LossKind.SQUARED_ERROR, 2.0, 0.5) == (2.25, 3.0)

    def test_cross_entropy(self):
        loss, grad = loss_and_grad(LossKind.BINARY_CROSS_ENTROPY, 0.5, 1.0)
        assert loss == pytest.approx(np.log(2.0))
        assert grad == pytest.approx(-2.0)

    @pytest.mark.parametrize("kind,y", [(LossKind.SQUARED_ERROR, 0.3), (LossKind.BINARY_CROSS_ENTROPY, 1.0), (LossKind.BINARY_CROSS_ENTROPY, 0.0)])
    @pytest.mark.parametrize("yhat", [0.1, 0.45, 0.8])
    def test_gradient_matches_difference_quotient(self, kind, y, yhat):
        eps = 1e-6
        plus, _ = loss_and_grad(kind, yhat + eps, y)
        minus, _ = loss_and_grad(kind, yhat - eps, y)
        _, grad = loss_and_grad(kind, yhat, y)
        assert grad == pytest.approx((plus - minus) / (2 * eps), abs=1e-8)

    def test_clamped_probabilities(self):
        loss, grad = loss_and_grad(LossKind.BINARY_CROSS_ENTROPY, 0.0, 1.0)
        assert loss == pytest.approx(-np.log(1e-12))
        assert np.isfinite(grad)

    def test_cross_entropy_needs_labels(self):
        with pytest.raises(InvalidArgumentError):
            loss_and_grad(LossKind.BINARY_CROSS_ENTROPY, 0.5, 0.3)

    def test_arrays(self):
        losses, grads = loss_and_grad(LossKind.SQUARED_ERROR, np.array([1.0, 2.0]), np.array([0.0, 0.0]))
        np.testing.assert_array_equal(losses, [1.0, 4.0])
        np.testing.assert_array_equal(grads, [2.0, 4.0])


class TestSplits:
    def test_partition(self):
        split = make_split(100, 30, 20, seed=4)
        assert (len(split.train_idx), len(split.val_idx), len(split.test_idx)) == (50, 20, 30)
        joined = np.concatenate([split.train_idx, split.val_idx, split.test_idx])
        np.testing.assert_array_equal(np.sort(joined), np.arange(100))
        again = make_split(100, 30, 20, seed=4)
        np.testing.assert_array_equal(split.test_idx, again.test_idx)

    def test_too_large(self):
        with pytest.raises(InvalidArgumentError):
            make_split(10, 5, 5, seed=0)
        with pytest.raises(InvalidArgumentError):
            make_split(10, -1, 0, seed=0)

    def test_validate(self):
        with pytest.raises(InvalidArgumentError):
            Split(np.array([0, 1]), np.array([1]), np.array([2])).validate(3)
        with pytest.raises(InvalidArgumentError):
            Split(np.array([0, 5]), np.array([], dtype=int), np.array([1])).validate(3)
        with pytest.raises(InvalidArgumentError):
            Split(np.array([], dtype=int), np.array([0]), np.array([1])).validate(3)

    def test_from_config(self):
        split = split_from_config(1500, SplitConfig(), use_validation=True, seed=1)
        assert (len(split.train_idx), len(split.val_idx), len(split.test_idx)) == (500, 500, 500)
        split = split_from_config(1500, SplitConfig(), use_validation=False, seed=1)
        assert (len(split.train_idx), len(split.val_idx)) == (1000, 0)


class TestFit:
    def test_zero_epochs(self, data):
        model = small_fdnn(data)
        before = model.predict(data.predictors)
        report = fit(model, data, make_split(60, 20, 10, seed=0), TrainConfig(max_epochs=0))
        assert report.epochs_run == 0 and report.best_epoch == 0
        assert len(report.train_loss) == 1
        np.testing.assert_array_equal(model.predict(data.predictors), before)
        assert report.test_metrics.n == 20

    def test_training_loss_never_increases(self, data):
        model = small_fdnn(data)
        cfg = TrainConfig(max_epochs=40, lr=0.5, early_stopping=False)
        report = fit(model, data, make_split(60, 20, 0, seed=0), cfg)
        losses = np.array(report.train_loss)
        assert np.all(np.diff(losses) <= 0.0)
        assert losses[-1] < losses[0]
        assert report.best_epoch == report.epochs_run
        assert report.validation_metrics is None

    def test_restored_parameters_reproduce_best_validation_loss(self, data):
        model = small_fdnn(data)
        cfg = TrainConfig(max_epochs=60, lr=2.0, patience=5)
        report = fit(model, data, make_split(60, 20, 15, seed=2), cfg)
        assert 0 <= report.best_epoch <= report.epochs_run
        best = report.val_loss[report.best_epoch]
        assert best <= report.val_loss[0]
        assert report.validation_metrics.rmse ** 2 == pytest.approx(best, rel=1e-12)

    def test_stops_when_nothing_improves(self, data):
        model = small_fdnn(data)
        before = model.predict(data.predictors)
        cfg = TrainConfig(max_epochs=50, patience=3, min_delta=1e9)
        report = fit(model, data, make_split(60, 20, 15, seed=2), cfg)
        assert report.stopped_early and report.epochs_run == 3 and report.best_epoch == 0
        np.testing.assert_allclose(model.predict(data.predictors), before)

    def test_early_stopping_needs_validation(self, data):
        with pytest.raises(InvalidArgumentError):
            fit(small_fdnn(data), data, make_split(60, 20, 0, seed=0), TrainConfig(max_epochs=5))

    def test_mini_batches(self, data):
        model = small_fdnn(data)
        cfg = TrainConfig(max_epochs=5, batch_size=8, early_stopping=False, lr=0.05)
        report = fit(model, data, make_split(60, 20, 0, seed=0), cfg)
        assert report.epochs_run == 5 and len(report.train_loss) == 6
        assert np.all(np.isfinite(report.train_loss))

    def test_divergence_reports_epoch(self, data):
        model = build_model(ModelConfig(kind=ModelKind.MLP, hidden=[3]), data.grid, 1, ResponseKind.CONTINUOUS, 0)
        cfg = TrainConfig(max_epochs=50, lr=1e200, early_stopping=False, lr_halving=False)
        with pytest.raises(NumericFailureError) as info:
            fit(model, data, make_split(60, 20, 0, seed=0), cfg)
        assert info.value.epoch is not None and info.value.epoch >= 1

    def test_direct_estimator(self, data):
        model = build_model(ModelConfig(kind=ModelKind.FLM), data.grid, 1, ResponseKind.CONTINUOUS, 0)
        split = make_split(60, 20, 0, seed=0)
        report = fit(model, data, split, TrainConfig())
        assert report.epochs_run == 0 and report.kind == "flm"
        direct = flm_fit(data.subset(split.train_idx))
        np.testing.assert_allclose(model.predict(data.predictors), direct.predict(data.predictors), atol=1e-10)

    def test_grid_must_match(self, data):
        model = build_model(ModelConfig(kind=ModelKind.FLM), make_uniform_grid(30), 1, ResponseKind.CONTINUOUS, 0)
        with pytest.raises(GridMismatchError):
            fit(model, data, make_split(60, 20, 0, seed=0), TrainConfig())

    def test_binary_fit(self):
        data = simulate_curve_set(
            Scenario(response_kind=ResponseKind.BINARY), 60, make_uniform_grid(21), MaternParams(), seed=5
        )
        model = small_fdnn(data, response=ResponseKind.BINARY)
        report = fit(model, data, make_split(60, 20, 0, seed=0), TrainConfig(max_epochs=10, early_stopping=False))
        metrics = report.test_metrics
        assert 0.0 <= metrics.classification_error <= 1.0
        assert metrics.mean_log_likelihood > 0.0

    def test_standardize(self, data):
        model = small_fdnn(data)
        cfg = TrainConfig(max_epochs=0, standardize=True)
        split = make_split(60, 20, 0, seed=0)
        fit(model, data, split, cfg)
        np.testing.assert_allclose(model.input_shift, data.predictors[split.train_idx].mean(axis=0))



class LinearReadout(FunctionalModel):
    """yhat = <w, x> on the raw samples; backward scales each partial by `skew`"""

    kind = "readout"

    def __init__(self, grid, weights, skew=None):
        super().__init__(grid, 1)
        self.weights = np.asarray(weights, dtype=float)
        self.skew = np.ones_like(self.weights) if skew is None else np.asarray(skew, dtype=float)

    def parameters(self):
        return {"weights": self.weights}

    def forward(self, x):
        x, _ = self.as_batch(x)
        return x[:, 0, :] @ self.weights, x[:, 0, :]

    def backward(self, cache, dl_dyhat):
        return {"weights": self.skew * (cache.T @ np.asarray(dl_dyhat, dtype=float))}

    @property
    def output_activation(self):
        return ActivationKind.LINEAR

    def architecture(self):
        return {}

    @classmethod
    def from_architecture(cls, arch, input_grid):
        return cls(input_grid, np.zeros(len(input_grid)))


class TestGradientCheck:
    @pytest.fixture
    def readout_data(self):
        x = np.array([[1.0, 1e-6, 1.0], [-1.0, 2e-6, 0.5], [0.5, 1.5e-6, -1.0]])[:, None, :]
        weights = np.array([0.3, 0.2, -0.1])
        # residuals of exactly one make the middle partial 2 * mean(x[:, 0, 1]) = 3e-6
        y = x[:, 0, :] @ weights - 1.0
        return x, weights, y

    def test_exact_gradient_passes(self, readout_data):
        x, weights, y = readout_data
        model = LinearReadout(make_uniform_grid(3), weights)
        assert gradient_check(model, x, y, LossKind.SQUARED_ERROR)["weights"] <= 1e-5

    def test_small_partial_with_error_is_rejected(self, readout_data):
        x, weights, y = readout_data
        model = LinearReadout(make_uniform_grid(3), weights, skew=[1.0, 1.1, 1.0])
        assert gradient_check(model, x, y, LossKind.SQUARED_ERROR)["weights"] > 0.05

    def test_partials_below_floor_are_compared_absolutely(self, readout_data):
        x, weights, y = readout_data
        x = x.copy()
        x[:, 0, 1] *= 1e-6
        model = LinearReadout(make_uniform_grid(3), weights, skew=[1.0, 1.1, 1.0])
        assert gradient_check(model, x, y, LossKind.SQUARED_ERROR)["weights"] <= 1e-10


class TestMetrics:
    def test_perfect_predictions(self, data):
        metrics = metrics_for(data.responses, data.responses, ResponseKind.CONTINUOUS)
        assert metrics.rmse == 0.0
        assert metrics.classification_error is None and metrics.mean_log_likelihood is None

    def test_constant_half(self):
        y = np.array([0.0, 1.0] * 50)
        metrics = metrics_for(np.full(100, 0.5), y, ResponseKind.BINARY)
        assert metrics.classification_error == pytest.approx(0.5)
        assert metrics.mean_log_likelihood == pytest.approx(np.log(2.0))

    def test_optimal_rmse_is_noise_level(self):
        grid = make_uniform_grid(50)
        scenario = Scenario(kind=ScenarioKind.COMPLEX_QUADRATIC, noise_sd=1.0)
        data = simulate_curve_set(scenario, 500, grid, MaternParams(), seed=8)
        eta = true_response_values(scenario, data.predictors, grid)
        assert metrics_for(eta, data.responses, ResponseKind.CONTINUOUS).rmse == pytest.approx(1.0, abs=0.1)

    def test_empty_index_set(self, data):
        with pytest.raises(InvalidArgumentError):
            evaluate(small_fdnn(data), data, [])

    def test_evaluate_on_subset(self):
        grid = make_uniform_grid(5)
        data = CurveSet(grid, np.zeros((4, 1, 5)), [0.0, 1.0, 1.0, 0.0], ResponseKind.BINARY)
        model = build_model(ModelConfig(kind=ModelKind.FLM), grid, 1, ResponseKind.BINARY, 0)
        metrics = evaluate(model, data, [0, 1])
        assert metrics.n == 2 and metrics.classification_error == pytest.approx(0.5)


class TestBenchmark:
    def test_cell_settings(self):
        train = TrainConfig(early_stopping=True, lr=0.1)
        flm = cell_train_config(ModelConfig(kind=ModelKind.FLM), train, seed=3)
        assert flm.early_stopping is False and flm.seed == 3
        fdnn = cell_train_config(ModelConfig(kind=ModelKind.FDNN, lr=0.5, max_epochs=7), train, seed=3)
        assert (fdnn.lr, fdnn.max_epochs, fdnn.early_stopping) == (0.5, 7, True)

    def test_deterministic_and_order_free(self):
        train = TrainConfig(max_epochs=5, patience=2)
        cfg = small_benchmark()
        first = benchmark(cfg, train)
        again = benchmark(cfg, train)
        assert [c.model_dump() for c in first.cells] == [c.model_dump() for c in again.cells]
        reversed_cfg = small_benchmark(models=list(reversed(cfg.models)))
        by_key = {(c.model, c.rep): c.rmse for c in benchmark(reversed_cfg, train).cells}
        assert by_key == {(c.model, c.rep): c.rmse for c in first.cells}
        assert len(first.cells) == 4 and not first.failed
        assert {s.model for s in first.summary} == {"FLM", "FDNN(2)"}
        assert all(s.n_ok == 2 and s.rmse_se is not None for s in first.summary)

    def test_single_replication(self):
        report = benchmark(small_benchmark(reps=1, models=[ModelConfig(kind=ModelKind.FLM)]), TrainConfig())
        assert len(report.cells) == 1 and len(report.summary) == 1
        assert report.summary[0].rmse_se is None
        assert report.cells[0].scenario == "linear"

    def test_failed_cells_do_not_stop_the_run(self, tmp_path):
        models = [ModelConfig(kind=ModelKind.FLM, ridge=0.0, n_basis=30, label="FLM-unpenalized"), ModelConfig(kind=ModelKind.FLM)]
        report = benchmark(small_benchmark(n_train=10, n_validation=5, models=models), TrainConfig())
        assert len(report.failed) == 2
        assert all("ridge" in cell.error for cell in report.failed)
        counts = {s.model: (s.n_ok, s.n_failed) for s in report.summary}
        assert sorted(counts.values()) == [(0, 2), (2, 0)]
        paths = write_report(report, tmp_path / "out", ResponseKind.CONTINUOUS)
        assert [p.name for p in paths] == ["cells.csv", "summary.csv", "summary.txt"]
        assert "failed" in paths[2].read_text()
        assert paths[0].read_text().splitlines()[0].startswith("scenario,model,rep,seed,status")

    def test_summary_table(self):
        cells = [
            BenchmarkCell(scenario="linear", model="FLM", rep=rep, seed=rep, rmse=value)
            for rep, value in enumerate([1.0, 1.2])
        ]
        report_summary = summarize(cells)
        assert report_summary[0].rmse_mean == pytest.approx(1.1)
        assert report_summary[0].rmse_se == pytest.approx(0.1)
        text = summary_table(BenchmarkReport(cells=cells, summary=report_summary), ResponseKind.CONTINUOUS)
        assert text.splitlines()[0] == "Test RMSE, mean (standard error)"
        assert "1.100 (0.100)" in text
