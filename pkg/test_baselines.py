"""
Tests for the FLM, FNN and MLP comparison models and the model registry
"""

import numpy as np
import pytest

from funcnet.core.bspline import uniform_bspline_basis
from funcnet.core.errors import InvalidArgumentError, NumericFailureError
from funcnet.core.grid import make_uniform_grid
from funcnet.core.simulate import CurveSet, MaternParams, ResponseKind, sample_gp_values
from funcnet.core.training import gradient_check, make_split
from funcnet.models.activation import ActivationKind
from funcnet.models.dense import DenseLayer
from funcnet.models.flm import FlmModel, LinkKind, flm_fit
from funcnet.models.fnn import FnnModel, fnn_backward, fnn_fit, fnn_forward, fnn_init
from funcnet.models.mlp import MlpModel, mlp_fit, mlp_init
from funcnet.models.registry import build_model, model_class
from funcnet.schemas.architecture import HiddenLayerSpec, NetworkArchitecture
from funcnet.schemas.config import LossKind, ModelConfig, ModelKind, TrainConfig

LINEAR = ActivationKind.LINEAR


@pytest.fixture
def grid():
    return make_uniform_grid(51)


@pytest.fixture
def curves(grid):
    return sample_gp_values(200, grid, MaternParams(), seed=21)[:, None, :]


def randomize(model, seed: int, scale: float = 0.5):
    rng = np.random.default_rng(seed)
    for param in model.parameters().values():
        param[...] = scale * rng.standard_normal(param.shape)
    return model


class TestFlm:
    def test_exact_recovery(self, grid, curves):
        truth = FlmModel(grid, uniform_bspline_basis(7), 0.3, [[1.0, -2.0, 0.5, 0.0, 1.5, -1.0, 2.0]])
        y = truth.predict(curves)
        model = flm_fit(CurveSet(grid, curves, y), ridge=0.0)
        np.testing.assert_allclose(model.predict(curves), y, atol=1e-6)

    def test_residuals_orthogonal_to_design(self, grid, curves):
        y = np.random.default_rng(3).standard_normal(len(curves))
        model = flm_fit(CurveSet(grid, curves, y), ridge=0.0)
        design = model.design_matrix(curves)
        np.testing.assert_allclose(design.T @ (y - model.predict(curves)), 0.0, atol=1e-8)

    def test_singular_without_ridge(self, grid, curves):
        data = CurveSet(grid, curves[:4], np.zeros(4))
        with pytest.raises(NumericFailureError, match="ridge"):
            flm_fit(data, ridge=0.0)
        flm_fit(data, ridge=1e-3)

    def test_logistic_link(self, grid, curves):
        truth = FlmModel(grid, uniform_bspline_basis(7), 0.0, [[3.0, -3.0, 2.0, 0.0, -2.0, 3.0, -3.0]])
        p = 1.0 / (1.0 + np.exp(-truth.predict(curves)))
        y = (np.random.default_rng(5).random(len(curves)) < p).astype(float)
        model = flm_fit(CurveSet(grid, curves, y, ResponseKind.BINARY), ridge=1e-3)
        assert model.link is LinkKind.LOGISTIC
        assert model.output_activation is ActivationKind.SIGMOID
        probabilities = model.predict(curves)
        assert np.all((probabilities > 0) & (probabilities < 1))
        design = model.design_matrix(curves)
        theta = np.concatenate([model.alpha, model.beta_coef.ravel()])
        penalty = np.full(theta.size, 1e-3)
        penalty[0] = 0.0
        assert np.linalg.norm(design.T @ (probabilities - y) + penalty * theta) / len(y) < 1e-8

    def test_checks(self, grid, curves):
        with pytest.raises(InvalidArgumentError):
            FlmModel(grid, uniform_bspline_basis(7), 0.0, np.zeros((1, 5)))
        with pytest.raises(InvalidArgumentError):
            FlmModel(grid, uniform_bspline_basis(7), 0.0, np.zeros((1, 7)), ridge=-1.0)
        model = FlmModel(grid, uniform_bspline_basis(7), 0.0, np.zeros((1, 7)))
        with pytest.raises(InvalidArgumentError):
            model.beta_function(1)
        with pytest.raises(InvalidArgumentError):
            gradient_check(model, curves[:3], np.zeros(3), LossKind.SQUARED_ERROR)
        with pytest.raises(NotImplementedError):
            model.backward(None, np.zeros(3))


class TestFnn:
    def test_zero_parameters(self, grid, curves):
        model = fnn_init(NetworkArchitecture(hidden=[HiddenLayerSpec(neurons=4)]), grid, seed=0)
        for param in model.parameters().values():
            param[...] = 0.0
        assert np.all(fnn_forward(model, curves)[0] == 0.0)

    def test_reduces_to_flm(self, grid, curves):
        flm = FlmModel(grid, uniform_bspline_basis(7), 0.7, [[0.5, -1.0, 2.0, 0.0, 1.0, -0.5, 0.25]])
        beta = flm.beta_function(0).values
        fnn = FnnModel(grid, beta[None, None, :], [0.7], LINEAR, [DenseLayer([[1.0]], [0.0], LINEAR)])
        np.testing.assert_allclose(fnn.predict(curves), flm.predict(curves), atol=1e-6)

    @pytest.mark.parametrize("seed", range(5))
    def test_gradient_check(self, seed, grid, curves):
        arch = NetworkArchitecture(hidden=[HiddenLayerSpec(neurons=3)], functional_neurons=2)
        model = randomize(fnn_init(arch, grid, seed=seed), seed)
        y = np.random.default_rng(seed).standard_normal(6)
        errors = gradient_check(model, curves[:6], y, LossKind.SQUARED_ERROR, max_entries=40, seed=seed)
        assert max(errors.values()) <= 1e-5, errors

    def test_functional_gradient_readout(self, grid, curves):
        model = FnnModel(grid, np.zeros((1, 1, len(grid))), [0.0], LINEAR, [DenseLayer([[2.0]], [0.0], LINEAR)])
        _, cache = model.forward(curves[:1])
        grads = fnn_backward(model, cache, [1.0])
        np.testing.assert_allclose(grads["functional.weights"][0, 0], 2.0 * curves[0, 0])

    def test_dense_chain_checked(self, grid):
        with pytest.raises(InvalidArgumentError):
            FnnModel(grid, np.zeros((2, 1, len(grid))), [0.0, 0.0], LINEAR, [DenseLayer(np.zeros((3, 1)), [0.0], LINEAR)])
        with pytest.raises(InvalidArgumentError):
            FnnModel(grid, np.zeros((1, 1, len(grid))), [0.0], LINEAR, [DenseLayer(np.zeros((1, 2)), [0.0, 0.0], LINEAR)])


class TestMlp:
    def test_zero_parameters(self, grid, curves):
        model = mlp_init(NetworkArchitecture(), grid, seed=0)
        for param in model.parameters().values():
            param[...] = 0.0
        assert np.all(model.predict(curves) == 0.0)
        assert model.input_dim == len(grid)

    @pytest.mark.parametrize("seed", range(5))
    def test_gradient_check(self, seed, grid, curves):
        arch = NetworkArchitecture(hidden=[HiddenLayerSpec(neurons=3), HiddenLayerSpec(neurons=2)])
        model = randomize(mlp_init(arch, grid, seed=seed), seed, scale=0.2)
        y = (np.random.default_rng(seed).random(6) > 0.5).astype(float)
        model.layers[-1].activation = ActivationKind.SIGMOID
        errors = gradient_check(model, curves[:6], y, LossKind.BINARY_CROSS_ENTROPY, max_entries=40, seed=seed)
        assert max(errors.values()) <= 1e-5, errors

    def test_layers_checked(self, grid):
        with pytest.raises(InvalidArgumentError):
            MlpModel(grid, 1, [DenseLayer(np.zeros((10, 1)), [0.0], LINEAR)])
        with pytest.raises(InvalidArgumentError):
            DenseLayer(np.zeros((3, 2)), [0.0], LINEAR)


@pytest.mark.parametrize("fit_fn,label", [(fnn_fit, "FNN"), (mlp_fit, "NN")])
def test_fit_runs_the_shared_loop(fit_fn, label, grid, curves):
    data = CurveSet(grid, curves, curves[:, 0].mean(axis=1))
    arch = NetworkArchitecture(hidden=[HiddenLayerSpec(neurons=3)])
    cfg = TrainConfig(max_epochs=5, early_stopping=False, lr=0.1)
    model, report = fit_fn(arch, data, make_split(len(data), 50, 0, 0), cfg, seed=1)
    assert report.model == label and report.epochs_run == 5
    assert all(b <= a for a, b in zip(report.train_loss, report.train_loss[1:]))
    assert model.predict(curves[:2]).shape == (2,)


class TestRegistry:
    @pytest.mark.parametrize("kind", list(ModelKind))
    def test_build_every_kind(self, kind, grid, curves):
        cfg = ModelConfig(kind=kind, hidden=[2], grid_size=11)
        model = build_model(cfg, grid, 1, ResponseKind.BINARY, seed=0)
        assert model.kind == kind.value
        assert model_class(kind.value) is type(model)
        assert model.output_activation is ActivationKind.SIGMOID
        assert model.predict(curves[:3]).shape == (3,)

    def test_unknown_kind(self):
        with pytest.raises(InvalidArgumentError, match="unknown model kind"):
            model_class("svm")

    def test_labels(self):
        cfg = ModelConfig.from_label("fbnn(4, 4)")
        assert cfg.kind is ModelKind.FBNN and cfg.hidden == [4, 4]
        assert cfg.name == "FBNN(4,4)"
        assert ModelConfig.from_label("NN").name == "NN"
        with pytest.raises(ValueError):
            ModelConfig.from_label("GAM")
