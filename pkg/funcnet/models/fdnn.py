"""
Functional Direct Neural Network

Continuous hidden layers map functions to functions:

    H_k(s) = sigma(b_k(s) + sum_j integral w_jk(s, t) H_j(t) dt)

and a functional output layer maps the last layer's functions to a scalar:

    yhat = sigma(b + sum_j integral w_j(t) H_j(t) dt)

Bias functions and weight surfaces are stored directly as their values on the layer
grids. Backpropagation carries adjoint functions delta_j(t) (derivatives of the loss with
respect to H_j(t), as densities) through the layers, integrating over s with the same
trapezoidal weights as the forward pass, so gradients are exact for the discretized
objective.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from funcnet.core.errors import InvalidArgumentError
from funcnet.core.grid import (
    BivariateGridFunction,
    Grid,
    GridFunction,
    make_uniform_grid,
    nearest_indices,
)
from funcnet.core.random import make_rng
from funcnet.models.activation import ActivationKind, activate, derivative
from funcnet.models.base import (
    FunctionalModel,
    Parameters,
    as_gradient_vector,
    grid_from_payload,
    grid_payload,
    uniform_init,
)
from funcnet.schemas.architecture import NetworkArchitecture

logger = logging.getLogger(__name__)


class ContinuousLayer:
    """K continuous neurons fed by J functions on in_grid, emitting functions on out_grid"""

    def __init__(
        self,
        in_grid: Grid,
        out_grid: Grid,
        biases: np.ndarray,
        weights: np.ndarray,
        activation: ActivationKind,
    ):
        biases = np.array(biases, dtype=float)
        weights = np.array(weights, dtype=float)
        if weights.ndim != 4 or weights.shape[2:] != (len(out_grid), len(in_grid)):
            raise InvalidArgumentError(
                f"weight surfaces must have shape (K, J, {len(out_grid)}, {len(in_grid)}), "
                f"got {weights.shape}"
            )
        if biases.shape != (weights.shape[0], len(out_grid)):
            raise InvalidArgumentError(
                f"bias functions must have shape ({weights.shape[0]}, {len(out_grid)}), got {biases.shape}"
            )
        self.in_grid = in_grid
        self.out_grid = out_grid
        self.biases = biases
        self.weights = weights
        self.activation = ActivationKind(activation)

    @property
    def j_in(self) -> int:
        return self.weights.shape[1]

    @property
    def k_out(self) -> int:
        return self.weights.shape[0]

    def bias_function(self, k: int) -> GridFunction:
        return GridFunction(self.out_grid, self.biases[k])

    def weight_surface(self, j: int, k: int) -> BivariateGridFunction:
        return BivariateGridFunction(self.out_grid, self.in_grid, self.weights[k, j])

    def pre_activation(self, h: np.ndarray) -> np.ndarray:
        """(N, J, m_t) -> (N, K, m_s)"""
        weighted = h * self.in_grid.weights
        return self.biases[None] + np.einsum("kjst,njt->nks", self.weights, weighted, optimize=True)


class FunctionalOutputLayer:
    """Functional neuron producing the scalar prediction"""

    def __init__(self, in_grid: Grid, bias, weights: np.ndarray, activation: ActivationKind):
        weights = np.array(weights, dtype=float)
        if weights.ndim != 2 or weights.shape[1] != len(in_grid):
            raise InvalidArgumentError(
                f"output weights must have shape (J, {len(in_grid)}), got {weights.shape}"
            )
        self.in_grid = in_grid
        self.bias = np.array(bias, dtype=float).reshape(1)
        self.weights = weights
        self.activation = ActivationKind(activation)

    @property
    def j_in(self) -> int:
        return self.weights.shape[0]

    def weight_function(self, j: int) -> GridFunction:
        return GridFunction(self.in_grid, self.weights[j])


@dataclass
class FdnnCache:
    activations: List[np.ndarray]
    pre_activations: List[np.ndarray]
    output_pre: np.ndarray
    model_id: int


class FdnnModel(FunctionalModel):
    kind = "fdnn"

    def __init__(self, input_count: int, hidden: Sequence[ContinuousLayer], output: FunctionalOutputLayer):
        input_grid = hidden[0].in_grid if hidden else output.in_grid
        super().__init__(input_grid, input_count)
        expected_j = self.input_count
        grid = input_grid
        for index, layer in enumerate(hidden):
            if layer.j_in != expected_j:
                raise InvalidArgumentError(
                    f"hidden layer {index} expects {layer.j_in} inputs but receives {expected_j}"
                )
            grid.require_same(layer.in_grid, f"hidden layer {index} input grid")
            expected_j, grid = layer.k_out, layer.out_grid
        if output.j_in != expected_j:
            raise InvalidArgumentError(f"output layer expects {output.j_in} inputs but receives {expected_j}")
        grid.require_same(output.in_grid, "output layer input grid")
        self.hidden = list(hidden)
        self.output = output

    @property
    def output_activation(self) -> ActivationKind:
        return self.output.activation

    def parameters(self) -> Parameters:
        params = {}
        for index, layer in enumerate(self.hidden):
            params[f"hidden.{index}.biases"] = layer.biases
            params[f"hidden.{index}.weights"] = layer.weights
        params["output.weights"] = self.output.weights
        params["output.bias"] = self.output.bias
        return params

    def quadrature_metric(self) -> Dict[str, Any]:
        metric = {}
        for index, layer in enumerate(self.hidden):
            metric[f"hidden.{index}.biases"] = layer.out_grid.weights
            metric[f"hidden.{index}.weights"] = np.outer(layer.out_grid.weights, layer.in_grid.weights)
        metric["output.weights"] = self.output.in_grid.weights
        return metric

    def forward(self, x):
        return fdnn_forward(self, x)

    def backward(self, cache: FdnnCache, dl_dyhat) -> Parameters:
        return fdnn_backward(self, cache, dl_dyhat)

    def architecture(self) -> Dict[str, Any]:
        return {
            "input_count": self.input_count,
            "hidden": [
                {
                    "neurons": layer.k_out,
                    "grid": grid_payload(layer.out_grid),
                    "activation": layer.activation.value,
                }
                for layer in self.hidden
            ],
            "output_activation": self.output.activation.value,
        }

    @classmethod
    def from_architecture(cls, arch: Dict[str, Any], input_grid: Grid) -> "FdnnModel":
        hidden = []
        grid, j_in = input_grid, arch["input_count"]
        for spec in arch["hidden"]:
            out_grid = grid_from_payload(spec["grid"])
            k = spec["neurons"]
            hidden.append(
                ContinuousLayer(
                    grid,
                    out_grid,
                    np.zeros((k, len(out_grid))),
                    np.zeros((k, j_in, len(out_grid), len(grid))),
                    spec["activation"],
                )
            )
            grid, j_in = out_grid, k
        output = FunctionalOutputLayer(grid, 0.0, np.zeros((j_in, len(grid))), arch["output_activation"])
        return cls(arch["input_count"], hidden, output)


def init_bound(j_in: int, k_out: int, grid: Grid) -> float:
    """Scaled uniform bound keeping contract outputs O(1) whatever the grid size"""
    measure = len(grid) * grid.weights.mean()
    return float(np.sqrt(6.0 / (j_in * measure + k_out)) / grid.span)


def fdnn_init(arch: NetworkArchitecture, input_grid: Grid, seed) -> FdnnModel:
    """Uniform weight surfaces, zero bias functions, zero scalar bias"""
    rng = make_rng(seed)
    hidden = []
    grid, j_in = input_grid, arch.input_count
    for index, spec in enumerate(arch.hidden):
        if spec.inputs is not None and spec.inputs != j_in:
            raise InvalidArgumentError(
                f"hidden layer {index} declares {spec.inputs} inputs but the previous layer has {j_in} neurons"
            )
        out_grid = make_uniform_grid(spec.grid_size)
        bound = init_bound(j_in, spec.neurons, grid)
        weights = uniform_init(rng, bound, (spec.neurons, j_in, len(out_grid), len(grid)))
        hidden.append(
            ContinuousLayer(grid, out_grid, np.zeros((spec.neurons, len(out_grid))), weights, spec.activation)
        )
        grid, j_in = out_grid, spec.neurons
    out_weights = uniform_init(rng, init_bound(j_in, 1, grid), (j_in, len(grid)))
    output = FunctionalOutputLayer(grid, 0.0, out_weights, arch.output_activation)
    model = FdnnModel(arch.input_count, hidden, output)
    logger.debug(f"Initialized FDNN with {model.parameter_count()} parameters")
    return model


def fdnn_forward(model: FdnnModel, x):
    """Prediction(s) and the per-layer cache

    A list of R GridFunctions (or an (R, m) array) yields a scalar prediction; an
    (N, R, m) array yields N predictions.
    """
    h, single = model.as_batch(x)
    activations = [h]
    pre_activations = []
    for layer in model.hidden:
        z = layer.pre_activation(h)
        h = activate(layer.activation, z)
        pre_activations.append(z)
        activations.append(h)
    out = model.output
    output_pre = out.bias[0] + np.einsum("jt,njt->n", out.weights, h * out.in_grid.weights, optimize=True)
    yhat = activate(out.activation, output_pre)
    cache = FdnnCache(activations, pre_activations, output_pre, id(model))
    return (float(yhat[0]) if single else yhat), cache


def fdnn_backward(model: FdnnModel, cache: FdnnCache, dl_dyhat) -> Parameters:
    """Functional gradients of the loss for every parameter

    Output layer: dL/db = g, dL/dw_j(t) = g H_j(t) with g = dL/dyhat * sigma'(pre).
    Hidden layers: e_k(s) = delta_k(s) sigma'(z_k(s)); dL/db_k(s) = e_k(s);
    dL/dw_jk(s, t) = e_k(s) H_j(t); delta_j(t) = sum_k integral e_k(s) w_jk(s, t) ds.
    Gradients are summed over the samples in the cache.
    """
    if cache.model_id != id(model) or len(cache.pre_activations) != len(model.hidden):
        raise InvalidArgumentError("cache was not produced by this model")
    n = cache.output_pre.shape[0]
    g = as_gradient_vector(dl_dyhat, n) * derivative(model.output.activation, cache.output_pre)
    last = cache.activations[-1]
    grads: Parameters = {
        "output.weights": np.einsum("n,njt->jt", g, last, optimize=True),
        "output.bias": np.array([g.sum()]),
    }
    delta = g[:, None, None] * model.output.weights[None]
    for index in reversed(range(len(model.hidden))):
        layer = model.hidden[index]
        e = delta * derivative(layer.activation, cache.pre_activations[index])
        h_prev = cache.activations[index]
        grads[f"hidden.{index}.biases"] = e.sum(axis=0)
        grads[f"hidden.{index}.weights"] = np.einsum("nks,njt->kjst", e, h_prev, optimize=True)
        if index > 0:
            delta = np.einsum(
                "nks,kjst->njt", e * layer.out_grid.weights, layer.weights, optimize=True
            )
    return {name: grads[name] for name in model.parameters()}


def fdnn_grad_step(model: FdnnModel, grads: Parameters, lr: float) -> FdnnModel:
    """Pointwise gradient descent in the discretized function space"""
    return model.grad_step(grads, lr)


def resample_hidden_grids(model: FdnnModel, grid_sizes: Sequence[int]) -> FdnnModel:
    """Copy of the model on new uniform hidden grids, values taken from the nearest old point"""
    if len(grid_sizes) != len(model.hidden):
        raise InvalidArgumentError(f"need {len(model.hidden)} grid sizes, got {len(grid_sizes)}")
    hidden = []
    grid = model.input_grid
    t_index: Optional[np.ndarray] = None
    for layer, size in zip(model.hidden, grid_sizes):
        out_grid = make_uniform_grid(size, layer.out_grid.points[0], layer.out_grid.points[-1])
        s_index = nearest_indices(layer.out_grid, out_grid)
        weights = layer.weights[:, :, s_index, :]
        if t_index is not None:
            weights = weights[..., t_index]
        hidden.append(ContinuousLayer(grid, out_grid, layer.biases[:, s_index], weights, layer.activation))
        grid, t_index = out_grid, s_index
    out = model.output
    out_weights = out.weights if t_index is None else out.weights[:, t_index]
    resampled = FdnnModel(model.input_count, hidden, FunctionalOutputLayer(grid, out.bias, out_weights, out.activation))
    if model.input_shift is not None:
        resampled.set_input_scaling(model.input_shift, model.input_scale)
    return resampled
