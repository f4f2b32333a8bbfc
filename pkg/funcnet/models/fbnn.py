"""
Functional Basis Neural Network

Same topology as the FDNN, but every parameter function is a B-spline expansion:

    b_k(s)      = sum_b B_kb v*_b(s)
    w_jk(s, t)  = sum_c sum_d W_kjcd v_c(s) v_d(t)
    w_j(t)      = sum_c W_jc v_c(t)                      (output layer)

so a continuous neuron needs only the basis scores A_jd = integral v_d(t) H_j(t) dt of the
incoming functions. Design matrices of the bases on the fixed grids are computed once at
construction; the scores are recomputed every forward pass.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

import numpy as np

from funcnet.core.bspline import (
    BsplineBasis,
    bspline_design,
    make_bspline_basis,
    project_curves,
    uniform_bspline_basis,
)
from funcnet.core.errors import InvalidArgumentError
from funcnet.core.grid import BivariateGridFunction, Grid, make_uniform_grid
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
from funcnet.models.fdnn import ContinuousLayer, FdnnModel, FunctionalOutputLayer
from funcnet.schemas.architecture import NetworkArchitecture

logger = logging.getLogger(__name__)

SMOOTHING_BASIS_SIZE = 15


class FbnnLayer:
    """Continuous hidden layer with basis-expanded bias functions and weight surfaces"""

    def __init__(
        self,
        in_grid: Grid,
        out_grid: Grid,
        bias_basis: BsplineBasis,
        out_basis: BsplineBasis,
        in_basis: BsplineBasis,
        bias_coef: np.ndarray,
        weight_coef: np.ndarray,
        activation: ActivationKind,
    ):
        bias_coef = np.array(bias_coef, dtype=float)
        weight_coef = np.array(weight_coef, dtype=float)
        if weight_coef.ndim != 4 or weight_coef.shape[2:] != (out_basis.n_basis, in_basis.n_basis):
            raise InvalidArgumentError(
                f"weight coefficients must have shape (K, J, {out_basis.n_basis}, {in_basis.n_basis}), "
                f"got {weight_coef.shape}"
            )
        if bias_coef.shape != (weight_coef.shape[0], bias_basis.n_basis):
            raise InvalidArgumentError(
                f"bias coefficients must have shape ({weight_coef.shape[0]}, {bias_basis.n_basis}), "
                f"got {bias_coef.shape}"
            )
        self.in_grid = in_grid
        self.out_grid = out_grid
        self.bias_basis = bias_basis
        self.out_basis = out_basis
        self.in_basis = in_basis
        self.bias_coef = bias_coef
        self.weight_coef = weight_coef
        self.activation = ActivationKind(activation)
        self.bias_design = bspline_design(bias_basis, out_grid)
        self.out_design = bspline_design(out_basis, out_grid)
        self.in_design = bspline_design(in_basis, in_grid)
        self.score_matrix = self.in_design * in_grid.weights[:, None]

    @property
    def j_in(self) -> int:
        return self.weight_coef.shape[1]

    @property
    def k_out(self) -> int:
        return self.weight_coef.shape[0]

    def scores(self, h: np.ndarray) -> np.ndarray:
        """A[n, j, d] = integral v_d(t) H_j(t) dt"""
        return h @ self.score_matrix

    def bias_values(self) -> np.ndarray:
        return self.bias_coef @ self.bias_design.T

    def weight_values(self) -> np.ndarray:
        """Every reconstructed surface, shape (K, J, m_s, m_t)"""
        return np.einsum("sc,kjcd,td->kjst", self.out_design, self.weight_coef, self.in_design, optimize=True)


class FbnnOutputLayer:
    def __init__(self, in_grid: Grid, in_basis: BsplineBasis, bias, weight_coef: np.ndarray, activation):
        weight_coef = np.array(weight_coef, dtype=float)
        if weight_coef.ndim != 2 or weight_coef.shape[1] != in_basis.n_basis:
            raise InvalidArgumentError(
                f"output coefficients must have shape (J, {in_basis.n_basis}), got {weight_coef.shape}"
            )
        self.in_grid = in_grid
        self.in_basis = in_basis
        self.bias = np.array(bias, dtype=float).reshape(1)
        self.weight_coef = weight_coef
        self.activation = ActivationKind(activation)
        self.in_design = bspline_design(in_basis, in_grid)
        self.score_matrix = self.in_design * in_grid.weights[:, None]

    @property
    def j_in(self) -> int:
        return self.weight_coef.shape[0]


@dataclass
class FbnnCache:
    activations: List[np.ndarray]
    scores: List[np.ndarray]
    pre_activations: List[np.ndarray]
    output_scores: np.ndarray
    output_pre: np.ndarray
    model_id: int


class FbnnModel(FunctionalModel):
    kind = "fbnn"

    def __init__(self, input_count: int, hidden: Sequence[FbnnLayer], output: FbnnOutputLayer):
        input_grid = hidden[0].in_grid if hidden else output.in_grid
        super().__init__(input_grid, input_count)
        expected_j, grid = self.input_count, input_grid
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
            params[f"hidden.{index}.bias_coef"] = layer.bias_coef
            params[f"hidden.{index}.weight_coef"] = layer.weight_coef
        params["output.weight_coef"] = self.output.weight_coef
        params["output.bias"] = self.output.bias
        return params

    def forward(self, x):
        return fbnn_forward(self, x)

    def backward(self, cache: FbnnCache, dl_dyhat) -> Parameters:
        return fbnn_backward(self, cache, dl_dyhat)

    def ingest(self, points: Sequence[np.ndarray], values: Sequence[Sequence[np.ndarray]]) -> np.ndarray:
        """Project curves observed on their own points onto the model grid

        `values[i][r]` holds predictor r of sample i observed at `points[i]`. The smoothing
        basis is sized by the sparsest curve, so data grids coarser than the model grid work.
        Returns an (N, R, m) array on the model's input grid.
        """
        sizes = [len(p) for p in points]
        if not sizes or min(sizes) < 1:
            raise InvalidArgumentError("every curve needs at least one observation")
        size = min(SMOOTHING_BASIS_SIZE, min(sizes))
        basis = uniform_bspline_basis(size, min(4, size))
        n = len(values)
        out = np.empty((n, self.input_count, len(self.input_grid)))
        for r in range(self.input_count):
            out[:, r, :] = project_curves(basis, points, [sample[r] for sample in values], self.input_grid)
        return out

    def architecture(self) -> Dict[str, Any]:
        def basis(b: BsplineBasis):
            return b.describe()

        return {
            "input_count": self.input_count,
            "hidden": [
                {
                    "neurons": layer.k_out,
                    "grid": grid_payload(layer.out_grid),
                    "activation": layer.activation.value,
                    "bias_basis": basis(layer.bias_basis),
                    "out_basis": basis(layer.out_basis),
                    "in_basis": basis(layer.in_basis),
                }
                for layer in self.hidden
            ],
            "output_basis": basis(self.output.in_basis),
            "output_activation": self.output.activation.value,
        }

    @classmethod
    def from_architecture(cls, arch: Dict[str, Any], input_grid: Grid) -> "FbnnModel":
        def basis(spec) -> BsplineBasis:
            return make_bspline_basis(spec["order"], spec["interior_knots"])

        hidden = []
        grid, j_in = input_grid, arch["input_count"]
        for spec in arch["hidden"]:
            out_grid = grid_from_payload(spec["grid"])
            bias_basis, out_basis, in_basis = basis(spec["bias_basis"]), basis(spec["out_basis"]), basis(spec["in_basis"])
            k = spec["neurons"]
            hidden.append(
                FbnnLayer(
                    grid,
                    out_grid,
                    bias_basis,
                    out_basis,
                    in_basis,
                    np.zeros((k, bias_basis.n_basis)),
                    np.zeros((k, j_in, out_basis.n_basis, in_basis.n_basis)),
                    spec["activation"],
                )
            )
            grid, j_in = out_grid, k
        out_basis = basis(arch["output_basis"])
        output = FbnnOutputLayer(grid, out_basis, 0.0, np.zeros((j_in, out_basis.n_basis)), arch["output_activation"])
        return cls(arch["input_count"], hidden, output)


def fbnn_init(arch: NetworkArchitecture, input_grid: Grid, seed) -> FbnnModel:
    """Coefficients i.i.d. uniform on [-1, 1] / sqrt(J * D); bias coefficients zero"""
    rng = make_rng(seed)
    hidden = []
    grid, j_in = input_grid, arch.input_count
    for index, spec in enumerate(arch.hidden):
        if spec.inputs is not None and spec.inputs != j_in:
            raise InvalidArgumentError(
                f"hidden layer {index} declares {spec.inputs} inputs but the previous layer has {j_in} neurons"
            )
        if spec.interior_knots_in is not None:
            in_basis = make_bspline_basis(spec.spline_order, spec.interior_knots_in)
            if in_basis.n_basis != spec.n_basis_in:
                raise InvalidArgumentError(
                    f"hidden layer {index}: D = {spec.n_basis_in} but the input basis has "
                    f"{in_basis.n_basis} functions"
                )
        else:
            in_basis = uniform_bspline_basis(spec.n_basis_in, spec.spline_order)
        bias_basis = uniform_bspline_basis(spec.n_basis_bias, spec.spline_order)
        out_basis = uniform_bspline_basis(spec.n_basis_out, spec.spline_order)
        out_grid = make_uniform_grid(spec.grid_size)
        bound = 1.0 / np.sqrt(j_in * in_basis.n_basis)
        weight_coef = uniform_init(rng, bound, (spec.neurons, j_in, out_basis.n_basis, in_basis.n_basis))
        hidden.append(
            FbnnLayer(
                grid,
                out_grid,
                bias_basis,
                out_basis,
                in_basis,
                np.zeros((spec.neurons, bias_basis.n_basis)),
                weight_coef,
                spec.activation,
            )
        )
        grid, j_in = out_grid, spec.neurons
    out_basis = uniform_bspline_basis(arch.output_n_basis, arch.output_spline_order)
    out_coef = uniform_init(rng, 1.0 / np.sqrt(j_in * out_basis.n_basis), (j_in, out_basis.n_basis))
    output = FbnnOutputLayer(grid, out_basis, 0.0, out_coef, arch.output_activation)
    model = FbnnModel(arch.input_count, hidden, output)
    logger.debug(f"Initialized FBNN with {model.parameter_count()} parameters")
    return model


def fbnn_forward(model: FbnnModel, x):
    h, single = model.as_batch(x)
    activations, scores, pre_activations = [h], [], []
    for layer in model.hidden:
        a = layer.scores(h)
        z = layer.bias_values()[None] + np.einsum(
            "sc,kjcd,njd->nks", layer.out_design, layer.weight_coef, a, optimize=True
        )
        h = activate(layer.activation, z)
        scores.append(a)
        pre_activations.append(z)
        activations.append(h)
    out = model.output
    output_scores = h @ out.score_matrix
    output_pre = out.bias[0] + np.einsum("jc,njc->n", out.weight_coef, output_scores, optimize=True)
    yhat = activate(out.activation, output_pre)
    cache = FbnnCache(activations, scores, pre_activations, output_scores, output_pre, id(model))
    return (float(yhat[0]) if single else yhat), cache


def fbnn_backward(model: FbnnModel, cache: FbnnCache, dl_dyhat) -> Parameters:
    """Coefficient gradients, summed over the samples in the cache

    The adjoint of a score A_jd is spread back over H_j(t) through v_d(t) times the
    quadrature weights, so the returned values are exact partial derivatives of the
    discretized loss.
    """
    if cache.model_id != id(model) or len(cache.pre_activations) != len(model.hidden):
        raise InvalidArgumentError("cache was not produced by this model")
    n = cache.output_pre.shape[0]
    g = as_gradient_vector(dl_dyhat, n) * derivative(model.output.activation, cache.output_pre)
    out = model.output
    grads: Parameters = {
        "output.weight_coef": np.einsum("n,njc->jc", g, cache.output_scores, optimize=True),
        "output.bias": np.array([g.sum()]),
    }
    # dL/dH for the last hidden layer, as plain partials on its grid points
    d_h = np.einsum("n,jc,tc->njt", g, out.weight_coef, out.score_matrix, optimize=True)
    for index in reversed(range(len(model.hidden))):
        layer = model.hidden[index]
        d_z = d_h * derivative(layer.activation, cache.pre_activations[index])
        a = cache.scores[index]
        grads[f"hidden.{index}.bias_coef"] = np.einsum("nks,sb->kb", d_z, layer.bias_design, optimize=True)
        grads[f"hidden.{index}.weight_coef"] = np.einsum(
            "nks,sc,njd->kjcd", d_z, layer.out_design, a, optimize=True
        )
        if index > 0:
            d_a = np.einsum("nks,sc,kjcd->njd", d_z, layer.out_design, layer.weight_coef, optimize=True)
            d_h = d_a @ layer.score_matrix.T
    return {name: grads[name] for name in model.parameters()}


def fbnn_grad_step(model: FbnnModel, grads: Parameters, lr: float) -> FbnnModel:
    return model.grad_step(grads, lr)


def fbnn_reconstruct_weight(layer: FbnnLayer, j: int, k: int) -> BivariateGridFunction:
    """w_jk(s, t) evaluated on out_grid x in_grid"""
    if not (0 <= j < layer.j_in and 0 <= k < layer.k_out):
        raise InvalidArgumentError(f"neuron indices (j={j}, k={k}) out of range ({layer.j_in}, {layer.k_out})")
    values = layer.out_design @ layer.weight_coef[k, j] @ layer.in_design.T
    return BivariateGridFunction(layer.out_grid, layer.in_grid, values)


def fbnn_to_fdnn(model: FbnnModel) -> FdnnModel:
    """FDNN whose grid-sampled parameters are the basis reconstructions of this FBNN"""
    hidden = [
        ContinuousLayer(layer.in_grid, layer.out_grid, layer.bias_values(), layer.weight_values(), layer.activation)
        for layer in model.hidden
    ]
    out = model.output
    output = FunctionalOutputLayer(out.in_grid, out.bias, out.weight_coef @ out.in_design.T, out.activation)
    converted = FdnnModel(model.input_count, hidden, output)
    if model.input_shift is not None:
        converted.set_input_scaling(model.input_shift, model.input_scale)
    return converted


def permute_neurons(model: FbnnModel, layer_index: int, order: Sequence[int]) -> FbnnModel:
    """Equivalent model with the neurons of one hidden layer reordered"""
    order = np.asarray(order, dtype=int)
    layer = model.hidden[layer_index]
    if sorted(order.tolist()) != list(range(layer.k_out)):
        raise InvalidArgumentError(f"{order.tolist()} is not a permutation of {layer.k_out} neurons")
    hidden = []
    for index, current in enumerate(model.hidden):
        bias_coef, weight_coef = current.bias_coef, current.weight_coef
        if index == layer_index:
            bias_coef, weight_coef = bias_coef[order], weight_coef[order]
        if index == layer_index + 1:
            weight_coef = weight_coef[:, order]
        hidden.append(
            FbnnLayer(
                current.in_grid,
                current.out_grid,
                current.bias_basis,
                current.out_basis,
                current.in_basis,
                bias_coef,
                weight_coef,
                current.activation,
            )
        )
    out = model.output
    out_coef = out.weight_coef[order] if layer_index == len(model.hidden) - 1 else out.weight_coef
    output = FbnnOutputLayer(out.in_grid, out.in_basis, out.bias, out_coef, out.activation)
    return FbnnModel(model.input_count, hidden, output)
