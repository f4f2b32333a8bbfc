"""
Functional neural network baseline

A first layer of functional neurons maps the R input curves to K scalars,

    H_k = sigma(b_k + sum_r integral W_kr(t) X_r(t) dt),

and ordinary dense layers take it from there. The last dense layer has a single unit
carrying the output activation.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from funcnet.core.errors import InvalidArgumentError
from funcnet.core.grid import Grid, GridFunction
from funcnet.core.random import make_rng
from funcnet.core.simulate import CurveSet
from funcnet.core.training import Split, fit
from funcnet.models.activation import ActivationKind, activate, derivative
from funcnet.models.base import FunctionalModel, Parameters, as_gradient_vector, uniform_init
from funcnet.models.dense import DenseLayer, check_chain, dense_backward, dense_forward, glorot_layer
from funcnet.models.fdnn import init_bound
from funcnet.schemas.architecture import NetworkArchitecture
from funcnet.schemas.config import TrainConfig
from funcnet.schemas.report import FitReport

logger = logging.getLogger(__name__)


@dataclass
class FnnCache:
    functional_pre: np.ndarray
    inputs: List[np.ndarray]
    pre_activations: List[np.ndarray]
    batch: np.ndarray
    model_id: int


class FnnModel(FunctionalModel):
    kind = "fnn"

    def __init__(
        self,
        input_grid: Grid,
        functional_weights: np.ndarray,
        functional_biases: np.ndarray,
        functional_activation: ActivationKind,
        dense: Sequence[DenseLayer],
    ):
        functional_weights = np.array(functional_weights, dtype=float)
        if functional_weights.ndim != 3 or functional_weights.shape[2] != len(input_grid):
            raise InvalidArgumentError(
                f"functional weights must have shape (K, R, {len(input_grid)}), got {functional_weights.shape}"
            )
        super().__init__(input_grid, functional_weights.shape[1])
        functional_biases = np.array(functional_biases, dtype=float).reshape(-1)
        if functional_biases.shape != (functional_weights.shape[0],):
            raise InvalidArgumentError("need one bias per functional neuron")
        if not dense or dense[-1].output_dim != 1:
            raise InvalidArgumentError("the last dense layer must have a single output unit")
        check_chain(dense, functional_weights.shape[0])
        self.functional_weights = functional_weights
        self.functional_biases = functional_biases
        self.functional_activation = ActivationKind(functional_activation)
        self.dense = list(dense)

    @property
    def output_activation(self) -> ActivationKind:
        return self.dense[-1].activation

    def parameters(self) -> Parameters:
        params = {
            "functional.weights": self.functional_weights,
            "functional.biases": self.functional_biases,
        }
        for index, layer in enumerate(self.dense):
            params[f"dense.{index}.weights"] = layer.weights
            params[f"dense.{index}.biases"] = layer.biases
        return params

    def quadrature_metric(self) -> Dict[str, Any]:
        return {"functional.weights": self.input_grid.weights}

    def weight_function(self, k: int, r: int = 0) -> GridFunction:
        return GridFunction(self.input_grid, self.functional_weights[k, r])

    def forward(self, x):
        x, single = self.as_batch(x)
        pre = self.functional_biases + np.einsum(
            "krt,nrt->nk", self.functional_weights, x * self.input_grid.weights, optimize=True
        )
        out, inputs, pre_activations = dense_forward(self.dense, activate(self.functional_activation, pre))
        yhat = out[:, 0]
        cache = FnnCache(pre, inputs, pre_activations, x, id(self))
        return (float(yhat[0]) if single else yhat), cache

    def backward(self, cache: FnnCache, dl_dyhat) -> Parameters:
        """Dense backprop, then the functional gradient sigma'(.) X_r(t) of the first layer"""
        if cache.model_id != id(self):
            raise InvalidArgumentError("cache was not produced by this model")
        n = cache.batch.shape[0]
        d_out = as_gradient_vector(dl_dyhat, n)[:, None]
        grads, d_h = dense_backward(self.dense, cache.inputs, cache.pre_activations, d_out, "dense")
        d_pre = d_h * derivative(self.functional_activation, cache.functional_pre)
        grads["functional.weights"] = np.einsum("nk,nrt->krt", d_pre, cache.batch, optimize=True)
        grads["functional.biases"] = d_pre.sum(axis=0)
        return {name: grads[name] for name in self.parameters()}

    def architecture(self) -> Dict[str, Any]:
        return {
            "input_count": self.input_count,
            "functional_neurons": self.functional_weights.shape[0],
            "functional_activation": self.functional_activation.value,
            "dense": [{"units": layer.output_dim, "activation": layer.activation.value} for layer in self.dense],
        }

    @classmethod
    def from_architecture(cls, arch: Dict[str, Any], input_grid: Grid) -> "FnnModel":
        k = arch["functional_neurons"]
        dense, width = [], k
        for spec in arch["dense"]:
            dense.append(DenseLayer(np.zeros((width, spec["units"])), np.zeros(spec["units"]), spec["activation"]))
            width = spec["units"]
        return cls(
            input_grid,
            np.zeros((k, arch["input_count"], len(input_grid))),
            np.zeros(k),
            arch["functional_activation"],
            dense,
        )


def fnn_init(arch: NetworkArchitecture, input_grid: Grid, seed) -> FnnModel:
    """Scaled-uniform functional weights, Glorot dense layers, zero biases"""
    rng = make_rng(seed)
    k = arch.functional_neurons
    weights = uniform_init(rng, init_bound(arch.input_count, k, input_grid), (k, arch.input_count, len(input_grid)))
    dense, width = [], k
    for spec in arch.hidden:
        dense.append(glorot_layer(rng, width, spec.neurons, spec.activation))
        width = spec.neurons
    dense.append(glorot_layer(rng, width, 1, arch.output_activation))
    model = FnnModel(input_grid, weights, np.zeros(k), arch.functional_activation, dense)
    logger.debug(f"Initialized FNN with {model.parameter_count()} parameters")
    return model


def fnn_forward(model: FnnModel, x):
    return model.forward(x)


def fnn_backward(model: FnnModel, cache: FnnCache, dl_dyhat) -> Parameters:
    return model.backward(cache, dl_dyhat)


def fnn_fit(
    arch: NetworkArchitecture, data: CurveSet, split: Split, cfg: TrainConfig, seed=0
) -> Tuple[FnnModel, FitReport]:
    """Initialize on the dataset grid and train with the shared loop"""
    model = fnn_init(arch, data.grid, seed)
    return model, fit(model, data, split, cfg, label="FNN")
