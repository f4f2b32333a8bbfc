"""
Plain multilayer perceptron on the raw curve samples (the "NN" baseline)
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from funcnet.core.errors import InvalidArgumentError
from funcnet.core.grid import Grid
from funcnet.core.random import make_rng
from funcnet.core.simulate import CurveSet
from funcnet.core.training import Split, fit
from funcnet.models.activation import ActivationKind
from funcnet.models.base import FunctionalModel, Parameters, as_gradient_vector
from funcnet.models.dense import DenseLayer, check_chain, dense_backward, dense_forward, glorot_layer
from funcnet.schemas.architecture import NetworkArchitecture
from funcnet.schemas.config import TrainConfig
from funcnet.schemas.report import FitReport

logger = logging.getLogger(__name__)


@dataclass
class MlpCache:
    inputs: List[np.ndarray]
    pre_activations: List[np.ndarray]
    model_id: int


class MlpModel(FunctionalModel):
    kind = "mlp"

    def __init__(self, input_grid: Grid, input_count: int, layers: Sequence[DenseLayer]):
        super().__init__(input_grid, input_count)
        if not layers or layers[-1].output_dim != 1:
            raise InvalidArgumentError("the last layer must have a single output unit")
        check_chain(layers, self.input_dim)
        self.layers = list(layers)

    @property
    def input_dim(self) -> int:
        return self.input_count * len(self.input_grid)

    @property
    def output_activation(self) -> ActivationKind:
        return self.layers[-1].activation

    def parameters(self) -> Parameters:
        params = {}
        for index, layer in enumerate(self.layers):
            params[f"dense.{index}.weights"] = layer.weights
            params[f"dense.{index}.biases"] = layer.biases
        return params

    def forward(self, x):
        x, single = self.as_batch(x)
        out, inputs, pre_activations = dense_forward(self.layers, x.reshape(x.shape[0], -1))
        yhat = out[:, 0]
        return (float(yhat[0]) if single else yhat), MlpCache(inputs, pre_activations, id(self))

    def backward(self, cache: MlpCache, dl_dyhat) -> Parameters:
        if cache.model_id != id(self):
            raise InvalidArgumentError("cache was not produced by this model")
        d_out = as_gradient_vector(dl_dyhat, cache.inputs[0].shape[0])[:, None]
        grads, _ = dense_backward(self.layers, cache.inputs, cache.pre_activations, d_out, "dense")
        return {name: grads[name] for name in self.parameters()}

    def architecture(self) -> Dict[str, Any]:
        return {
            "input_count": self.input_count,
            "dense": [{"units": layer.output_dim, "activation": layer.activation.value} for layer in self.layers],
        }

    @classmethod
    def from_architecture(cls, arch: Dict[str, Any], input_grid: Grid) -> "MlpModel":
        layers, width = [], arch["input_count"] * len(input_grid)
        for spec in arch["dense"]:
            layers.append(DenseLayer(np.zeros((width, spec["units"])), np.zeros(spec["units"]), spec["activation"]))
            width = spec["units"]
        return cls(input_grid, arch["input_count"], layers)


def mlp_init(arch: NetworkArchitecture, input_grid: Grid, seed) -> MlpModel:
    rng = make_rng(seed)
    layers, width = [], arch.input_count * len(input_grid)
    for spec in arch.hidden:
        layers.append(glorot_layer(rng, width, spec.neurons, spec.activation))
        width = spec.neurons
    layers.append(glorot_layer(rng, width, 1, arch.output_activation))
    model = MlpModel(input_grid, arch.input_count, layers)
    logger.debug(f"Initialized MLP with {model.parameter_count()} parameters")
    return model


def mlp_fit(
    arch: NetworkArchitecture, data: CurveSet, split: Split, cfg: TrainConfig, seed=0
) -> Tuple[MlpModel, FitReport]:
    model = mlp_init(arch, data.grid, seed)
    return model, fit(model, data, split, cfg, label="NN")
