"""
Fully connected layers shared by the FNN and MLP baselines
"""

from typing import List, Sequence, Tuple

import numpy as np

from funcnet.core.errors import InvalidArgumentError
from funcnet.models.activation import ActivationKind, activate, derivative


class DenseLayer:
    """Affine transform x @ weights + biases followed by a pointwise activation"""

    def __init__(self, weights: np.ndarray, biases: np.ndarray, activation: ActivationKind):
        weights = np.array(weights, dtype=float)
        biases = np.array(biases, dtype=float).reshape(-1)
        if weights.ndim != 2 or biases.shape != (weights.shape[1],):
            raise InvalidArgumentError(
                f"dense layer needs weights (in, out) and biases (out,), got {weights.shape} and {biases.shape}"
            )
        self.weights = weights
        self.biases = biases
        self.activation = ActivationKind(activation)

    @property
    def input_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def output_dim(self) -> int:
        return self.weights.shape[1]


def glorot_layer(rng: np.random.Generator, input_dim: int, output_dim: int, activation) -> DenseLayer:
    """Glorot-uniform weights, zero biases"""
    limit = np.sqrt(6.0 / (input_dim + output_dim))
    return DenseLayer(rng.uniform(-limit, limit, (input_dim, output_dim)), np.zeros(output_dim), activation)


def check_chain(layers: Sequence[DenseLayer], input_dim: int) -> None:
    for index, layer in enumerate(layers):
        if layer.input_dim != input_dim:
            raise InvalidArgumentError(
                f"dense layer {index} expects {layer.input_dim} inputs but receives {input_dim}"
            )
        input_dim = layer.output_dim


def dense_forward(layers: Sequence[DenseLayer], x: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray], List[np.ndarray]]:
    """Output plus the inputs and pre-activations of every layer"""
    inputs, pre_activations = [], []
    for layer in layers:
        inputs.append(x)
        z = x @ layer.weights + layer.biases
        pre_activations.append(z)
        x = activate(layer.activation, z)
    return x, inputs, pre_activations


def dense_backward(
    layers: Sequence[DenseLayer],
    inputs: Sequence[np.ndarray],
    pre_activations: Sequence[np.ndarray],
    d_out: np.ndarray,
    prefix: str,
) -> Tuple[dict, np.ndarray]:
    """Gradients summed over the batch, keyed `{prefix}.{i}.weights`; also returns dL/dinput"""
    grads = {}
    for index in reversed(range(len(layers))):
        layer = layers[index]
        d_z = d_out * derivative(layer.activation, pre_activations[index])
        grads[f"{prefix}.{index}.weights"] = inputs[index].T @ d_z
        grads[f"{prefix}.{index}.biases"] = d_z.sum(axis=0)
        d_out = d_z @ layer.weights.T
    return grads, d_out
