"""
Pointwise activation functions and their derivatives
"""

import enum

import numpy as np
from scipy.special import expit


class ActivationKind(str, enum.Enum):
    LINEAR = "linear"
    RELU = "relu"
    TANH = "tanh"
    SIGMOID = "sigmoid"


def activate(kind: ActivationKind, z: np.ndarray) -> np.ndarray:
    if kind is ActivationKind.LINEAR:
        return z
    if kind is ActivationKind.RELU:
        return np.maximum(z, 0.0)
    if kind is ActivationKind.TANH:
        return np.tanh(z)
    if kind is ActivationKind.SIGMOID:
        return expit(z)
    raise ValueError(f"unknown activation {kind}")


def derivative(kind: ActivationKind, z: np.ndarray) -> np.ndarray:
    """sigma'(z); the ReLU subgradient at 0 is 0"""
    if kind is ActivationKind.LINEAR:
        return np.ones_like(z)
    if kind is ActivationKind.RELU:
        return (z > 0).astype(float)
    if kind is ActivationKind.TANH:
        return 1.0 - np.tanh(z) ** 2
    if kind is ActivationKind.SIGMOID:
        s = expit(z)
        return s * (1.0 - s)
    raise ValueError(f"unknown activation {kind}")
