"""
Common contract for every scalar-on-function model

Models keep their parameters as named numpy arrays. `parameters()` returns live
references, so gradient steps and snapshot restores update the model in place.
Gradients are dictionaries keyed like `parameters()`. For grid-sampled parameters they are
functional gradients (pointwise partials without quadrature weights); `quadrature_metric()`
maps them to ordinary partial derivatives of the discretized loss.
"""

import abc
import logging
from typing import Any, ClassVar, Dict, Optional, Tuple

import numpy as np

from funcnet.core.errors import InvalidArgumentError, NumericFailureError
from funcnet.core.grid import Grid, GridFunction, restore_grid
from funcnet.models.activation import ActivationKind
from funcnet.schemas.artifact import ArrayPayload

logger = logging.getLogger(__name__)

Parameters = Dict[str, np.ndarray]


class FunctionalModel(abc.ABC):
    """Base class: input handling, parameter bookkeeping and gradient steps"""

    kind: ClassVar[str]
    trainable_by_gradient: ClassVar[bool] = True

    def __init__(self, input_grid: Grid, input_count: int):
        if input_count < 1:
            raise InvalidArgumentError(f"need at least one functional predictor, got {input_count}")
        self.input_grid = input_grid
        self.input_count = int(input_count)
        self.input_shift: Optional[np.ndarray] = None
        self.input_scale: Optional[np.ndarray] = None

    # ----- parameters -------------------------------------------------------

    @abc.abstractmethod
    def parameters(self) -> Parameters:
        """Live references to every parameter array, in a stable order"""

    def quadrature_metric(self) -> Dict[str, Any]:
        """Per-parameter factors turning functional gradients into plain partials"""
        return {}

    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.parameters().values()))

    def snapshot(self) -> Parameters:
        return {name: p.copy() for name, p in self.parameters().items()}

    def restore(self, snapshot: Parameters) -> None:
        params = self.parameters()
        for name, value in snapshot.items():
            np.copyto(params[name], value)

    def euclidean_gradient(self, grads: Parameters) -> Parameters:
        metric = self.quadrature_metric()
        return {name: g * metric.get(name, 1.0) for name, g in grads.items()}

    def grad_step(self, grads: Parameters, lr: float) -> "FunctionalModel":
        """p <- p - lr * g for every parameter (pointwise for grid-sampled ones)"""
        if lr < 0:
            raise InvalidArgumentError(f"learning rate must be nonnegative, got {lr}")
        for name, g in grads.items():
            if not np.all(np.isfinite(g)):
                raise NumericFailureError("non-finite gradient", layer=name)
        params = self.parameters()
        for name, g in grads.items():
            params[name] -= lr * g
        return self

    # ----- input handling ---------------------------------------------------

    def set_input_scaling(self, shift: np.ndarray, scale: np.ndarray) -> None:
        self.input_shift = np.asarray(shift, dtype=float)
        self.input_scale = np.asarray(scale, dtype=float)

    def as_batch(self, x) -> Tuple[np.ndarray, bool]:
        """Normalize input to an (N, R, m) array; flags whether a single sample was given"""
        single = False
        if isinstance(x, GridFunction):
            x = [x]
        if isinstance(x, (list, tuple)) and x and isinstance(x[0], GridFunction):
            for curve in x:
                self.input_grid.require_same(curve.grid, "input grid")
            x = np.stack([curve.values for curve in x])[None]
            single = True
        x = np.asarray(x, dtype=float)
        if x.ndim == 2:
            x = x[None]
            single = True
        if x.ndim != 3 or x.shape[1] != self.input_count:
            raise InvalidArgumentError(
                f"expected inputs of shape (N, {self.input_count}, {len(self.input_grid)}), "
                f"got {x.shape}"
            )
        if x.shape[2] != len(self.input_grid):
            raise InvalidArgumentError(
                f"inputs have {x.shape[2]} grid values but the model grid has {len(self.input_grid)}"
            )
        if self.input_shift is not None:
            x = (x - self.input_shift) / self.input_scale
        return x, single

    # ----- evaluation -------------------------------------------------------

    @abc.abstractmethod
    def forward(self, x) -> Tuple[Any, Any]:
        """Prediction(s) plus the cache needed by backward"""

    def backward(self, cache, dl_dyhat) -> Parameters:
        raise NotImplementedError(f"{self.kind} models are not trained by gradient descent")

    def predict(self, x) -> np.ndarray:
        yhat, _ = self.forward(x)
        return np.atleast_1d(yhat)

    @property
    @abc.abstractmethod
    def output_activation(self) -> ActivationKind:
        """Activation of the scalar output (Sigmoid for binary responses)"""

    # ----- serialization ----------------------------------------------------

    @abc.abstractmethod
    def architecture(self) -> Dict[str, Any]:
        """JSON-ready description sufficient to rebuild an equally shaped model"""

    @classmethod
    @abc.abstractmethod
    def from_architecture(cls, arch: Dict[str, Any], input_grid: Grid) -> "FunctionalModel":
        """Rebuild a zero-initialized model from `architecture()` output"""

    def __repr__(self):
        return f"<{type(self).__name__} {self.parameter_count()} parameters>"


def as_gradient_vector(dl_dyhat, n: int) -> np.ndarray:
    g = np.asarray(dl_dyhat, dtype=float).reshape(-1)
    if g.size != n:
        raise InvalidArgumentError(f"need {n} loss derivatives, got {g.size}")
    return g


def uniform_init(rng: np.random.Generator, bound: float, shape) -> np.ndarray:
    return rng.uniform(-bound, bound, size=shape)


def grid_payload(grid: Grid) -> Dict[str, Any]:
    """Points and quadrature weights as exact base64 payloads for `architecture()`"""
    return {
        "points": ArrayPayload.from_array(grid.points).model_dump(),
        "weights": ArrayPayload.from_array(grid.weights).model_dump(),
    }


def grid_from_payload(payload: Dict[str, Any]) -> Grid:
    points = ArrayPayload.model_validate(payload["points"]).to_array()
    weights = ArrayPayload.model_validate(payload["weights"]).to_array()
    return restore_grid(points, weights)
