"""
Functional linear model

    E[Y | X] = link^-1(alpha + sum_r integral beta_r(t) X_r(t) dt)

with each beta_r expanded in a B-spline basis. Estimation is direct: ridge-penalized least
squares for the identity link, Newton iterations on the penalized likelihood for the
logistic link. The intercept is never penalized.
"""

import enum
import logging
from typing import Any, Dict, Optional

import numpy as np
from scipy import linalg
from scipy.special import expit

from funcnet.core.bspline import BsplineBasis, bspline_design, make_bspline_basis, uniform_bspline_basis
from funcnet.core.errors import InvalidArgumentError, NumericFailureError
from funcnet.core.grid import Grid, GridFunction
from funcnet.core.simulate import CurveSet, ResponseKind
from funcnet.models.activation import ActivationKind
from funcnet.models.base import FunctionalModel, Parameters
from funcnet.schemas.architecture import DEFAULT_N_BASIS, DEFAULT_SPLINE_ORDER

logger = logging.getLogger(__name__)

DEFAULT_RIDGE = 1e-6
NEWTON_TOLERANCE = 1e-8
NEWTON_MAX_ITERATIONS = 100


class LinkKind(str, enum.Enum):
    IDENTITY = "identity"
    LOGISTIC = "logistic"


def link_for(response_kind: ResponseKind) -> LinkKind:
    return LinkKind.LOGISTIC if ResponseKind(response_kind) is ResponseKind.BINARY else LinkKind.IDENTITY


class FlmModel(FunctionalModel):
    kind = "flm"
    trainable_by_gradient = False

    def __init__(
        self,
        input_grid: Grid,
        basis: BsplineBasis,
        alpha: float,
        beta_coef: np.ndarray,
        ridge: float = DEFAULT_RIDGE,
        link: LinkKind = LinkKind.IDENTITY,
    ):
        beta_coef = np.array(beta_coef, dtype=float)
        if beta_coef.ndim != 2 or beta_coef.shape[1] != basis.n_basis:
            raise InvalidArgumentError(
                f"beta coefficients must have shape (R, {basis.n_basis}), got {beta_coef.shape}"
            )
        if ridge < 0:
            raise InvalidArgumentError(f"ridge must be nonnegative, got {ridge}")
        super().__init__(input_grid, beta_coef.shape[0])
        self.basis = basis
        self.alpha = np.array(alpha, dtype=float).reshape(1)
        self.beta_coef = beta_coef
        self.ridge = float(ridge)
        self.link = LinkKind(link)
        self.design = bspline_design(basis, input_grid)
        self.score_matrix = self.design * input_grid.weights[:, None]

    @property
    def output_activation(self) -> ActivationKind:
        return ActivationKind.SIGMOID if self.link is LinkKind.LOGISTIC else ActivationKind.LINEAR

    def parameters(self) -> Parameters:
        return {"alpha": self.alpha, "beta_coef": self.beta_coef}

    def beta_function(self, r: int = 0) -> GridFunction:
        """Coefficient function beta_r on the input grid"""
        if not 0 <= r < self.input_count:
            raise InvalidArgumentError(f"predictor index {r} out of range for {self.input_count} predictors")
        return GridFunction(self.input_grid, self.design @ self.beta_coef[r])

    def design_matrix(self, x: np.ndarray) -> np.ndarray:
        """[1, Z] with Z[i, (r, b)] = integral v_b(t) X_ir(t) dt"""
        scores = x @ self.score_matrix
        return np.hstack([np.ones((x.shape[0], 1)), scores.reshape(x.shape[0], -1)])

    def forward(self, x):
        x, single = self.as_batch(x)
        eta = self.design_matrix(x) @ np.concatenate([self.alpha, self.beta_coef.reshape(-1)])
        yhat = expit(eta) if self.link is LinkKind.LOGISTIC else eta
        return (float(yhat[0]) if single else yhat), None

    def fit_direct(self, x, y) -> "FlmModel":
        """Estimate alpha and beta in place from curves x and responses y"""
        x, _ = self.as_batch(x)
        y = np.asarray(y, dtype=float).reshape(-1)
        if y.size != x.shape[0]:
            raise InvalidArgumentError(f"need {x.shape[0]} responses, got {y.size}")
        design = self.design_matrix(x)
        penalty = np.full(design.shape[1], self.ridge)
        penalty[0] = 0.0
        if self.ridge == 0 and np.linalg.matrix_rank(design) < design.shape[1]:
            raise NumericFailureError(
                "normal equations are singular with ridge = 0; use a ridge penalty > 0"
            )
        if self.link is LinkKind.LOGISTIC:
            if not np.all(np.isin(y, (0.0, 1.0))):
                raise InvalidArgumentError("logistic link needs 0/1 responses")
            theta = _newton_logistic(design, y, penalty)
        else:
            theta = _solve(design.T @ design + np.diag(penalty), design.T @ y)
        self.alpha[0] = theta[0]
        self.beta_coef[...] = theta[1:].reshape(self.beta_coef.shape)
        return self

    def architecture(self) -> Dict[str, Any]:
        return {
            "input_count": self.input_count,
            "basis": self.basis.describe(),
            "ridge": self.ridge,
            "link": self.link.value,
        }

    @classmethod
    def from_architecture(cls, arch: Dict[str, Any], input_grid: Grid) -> "FlmModel":
        basis = make_bspline_basis(arch["basis"]["order"], arch["basis"]["interior_knots"])
        return cls(
            input_grid,
            basis,
            0.0,
            np.zeros((arch["input_count"], basis.n_basis)),
            arch["ridge"],
            arch["link"],
        )


def _solve(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return linalg.solve(lhs, rhs, assume_a="sym")
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericFailureError(f"normal equations could not be solved ({exc}); use a ridge penalty > 0")


def _newton_logistic(design: np.ndarray, y: np.ndarray, penalty: np.ndarray) -> np.ndarray:
    n = design.shape[0]
    theta = np.zeros(design.shape[1])
    for iteration in range(1, NEWTON_MAX_ITERATIONS + 1):
        p = expit(design @ theta)
        gradient = design.T @ (p - y) + penalty * theta
        if np.linalg.norm(gradient) / n < NEWTON_TOLERANCE:
            logger.debug(f"Logistic FLM converged after {iteration - 1} Newton steps")
            return theta
        hessian = design.T @ (design * (p * (1.0 - p))[:, None]) + np.diag(penalty)
        theta = theta - _solve(hessian, gradient)
        if not np.all(np.isfinite(theta)):
            raise NumericFailureError("logistic FLM diverged", epoch=iteration)
    logger.info(f"Logistic FLM stopped after {NEWTON_MAX_ITERATIONS} Newton steps without converging")
    return theta


def flm_fit(
    data: CurveSet,
    basis: Optional[BsplineBasis] = None,
    ridge: float = DEFAULT_RIDGE,
    link: Optional[LinkKind] = None,
) -> FlmModel:
    """Fit an FLM to every sample of `data`"""
    basis = basis or uniform_bspline_basis(DEFAULT_N_BASIS, DEFAULT_SPLINE_ORDER)
    link = link or link_for(data.response_kind)
    model = FlmModel(data.grid, basis, 0.0, np.zeros((data.predictor_count, basis.n_basis)), ridge, link)
    model.fit_direct(data.predictors, data.responses)
    logger.info(f"Fitted FLM ({link.value} link) on {len(data)} samples")
    return model
