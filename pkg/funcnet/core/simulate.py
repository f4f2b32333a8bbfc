"""
Gaussian-process curve generation and the simulation scenarios

Curves are drawn from a zero-mean Gaussian process with Matérn (nu = 5/2) covariance and
fed through one of six data-generating models, with either a continuous response
(additive Gaussian noise) or a binary response (Bernoulli with logistic probability).
"""

import enum
import logging
from dataclasses import dataclass, field
from typing import Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import linalg
from scipy.special import expit

from funcnet.core.errors import InvalidArgumentError, NumericFailureError
from funcnet.core.grid import BivariateGridFunction, Grid, GridFunction, contract, integrate
from funcnet.core.random import make_rng

logger = logging.getLogger(__name__)

SQRT5 = np.sqrt(5.0)
JITTER_START = 1e-10
JITTER_LIMIT = 1e-6
PAIRWISE_CHUNK_ELEMENTS = 4_000_000


class ScenarioKind(str, enum.Enum):
    LINEAR = "linear"
    CAM = "cam"
    SINGLE_INDEX = "single_index"
    MULTIPLE_INDEX = "multiple_index"
    QUADRATIC = "quadratic"
    COMPLEX_QUADRATIC = "complex_quadratic"


class ResponseKind(str, enum.Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"


class MaternParams(BaseModel):
    """Matérn covariance parameters; only the closed-form nu = 5/2 is supported"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    rho: float = Field(0.5, gt=0)
    nu: Literal[2.5] = 2.5
    sigma2: float = Field(1.0, gt=0)


class Scenario(BaseModel):
    """A data-generating model; noise_sd is ignored for binary responses"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: ScenarioKind = ScenarioKind.LINEAR
    response_kind: ResponseKind = ResponseKind.CONTINUOUS
    noise_sd: float = Field(1.0, ge=0)

    @property
    def label(self) -> str:
        if self.kind is ScenarioKind.LINEAR and self.response_kind is ResponseKind.BINARY:
            return "logistic"
        return self.kind.value


@dataclass(eq=False)
class CurveSet:
    """N samples of R curves on a shared grid with scalar responses

    predictors has shape (N, R, m). `domain` records the original time span when the
    grid was rescaled onto [0, 1] at ingestion.
    """

    grid: Grid
    predictors: np.ndarray = field(repr=False)
    responses: np.ndarray = field(repr=False)
    response_kind: ResponseKind = ResponseKind.CONTINUOUS
    domain: Tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        self.predictors = np.asarray(self.predictors, dtype=float)
        self.responses = np.asarray(self.responses, dtype=float).reshape(-1)
        if self.predictors.ndim != 3:
            raise InvalidArgumentError("predictors must have shape (N, R, m)")
        n, r, m = self.predictors.shape
        if n < 1 or r < 1:
            raise InvalidArgumentError("a curve set needs N >= 1 samples and R >= 1 predictors")
        if m != len(self.grid):
            raise InvalidArgumentError(f"curves have {m} values for a grid of {len(self.grid)}")
        if self.responses.shape != (n,):
            raise InvalidArgumentError(f"expected {n} responses, got {self.responses.size}")
        if not np.all(np.isfinite(self.predictors)) or not np.all(np.isfinite(self.responses)):
            raise InvalidArgumentError("curve values and responses must be finite")
        if self.response_kind is ResponseKind.BINARY and not np.all(
            np.isin(self.responses, (0.0, 1.0))
        ):
            raise InvalidArgumentError("binary responses must be 0 or 1")

    def __len__(self) -> int:
        return self.predictors.shape[0]

    @property
    def predictor_count(self) -> int:
        return self.predictors.shape[1]

    def curve(self, i: int, r: int = 0) -> GridFunction:
        return GridFunction(self.grid, self.predictors[i, r])

    def subset(self, idx) -> "CurveSet":
        idx = np.asarray(idx, dtype=int)
        return CurveSet(
            self.grid, self.predictors[idx], self.responses[idx], self.response_kind, self.domain
        )


def matern_cov(d, p: MaternParams = MaternParams()):
    """Matérn nu = 5/2 covariance at distance d (scalar or array)"""
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise InvalidArgumentError("distance must be nonnegative")
    r = SQRT5 * d / p.rho
    value = p.sigma2 * (1.0 + r + r * r / 3.0) * np.exp(-r)
    return float(value) if value.ndim == 0 else value


def matern_matrix(grid: Grid, p: MaternParams) -> np.ndarray:
    return matern_cov(np.abs(grid.points[:, None] - grid.points[None, :]), p)


def gp_cholesky(cov: np.ndarray, sigma2: float) -> np.ndarray:
    """Lower Cholesky factor, escalating diagonal jitter 1e-10 -> 1e-6 (x10 steps)"""
    jitter = JITTER_START
    eye = np.eye(cov.shape[0])
    while jitter <= JITTER_LIMIT * (1 + 1e-9):
        try:
            return linalg.cholesky(cov + jitter * sigma2 * eye, lower=True)
        except linalg.LinAlgError:
            logger.info(f"Cholesky failed with jitter {jitter:.0e}, escalating")
            jitter *= 10.0
    raise NumericFailureError(
        f"covariance matrix is not positive definite even with jitter {JITTER_LIMIT:g}"
    )


def sample_gp_values(n: int, grid: Grid, p: MaternParams, seed) -> np.ndarray:
    """n GP draws on the grid as an (n, m) array; deterministic given seed"""
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"need n >= 1 curves, got {n}")
    chol = gp_cholesky(matern_matrix(grid, p), p.sigma2)
    normals = make_rng(seed).standard_normal((int(n), len(grid)))
    return normals @ chol.T


def sample_gp(n: int, grid: Grid, p: MaternParams, seed) -> list:
    """n GP draws as GridFunctions"""
    return [GridFunction(grid, row) for row in sample_gp_values(n, grid, p, seed)]


def beta_sin(cycles: float, amplitude: float = 5.0):
    return lambda t: amplitude * np.sin(cycles * np.pi * t)


BETA_LINEAR = beta_sin(2.0)
BETA_SECOND_INDEX = beta_sin(3.0)
BETA_QUAD_T = beta_sin(3.0)
BETA_QUAD_S = beta_sin(1.0)


def _linear_term(x: np.ndarray, grid: Grid, beta) -> np.ndarray:
    """sum over predictors of <beta, x_r>; x has shape (N, R, m)"""
    return np.einsum("nrt,t->n", x, grid.weights * beta(grid.points))


def _quadratic_surface(grid: Grid) -> BivariateGridFunction:
    return BivariateGridFunction.from_callable(grid, grid, lambda s, t: BETA_QUAD_S(s) * BETA_QUAD_T(t))


def _bilinear_term(x: np.ndarray, grid: Grid) -> np.ndarray:
    """sum_r of the double integral beta(s, t) x_r(t) x_r(s), iterated as contract + integrate"""
    surface = _quadratic_surface(grid).values
    inner = np.einsum("st,nrt->nrs", surface, x * grid.weights)
    return np.einsum("nrs,nrs,s->n", inner, x, grid.weights)


def _pairwise_term(x: np.ndarray, grid: Grid, fn) -> np.ndarray:
    """sum_r of the double integral fn(x_r(t) x_r(s)) dt ds"""
    w = grid.weights
    total = np.zeros(x.shape[0])
    chunk = max(1, PAIRWISE_CHUNK_ELEMENTS // (len(grid) ** 2))
    for r in range(x.shape[1]):
        for start in range(0, x.shape[0], chunk):
            block = x[start:start + chunk, r]
            products = fn(block[:, :, None] * block[:, None, :])
            total[start:start + chunk] += np.einsum("nst,s,t->n", products, w, w)
    return total


def true_response_values(scenario: Scenario, x: np.ndarray, grid: Grid) -> np.ndarray:
    """Noise-free eta for every sample of an (N, R, m) array"""
    x = np.asarray(x, dtype=float)
    if x.ndim != 3 or x.shape[2] != len(grid):
        raise InvalidArgumentError("curves must have shape (N, R, m) on the scenario grid")
    binary = scenario.response_kind is ResponseKind.BINARY
    kind = scenario.kind
    w = grid.weights

    if kind is ScenarioKind.LINEAR:
        return _linear_term(x, grid, BETA_LINEAR)
    if kind is ScenarioKind.CAM:
        f = np.sin(x) if binary else x ** 2
        return np.einsum("nrt,t->n", f, w)
    if kind is ScenarioKind.SINGLE_INDEX:
        a = _linear_term(x, grid, BETA_LINEAR)
        return np.sin(a) if binary else a ** 2
    if kind is ScenarioKind.MULTIPLE_INDEX:
        a = _linear_term(x, grid, BETA_LINEAR)
        b = _linear_term(x, grid, BETA_SECOND_INDEX)
        return np.sin(np.sin(a) + b) if binary else a ** 2 + b ** 2
    if kind is ScenarioKind.QUADRATIC:
        return _linear_term(x, grid, BETA_LINEAR) + _bilinear_term(x, grid)
    if kind is ScenarioKind.COMPLEX_QUADRATIC:
        if binary:
            return np.einsum("nrt,t->n", np.sin(x), w) + _pairwise_term(x, grid, np.sin)
        return np.einsum("nrt,t->n", x ** 2, w) + _pairwise_term(x, grid, np.square)
    raise InvalidArgumentError(f"unknown scenario {kind}")


def true_response(scenario: Scenario, x) -> float:
    """Noise-free eta for one sample given as a sequence of R GridFunctions"""
    if isinstance(x, GridFunction):
        x = [x]
    grid = x[0].grid
    for curve in x[1:]:
        grid.require_same(curve.grid)
    values = np.stack([curve.values for curve in x])[None]
    return float(true_response_values(scenario, values, grid)[0])


def quadratic_bilinear(x: GridFunction) -> float:
    """Double integral of the quadratic scenario's surface against x(t) x(s)"""
    inner = contract(_quadratic_surface(x.grid), x)
    return integrate(GridFunction(x.grid, inner.values * x.values))


def gen_dataset(scenario: Scenario, curves, seed, grid: Grid = None) -> CurveSet:
    """Responses for the given curves: eta + noise, or Bernoulli(logistic(eta))

    `curves` is either a list of GridFunctions (R = 1), a list of lists of GridFunctions,
    or an (N, R, m) array together with `grid`.
    """
    values, grid = _as_curve_array(curves, grid)
    eta = true_response_values(scenario, values, grid)
    rng = make_rng(seed)
    if scenario.response_kind is ResponseKind.BINARY:
        y = (rng.random(eta.size) < expit(eta)).astype(float)
    else:
        y = eta + scenario.noise_sd * rng.standard_normal(eta.size)
    return CurveSet(grid, values, y, scenario.response_kind)


def simulate_curve_set(
    scenario: Scenario, n: int, grid: Grid, matern: MaternParams, seed: int
) -> CurveSet:
    """GP curves plus responses, with independent streams split off one seed"""
    curve_seed, response_seed = np.random.SeedSequence(seed).spawn(2)
    values = sample_gp_values(n, grid, matern, curve_seed)[:, None, :]
    data = gen_dataset(scenario, values, response_seed, grid)
    logger.info(f"Simulated {n} curves on {len(grid)} points for scenario {scenario.label}")
    return data


def _as_curve_array(curves, grid):
    if isinstance(curves, np.ndarray):
        if grid is None:
            raise InvalidArgumentError("an array of curves needs its grid")
        values = curves if curves.ndim == 3 else curves[:, None, :]
        return values, grid
    curves = list(curves)
    if not curves:
        raise InvalidArgumentError("need at least one curve")
    rows = [[c] if isinstance(c, GridFunction) else list(c) for c in curves]
    grid = rows[0][0].grid
    for row in rows:
        for c in row:
            grid.require_same(c.grid)
    return np.array([[c.values for c in row] for row in rows]), grid
