"""
Evaluation grids, trapezoidal quadrature and grid-sampled functions

Every integral in the networks is discretized on a Grid: an increasing set of points in
[0, 1] together with trapezoidal quadrature weights. Functions are stored as their values
on a grid; bivariate functions (weight surfaces) as |out_grid| x |in_grid| matrices.
"""

from dataclasses import dataclass, field

import numpy as np

from funcnet.core.errors import GridMismatchError, InvalidArgumentError

GRID_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class Grid:
    """Ordered evaluation points with quadrature weights"""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if points.ndim != 1 or points.size < 2:
            raise InvalidArgumentError("a grid needs at least 2 points")
        if weights.shape != points.shape:
            raise InvalidArgumentError("grid weights must match the number of points")
        if not np.all(np.isfinite(points)) or np.any(np.diff(points) <= 0):
            raise InvalidArgumentError("grid points must be finite and strictly increasing")
        if points[0] < 0 or points[-1] > 1:
            raise InvalidArgumentError("grid points must lie in [0, 1]")
        if np.any(weights <= 0):
            raise InvalidArgumentError("quadrature weights must be positive")
        if abs(weights.sum() - (points[-1] - points[0])) > GRID_TOLERANCE * max(1.0, points.size):
            raise InvalidArgumentError("quadrature weights must sum to the grid span")
        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.points.size

    @property
    def span(self) -> float:
        return float(self.points[-1] - self.points[0])

    def same_as(self, other: "Grid") -> bool:
        """Grids are value-identified: same length and points within tolerance"""
        if self is other:
            return True
        return len(self) == len(other) and bool(
            np.all(np.abs(self.points - other.points) <= GRID_TOLERANCE)
        )

    def require_same(self, other: "Grid", what: str = "grid") -> None:
        if not self.same_as(other):
            raise GridMismatchError(self, other, what)

    def __repr__(self):
        return f"<Grid {len(self)} points on [{self.points[0]:.4g}, {self.points[-1]:.4g}]>"


def trapezoid_weights(points: np.ndarray) -> np.ndarray:
    """Composite trapezoidal weights for arbitrary increasing points"""
    points = np.asarray(points, dtype=float)
    gaps = np.diff(points)
    weights = np.zeros_like(points)
    weights[:-1] += gaps / 2.0
    weights[1:] += gaps / 2.0
    return weights


def make_grid(points) -> Grid:
    """Grid on the given points with trapezoidal weights"""
    points = np.asarray(points, dtype=float)
    if points.ndim != 1 or points.size < 2:
        raise InvalidArgumentError("a grid needs at least 2 points")
    return Grid(points, trapezoid_weights(points))


def restore_grid(points, weights=None) -> Grid:
    """Grid from stored points and quadrature weights; trapezoidal weights when none were stored"""
    if weights is None:
        return make_grid(points)
    return Grid(np.asarray(points, dtype=float), np.asarray(weights, dtype=float))


def make_uniform_grid(m: int, a: float = 0.0, b: float = 1.0) -> Grid:
    """m equally spaced points from a to b with weights h*(1/2, 1, ..., 1, 1/2)"""
    if int(m) != m or m < 2:
        raise InvalidArgumentError(f"a uniform grid needs m >= 2 points, got {m}")
    if not a < b:
        raise InvalidArgumentError(f"grid interval must satisfy a < b, got [{a}, {b}]")
    m = int(m)
    h = (b - a) / (m - 1)
    points = np.linspace(a, b, m)
    weights = np.full(m, h)
    weights[0] = weights[-1] = h / 2.0
    return Grid(points, weights)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A function sampled on a grid"""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.grid),):
            raise InvalidArgumentError(
                f"function has {values.size} values for a grid of {len(self.grid)} points"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("function values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        return cls(grid, fn(grid.points))


@dataclass(frozen=True, eq=False)
class BivariateGridFunction:
    """A surface w(s, t) with s on out_grid (rows) and t on in_grid (columns)"""

    out_grid: Grid
    in_grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.out_grid), len(self.in_grid)):
            raise InvalidArgumentError(
                f"surface of shape {values.shape} does not match grids "
                f"({len(self.out_grid)}, {len(self.in_grid)})"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("surface values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, out_grid: Grid, in_grid: Grid, fn) -> "BivariateGridFunction":
        s, t = np.meshgrid(out_grid.points, in_grid.points, indexing="ij")
        return cls(out_grid, in_grid, fn(s, t))


def integrate(f: GridFunction) -> float:
    """Trapezoidal rule: sum of weights times values"""
    return float(np.dot(f.grid.weights, f.values))


def inner_product(f: GridFunction, g: GridFunction) -> float:
    f.grid.require_same(g.grid)
    return float(np.dot(f.grid.weights, f.values * g.values))


def contract(w: BivariateGridFunction, h: GridFunction) -> GridFunction:
    """(contract w h)(s) = integral of w(s, t) h(t) dt over the in-grid"""
    w.in_grid.require_same(h.grid, "contraction grid")
    return GridFunction(w.out_grid, w.values @ (w.in_grid.weights * h.values))


def nearest_indices(source: Grid, target: Grid) -> np.ndarray:
    """Index of the nearest source point for every target point (ties go to the lower index)"""
    return np.abs(target.points[:, None] - source.points[None, :]).argmin(axis=1)
