"""
Clamped B-spline bases on [0, 1]

Bases are evaluated with the Cox-de Boor recursion, vectorized over evaluation points.
Knots are placed uniformly with the boundary knots repeated `order` times.
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import linalg

from funcnet.core.errors import InvalidArgumentError
from funcnet.core.grid import Grid


@dataclass(frozen=True, eq=False)
class BsplineBasis:
    """B-spline basis system of a given order (degree + 1)"""

    order: int
    interior_knot_count: int
    knot_vector: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.order < 1:
            raise InvalidArgumentError(f"spline order must be >= 1, got {self.order}")
        if self.interior_knot_count < 0:
            raise InvalidArgumentError("interior knot count must be >= 0")
        knots = np.asarray(self.knot_vector, dtype=float)
        expected = self.interior_knot_count + 2 * self.order
        if knots.shape != (expected,):
            raise InvalidArgumentError(f"knot vector needs {expected} entries, got {knots.size}")
        if np.any(np.diff(knots) < 0):
            raise InvalidArgumentError("knot vector must be nondecreasing")
        if knots[0] != 0.0 or knots[-1] != 1.0:
            raise InvalidArgumentError("knot vector must span [0, 1]")
        if np.sum(knots == 0.0) != self.order or np.sum(knots == 1.0) != self.order:
            raise InvalidArgumentError("boundary knots must be repeated exactly `order` times")
        knots.setflags(write=False)
        object.__setattr__(self, "knot_vector", knots)

    @property
    def n_basis(self) -> int:
        return self.interior_knot_count + self.order

    @property
    def degree(self) -> int:
        return self.order - 1

    def describe(self) -> dict:
        return {"order": self.order, "interior_knots": [float(k) for k in self.interior_knots]}

    @property
    def interior_knots(self) -> np.ndarray:
        return self.knot_vector[self.order:-self.order]


def make_bspline_basis(order: int, interior_knots: Sequence[float]) -> BsplineBasis:
    interior = np.asarray(sorted(interior_knots), dtype=float)
    if interior.size and (interior[0] <= 0.0 or interior[-1] >= 1.0):
        raise InvalidArgumentError("interior knots must lie strictly inside (0, 1)")
    knots = np.concatenate([np.zeros(order), interior, np.ones(order)])
    return BsplineBasis(order, interior.size, knots)


def uniform_bspline_basis(n_basis: int, order: int = 4) -> BsplineBasis:
    """n_basis functions of the given order with uniformly spaced interior knots"""
    if n_basis < order:
        raise InvalidArgumentError(f"need n_basis >= order ({order}), got {n_basis}")
    interior_count = n_basis - order
    interior = np.arange(1, interior_count + 1) / (interior_count + 1)
    return make_bspline_basis(order, interior)


def bspline_values(basis: BsplineBasis, t) -> np.ndarray:
    """Basis values at points t, shape (len(t), n_basis)"""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    knots = basis.knot_vector
    if np.any(t < knots[0]) or np.any(t > knots[-1]) or not np.all(np.isfinite(t)):
        raise InvalidArgumentError("evaluation point outside the knot span [0, 1]")

    # degree 0: indicator of the half-open knot span, with the last nonempty span closed
    n_spans = knots.size - 1
    values = np.zeros((t.size, n_spans))
    for i in range(n_spans):
        if knots[i] < knots[i + 1]:
            values[:, i] = (knots[i] <= t) & (t < knots[i + 1])
    last = np.flatnonzero(knots[:-1] < knots[1:])[-1]
    values[t == knots[-1], last] = 1.0

    for k in range(1, basis.order):
        n_funcs = n_spans - k
        nxt = np.zeros((t.size, n_funcs))
        for i in range(n_funcs):
            left_den = knots[i + k] - knots[i]
            right_den = knots[i + k + 1] - knots[i + 1]
            if left_den > 0:
                nxt[:, i] += (t - knots[i]) / left_den * values[:, i]
            if right_den > 0:
                nxt[:, i] += (knots[i + k + 1] - t) / right_den * values[:, i + 1]
        values = nxt
    return values


def bspline_design(basis: BsplineBasis, grid: Grid) -> np.ndarray:
    """Design matrix |grid| x n_basis; row i holds every basis function at grid point i"""
    return bspline_values(basis, grid.points)


def project_curves(
    basis: BsplineBasis,
    points: Sequence[np.ndarray],
    values: Sequence[np.ndarray],
    target: Grid,
) -> np.ndarray:
    """Least-squares smooth each curve in `basis` and evaluate it on `target`

    Curves may each arrive on their own points (within [0, 1]). Returns an array of
    shape (n_curves, len(target)).
    """
    if len(points) != len(values):
        raise InvalidArgumentError("need one set of points per curve")
    target_design = bspline_design(basis, target)
    out = np.empty((len(points), len(target)))
    for i, (pts, vals) in enumerate(zip(points, values)):
        pts = np.asarray(pts, dtype=float)
        vals = np.asarray(vals, dtype=float)
        if pts.shape != vals.shape or pts.ndim != 1:
            raise InvalidArgumentError(f"curve {i}: points and values must be matching vectors")
        if pts.size < basis.n_basis:
            raise InvalidArgumentError(
                f"curve {i}: {pts.size} observations cannot determine {basis.n_basis} coefficients"
            )
        coef, *_ = linalg.lstsq(bspline_values(basis, pts), vals)
        out[i] = target_design @ coef
    return out
