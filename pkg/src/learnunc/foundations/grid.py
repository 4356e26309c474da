"""Uniform-grid functions, trapezoid quadrature and finite differences."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import UsageError

MIN_POINTS = 8


@dataclass(frozen=True, eq=False)
class GridFunction:
    x_min: float
    x_max: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1 or v.size < MIN_POINTS:
            raise UsageError(f"grid needs at least {MIN_POINTS} points, got {v.size}")
        if not self.x_min < self.x_max:
            raise UsageError("need x_min < x_max")
        if not np.all(np.isfinite(v)):
            raise UsageError("grid values must be finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, f, x_min: float, x_max: float, n_points: int) -> GridFunction:
        x = np.linspace(x_min, x_max, n_points)
        return cls(x_min, x_max, f(x))

    @property
    def n_points(self) -> int:
        return self.values.size

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    def with_values(self, values) -> GridFunction:
        return GridFunction(self.x_min, self.x_max, values)


def quadrature(f: GridFunction) -> float | complex:
    """Trapezoid rule over the whole grid."""
    v = f.values
    s = v.sum() - 0.5 * (v[0] + v[-1])
    return s * f.h


def finite_diff(f: GridFunction, order: int = 2) -> GridFunction:
    """Derivative on the grid.

    ``order=2``: central differences inside, one-sided at the two ends.
    ``order=4``: five-point central stencil inside, second-order central one
    node in from each end, one-sided at the ends.  Both are exact for affine
    functions.
    """
    v, h = f.values, f.h
    if order == 2:
        return f.with_values(np.gradient(v, h, edge_order=1))
    if order != 4:
        raise UsageError("order must be 2 or 4")
    d = np.empty_like(v)
    d[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    d[1] = (v[2] - v[0]) / (2 * h)
    d[-2] = (v[-1] - v[-3]) / (2 * h)
    d[0] = (v[1] - v[0]) / h
    d[-1] = (v[-1] - v[-2]) / h
    return f.with_values(d)
