"""Uniform-grid representation of real functions on an interval.

Everything downstream (potentials, bound states, deformations, spectra)
is sampled on these grids.  Quadrature is composite trapezoid -- its
cumulative form is needed for denominator-sign analysis -- and derivatives
are second-order finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid


class GridMismatchError(ValueError):
    """Raised when two functions that must share a grid do not."""


class ZeroNormError(ValueError):
    """Raised when normalization is requested for a zero-norm function."""


@dataclass(frozen=True)
class Grid:
    """Uniform sampling of [x_min, x_max] with nodes x_i = x_min + i*h."""

    x_min: float
    x_max: float
    n_points: int
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_points < 3:
            raise ValueError(f"need at least 3 points, got {self.n_points}")
        if not self.x_min < self.x_max:
            raise ValueError(f"empty interval [{self.x_min}, {self.x_max}]")
        pts = self.x_min + np.arange(self.n_points) * self.h
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    def refined(self, factor: int = 2) -> "Grid":
        """Same interval with (roughly) `factor` times denser sampling.

        The node count maps n -> factor*(n-1)+1 so existing nodes stay
        exactly on the refined grid.
        """
        return Grid(self.x_min, self.x_max, factor * (self.n_points - 1) + 1)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real-valued samples on a :class:`Grid`.

    Values are copied and made read-only at construction.  Non-finite
    samples are rejected unless the function is explicitly constructed
    with ``flagged=True`` (used for superpotentials, whose samples near
    wavefunction nodes are carried as NaN).  Flagged functions may not be
    fed to the quadrature/derivative operations below; doing so raises.
    """

    grid: Grid
    values: np.ndarray
    flagged: bool = False

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} samples, got shape {vals.shape}"
            )
        if not self.flagged and not np.all(np.isfinite(vals)):
            raise ValueError("non-finite samples in unflagged GridFunction")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def x(self) -> np.ndarray:
        return self.grid.points

    @property
    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.values)


def same_grid(f: GridFunction, g: GridFunction) -> Grid:
    if f.grid != g.grid:
        raise GridMismatchError(f"grids differ: {f.grid} vs {g.grid}")
    return f.grid


def require_finite(f: GridFunction) -> np.ndarray:
    """Debug guard: flagged samples must never reach plain numerics."""
    if f.flagged and not np.all(np.isfinite(f.values)):
        raise ValueError(
            "function carries flagged (non-finite) samples; "
            "use a node-safe composite formula instead"
        )
    return f.values


def cumulative_integral(f: GridFunction) -> GridFunction:
    """Trapezoid antiderivative I(x) = integral of f from x_min to x.

    I(x_min) = 0 exactly; monotone nondecreasing for f >= 0; error O(h^2).
    """
    vals = require_finite(f)
    out = cumulative_trapezoid(vals, dx=f.grid.h, initial=0.0)
    return GridFunction(f.grid, out)


def derivative(f: GridFunction) -> GridFunction:
    """Second-order finite-difference derivative.

    Central differences in the interior, one-sided O(h^2) stencils at the
    two boundary nodes.
    """
    vals = require_finite(f)
    return GridFunction(f.grid, np.gradient(vals, f.grid.h, edge_order=2))


def inner_product(f: GridFunction, g: GridFunction) -> float:
    """Trapezoid L2 inner product <f, g> over the grid interval."""
    same_grid(f, g)
    return float(np.trapezoid(require_finite(f) * require_finite(g), dx=f.grid.h))


def norm(f: GridFunction) -> float:
    return float(np.sqrt(inner_product(f, f)))


def normalize(f: GridFunction) -> GridFunction:
    """Scale f to unit L2 norm.  Idempotent up to rounding."""
    n2 = inner_product(f, f)
    if not n2 > 0.0:
        raise ZeroNormError(f"cannot normalize function with <f,f> = {n2}")
    return GridFunction(f.grid, f.values / np.sqrt(n2))


def count_nodes(f: GridFunction, edge_margin: int = 5,
                amplitude_floor: float = 1e-9) -> int:
    """Count interior sign changes of f, i.e. nodes of a bound state.

    Samples with |f| <= amplitude_floor * max|f| are discarded before the
    sign scan, and `edge_margin` samples are ignored at each boundary;
    both suppress spurious zeros in decaying tails and at Dirichlet walls.
    Invariant under f -> lambda*f for lambda != 0.
    """
    vals = require_finite(f)
    peak = float(np.max(np.abs(vals)))
    if peak == 0.0:
        return 0
    if edge_margin > 0:
        vals = vals[edge_margin:-edge_margin]
    kept = vals[np.abs(vals) > amplitude_floor * peak]
    if kept.size < 2:
        return 0
    signs = np.sign(kept)
    return int(np.count_nonzero(signs[1:] * signs[:-1] < 0))
