"""Uniform node-centred radial mesh with r-weighted quadrature and stencils."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridTooSmallError, ParameterError, ShapeError

MIN_CELLS = 4


@dataclass(frozen=True)
class RadialGrid:
    """Mesh of ``n`` uniform cells on ``[r_min, r_max]``.

    Attributes
    ----------
    nodes : ndarray
        ``n + 1`` radii including both boundaries.
    dr : float
        Uniform spacing.
    """

    r_min: float = 1.0
    r_max: float = 2.0
    n: int = 512
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    dr: float = field(init=False, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"cell count must be a positive integer, got {self.n!r}")
        if self.r_min < 1.0:
            raise ParameterError(f"inner radius must be >= 1, got {self.r_min}")
        if not self.r_max > self.r_min:
            raise ParameterError("outer radius must exceed inner radius")
        object.__setattr__(self, "n", int(self.n))
        dr = (self.r_max - self.r_min) / self.n
        nodes = self.r_min + dr * np.arange(self.n + 1)
        nodes[-1] = self.r_max
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "dr", dr)

    @property
    def size(self):
        return self.n + 1

    @property
    def x(self):
        """Normalised coordinate in ``[0, 1]``."""
        return (self.nodes - self.r_min) / (self.r_max - self.r_min)

    def check(self, f, name="field"):
        f = np.asarray(f, dtype=float)
        if f.shape != (self.n + 1,):
            raise ShapeError(f"{name} has shape {f.shape}, expected ({self.n + 1},)")
        return f

    def same_as(self, other):
        return (self.r_min, self.r_max, self.n) == (other.r_min, other.r_max, other.n)


def _require_cells(grid, cells):
    if grid.n < cells:
        raise GridTooSmallError(f"stencil needs at least {cells} cells, grid has {grid.n}")


def integrate(f, grid: RadialGrid, weight_power=0, trim=0):
    """Composite trapezoid integral of ``r**weight_power * f``.

    ``trim`` drops that many cells at each end, giving the interior integral
    used by solution distances.
    """
    f = grid.check(f)
    r = grid.nodes
    lo, hi = trim, grid.n - trim
    if hi - lo < 1:
        raise GridTooSmallError("trim leaves no interior cells")
    g = f[lo : hi + 1] * r[lo : hi + 1] ** weight_power if weight_power else f[lo : hi + 1]
    return grid.dr * (g.sum() - 0.5 * (g[0] + g[-1]))


def weighted_L2(f, weight_power, grid: RadialGrid, trim=0):
    """``sqrt(int r**w f**2 dr)`` by the trapezoid rule."""
    f = grid.check(f)
    scale = float(np.max(np.abs(f))) if f.size else 0.0
    if scale == 0.0 or not np.isfinite(scale):
        return scale
    g = f / scale  # avoids underflow and overflow when squaring
    return scale * float(np.sqrt(max(integrate(g * g, grid, weight_power, trim), 0.0)))


def ddr(f, grid: RadialGrid):
    """First derivative: centred inside, second-order one-sided at the ends."""
    _require_cells(grid, MIN_CELLS)
    f = grid.check(f)
    h = grid.dr
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2 * h)
    out[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
    out[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    return out


def d2dr2(f, grid: RadialGrid):
    """Second derivative: centred inside, second-order one-sided at the ends."""
    _require_cells(grid, MIN_CELLS)
    f = grid.check(f)
    h2 = grid.dr**2
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h2
    out[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h2
    out[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h2
    return out


def d3dr3(f, grid: RadialGrid):
    """Third derivative, second order; one-sided five-point rows near the ends."""
    _require_cells(grid, 5)
    f = grid.check(f)
    h3 = grid.dr**3
    out = np.empty_like(f)
    out[2:-2] = (f[4:] - 2 * f[3:-1] + 2 * f[1:-3] - f[:-4]) / (2 * h3)
    w = np.array([-2.5, 9.0, -12.0, 7.0, -1.5])
    for i in (0, 1):
        out[i] = w @ f[i : i + 5] / h3
        j = grid.n - i
        out[j] = -(w @ f[j - 4 : j + 1][::-1]) / h3
    return out


def weighted_H1(f, weight_power, grid: RadialGrid, weight_inside=True, trim=0):
    """Weighted H1 norm.

    With ``weight_inside`` (default) the function is first multiplied by
    ``r**(weight_power/2)`` and the plain H1 norm of the product is taken.
    Otherwise the weight is applied to ``f`` and ``f_r`` separately.
    """
    f = grid.check(f)
    if weight_inside:
        g = f * grid.nodes ** (weight_power / 2.0) if weight_power else f
        return float(np.hypot(weighted_L2(g, 0, grid, trim), weighted_L2(ddr(g, grid), 0, grid, trim)))
    return float(np.hypot(weighted_L2(f, weight_power, grid, trim), weighted_L2(ddr(f, grid), weight_power, grid, trim)))
