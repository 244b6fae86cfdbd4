"""Primitive fields at one time level, validation, initial data and snapshots."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, List, Optional

import numpy as np

from .constitutive import BAND, PhysParams
from .errors import ConfigurationError, ParameterError, ShapeError
from .grid import RadialGrid, ddr, weighted_H1

FIELDS = ("rho", "u", "theta", "q")


@dataclass(frozen=True)
class RadialState:
    """Immutable snapshot of ``(rho, u, theta, q)`` at time ``t``.

    The arrays are copied on construction and marked read-only.
    """

    rho: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    q: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        sizes = set()
        for name in FIELDS:
            arr = np.array(getattr(self, name), dtype=float)
            if arr.ndim != 1:
                raise ShapeError(f"{name} must be one-dimensional")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
            sizes.add(arr.size)
        if len(sizes) != 1:
            raise ShapeError(f"field lengths differ: {sorted(sizes)}")
        object.__setattr__(self, "t", float(self.t))

    @classmethod
    def equilibrium(cls, grid: RadialGrid, t=0.0):
        one, zero = np.ones(grid.size), np.zeros(grid.size)
        return cls(one, zero, one, zero, t)

    @classmethod
    def from_vector(cls, y, t=0.0):
        y = np.asarray(y)
        return cls(*y.reshape(4, -1), t=t)

    def as_vector(self):
        """Stacked ``(4, n+1)`` array in the order rho, u, theta, q."""
        return np.stack([self.rho, self.u, self.theta, self.q])

    def replace(self, **changes):
        kw = {name: getattr(self, name) for name in FIELDS}
        kw["t"] = self.t
        kw.update(changes)
        return RadialState(**kw)

    def __len__(self):
        return self.rho.size


@dataclass(frozen=True)
class Violation:
    index: int
    field: str
    rule: str
    value: float

    def __str__(self):
        return f"{self.rule} violation at node {self.index}: {self.field}={self.value!r}"


def validate(state: RadialState, grid: RadialGrid, band: Optional[tuple] = None, check_q_boundary=True) -> List[Violation]:
    """List every violated invariant (empty when the state is admissible).

    Parameters
    ----------
    band : tuple, optional
        ``(lo, hi)`` bounds for density and temperature; ``True`` selects the
        default admissible band.
    check_q_boundary : bool
        Fourier-law states carry a diagnostic heat flux that is not pinned at
        the walls; pass False to skip that rule for them.
    """
    out = []
    if len(state) != grid.size:
        return [Violation(-1, name, "length", float(len(state))) for name in FIELDS]
    if band is True:
        band = BAND
    for name in FIELDS:
        arr = getattr(state, name)
        for i in np.flatnonzero(~np.isfinite(arr)):
            out.append(Violation(int(i), name, "finite", float(arr[i])))
    for name in ("rho", "theta"):
        arr = getattr(state, name)
        for i in np.flatnonzero(arr <= 0):
            out.append(Violation(int(i), name, "positive", float(arr[i])))
        if band:
            lo, hi = band
            for i in np.flatnonzero((arr < lo) | (arr > hi)):
                out.append(Violation(int(i), name, "band", float(arr[i])))
    walls = (0, grid.n)
    for name in ("u", "q") if check_q_boundary else ("u",):
        arr = getattr(state, name)
        for i in walls:
            if arr[i] != 0.0:
                out.append(Violation(i, name, "boundary", float(arr[i])))
    return out


def in_band(state: RadialState, band=BAND):
    lo, hi = band
    return bool(
        lo <= state.rho.min() and state.rho.max() <= hi and lo <= state.theta.min() and state.theta.max() <= hi
    )


def well_prepared_flux(theta, grid: RadialGrid, params: PhysParams):
    """Fourier flux ``-kappa(theta) theta_r`` with the wall values zeroed."""
    q = -params.kappa(theta) * ddr(theta, grid)
    q[0] = q[-1] = 0.0
    return q


def perturbation_data(
    grid: RadialGrid,
    amplitude: float,
    mode: int,
    params: PhysParams,
    well_prepared: bool = True,
    defect: float = 0.0,
    t: float = 0.0,
) -> RadialState:
    """Smooth small perturbation of the rest state.

    Density and temperature are ``1 + A s`` with ``s = sin^2(mode*pi*x)`` on
    the normalised coordinate ``x``; the velocity is ``A s^2`` so that it has
    a double zero at the walls and the first time derivative of the velocity
    also vanishes there.  The heat flux is the Fourier flux of the
    temperature.  The temperature rows next to each wall are adjusted so that
    the one-sided wall gradient is exactly zero, which makes the discrete
    well-preparedness measure vanish to roundoff.

    Parameters
    ----------
    well_prepared : bool
        When False the heat flux is set to zero instead.
    defect : float
        Adds ``defect * phi / ||r phi||_H1`` with ``phi = sin(pi x)`` to the
        heat flux, so the preparedness measure equals ``defect``.
    """
    if int(mode) != mode or mode < 1:
        raise ParameterError(f"mode must be an integer >= 1, got {mode!r}")
    if amplitude < 0:
        raise ParameterError("amplitude must be non-negative")
    x = grid.x
    s = np.sin(mode * np.pi * x) ** 2
    s[0] = s[-1] = 0.0
    rho = 1.0 + amplitude * s
    theta = 1.0 + amplitude * s
    u = amplitude * s**2
    u[0] = u[-1] = 0.0
    if amplitude > 0:
        theta[2] = 4 * theta[1] - 3 * theta[0]
        theta[-3] = 4 * theta[-2] - 3 * theta[-1]
    q = well_prepared_flux(theta, grid, params) if well_prepared else np.zeros(grid.size)
    if defect:
        phi = np.sin(np.pi * x)
        phi[0] = phi[-1] = 0.0
        q = q + defect * phi / weighted_H1(phi, 2, grid)
    return RadialState(rho, u, theta, q, t)


def compatibility_check(state0: RadialState, grid: RadialGrid, params: PhysParams, variant):
    """Zeroth and first order compatibility at the walls.

    Returns ``(k0_ok, k1_ok, residuals)`` where the k=1 residual is the wall
    magnitude of ``u_t`` and ``q_t`` from the unmasked semi-discrete operator.
    ``k1_ok`` uses a loose threshold of ``10 * dr**2`` relative to the field
    scale and is meant as a screen; the residuals themselves are the result.
    """
    from .dynamics import ModelVariant, rhs

    variant = ModelVariant.parse(variant)
    if variant is not ModelVariant.NSF and params.tau <= 0:
        raise ConfigurationError(f"{variant.name} needs tau > 0 for the heat-flux time derivative")
    walls = [0, grid.n]
    k0 = float(np.max(np.abs(np.concatenate([state0.u[walls], state0.q[walls] if variant is not ModelVariant.NSF else [0.0]]))))
    out = rhs(state0, grid, params, variant, mask_boundary=False)
    k1_u = float(np.max(np.abs(out.du[walls])))
    k1_q = float(np.max(np.abs(out.dq[walls]))) if variant is not ModelVariant.NSF else 0.0
    scale = 1.0 + float(np.max(np.abs(state0.as_vector() - np.array([[1.0], [0.0], [1.0], [0.0]]))))
    tol = 10.0 * grid.dr**2 * scale
    residuals = {"k0": k0, "k1_u": k1_u, "k1_q": k1_q}
    return k0 == 0.0, max(k1_u, k1_q) <= tol, residuals


def _fmt(arr):
    return "[" + ",".join(format(float(v), ".16e") for v in arr) + "]"


def snapshot_line(state: RadialState, grid: RadialGrid) -> str:
    """One NDJSON line; every number carries 17 significant digits."""
    parts = [f'"t":{state.t:.16e}', f'"r":{_fmt(grid.nodes)}']
    parts += [f'"{name}":{_fmt(getattr(state, name))}' for name in FIELDS]
    return "{" + ",".join(parts) + "}"


def write_snapshots(path, states, grid: RadialGrid):
    with open(path, "w", encoding="utf-8") as fh:
        for st in states:
            fh.write(snapshot_line(st, grid) + "\n")


def read_snapshots(path) -> Iterator[RadialState]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                yield RadialState(obj["rho"], obj["u"], obj["theta"], obj["q"], obj["t"])
