"""Discrete energy, dissipation, entropy and distance functionals.

Time derivatives come from backward differences over the last three step
levels of a run.  A single-level history (the initial state) falls back to
derivatives computed from the operator itself.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import astuple, dataclass, fields
from typing import List, Optional, Sequence

import numpy as np

from .constitutive import BAND, PhysParams, relative_entropy_density
from .dynamics import ModelVariant, entropy_budget, rhs_time_derivatives
from .errors import ComparisonError, ParameterError
from .grid import RadialGrid, d2dr2, d3dr3, ddr, integrate, weighted_H1, weighted_L2
from .state import RadialState, in_band

CSV_COLUMNS = ("t", "E_core", "E_time", "D_inst", "entropy", "entropy_residual", "wellprep", "band_ok")


def _sq(f, w, grid):
    return integrate(np.asarray(f) ** 2, grid, w)


def _sqsum(arrays, w, grid):
    return sum(_sq(f, w, grid) for f in arrays)


def time_derivatives(history: Sequence[RadialState], grid, params, variant, eps_art=None):
    """First and second time derivatives of the newest level, shape ``(4, n+1)`` each.

    Uses second-order backward differences on the (possibly nonuniform)
    time levels; with two levels the first derivative is first order and the
    second derivative is taken as zero.  ``complete`` in the returned tuple
    says whether three levels were available.
    """
    if len(history) == 0:
        raise ParameterError("empty history")
    if len(history) == 1:
        f1, f2 = rhs_time_derivatives(history[-1], grid, params, variant, eps_art=eps_art)
        return f1, f2, True
    y = [h.as_vector() for h in history[-3:]]
    ts = [h.t for h in history[-3:]]
    if len(y) == 2:
        return (y[1] - y[0]) / (ts[1] - ts[0]), np.zeros_like(y[1]), False
    h1, h2 = ts[1] - ts[0], ts[2] - ts[1]
    # quadratic through the three levels, derivatives at the newest
    d1 = (y[2] - y[1]) / h2 * (2 * h2 + h1) / (h1 + h2) - (y[1] - y[0]) / h1 * h2 / (h1 + h2)
    d2 = 2.0 * ((y[2] - y[1]) / h2 - (y[1] - y[0]) / h1) / (h1 + h2)
    return d1, d2, True


def _space(state, grid):
    fs = state.as_vector()
    fs[0] -= 1.0
    fs[2] -= 1.0
    return fs


def energy_E(history: Sequence[RadialState], grid: RadialGrid, params: PhysParams, variant=ModelVariant.RELAXED,
             eps_art=None, derivs=None):
    """Instantaneous energy split into ``(E_core, E_time)``.

    ``E_core`` holds the spatial terms up to second derivatives and
    ``E_time`` the time-derivative terms together with the third-order
    velocity term.  Pass precomputed ``derivs = (d1, d2)`` to skip the
    differencing.
    """
    st = history[-1]
    tau = params.tau
    f = _space(st, grid)
    fr = np.stack([ddr(x, grid) for x in st.as_vector()])
    frr = np.stack([d2dr2(x, grid) for x in st.as_vector()])
    u, q = st.u, st.q
    e_core = _sqsum(f, 2, grid) + _sqsum(fr, 2, grid) + _sq(u, 0, grid) + _sq(q, 0, grid)
    e_core += _sq(fr[1], 0, grid) + _sq(fr[3], 0, grid) + _sqsum(frr, 2, grid)
    if derivs is None:
        d1, d2, _ = time_derivatives(history, grid, params, variant, eps_art)
    else:
        d1, d2 = derivs
    w = np.array([1.0, 1.0, 1.0, math.sqrt(tau)])[:, None]
    d1w, d2w = d1 * w, d2 * w
    d1r = np.stack([ddr(x, grid) for x in d1w])
    e_time = _sqsum(d1w, 2, grid) + _sqsum(d1r, 2, grid) + tau**2 * _sqsum(d2w, 2, grid)
    nu = 4.0 * params.mu / 3.0 + params.lam
    if nu and grid.n >= 5:
        e_time += nu**2 * (_sq(d3dr3(u, grid), 2, grid) + tau**2 * _sq(d2dr2(d1[1], grid), 2, grid))
    return float(e_core), float(e_time)


def dissipation_D(history: Sequence[RadialState], grid: RadialGrid, params: PhysParams, variant=ModelVariant.RELAXED,
                  eps_art=None, derivs=None):
    """Instantaneous dissipation integrand of the uniform bound."""
    st = history[-1]
    tau = params.tau
    v = st.as_vector()
    if derivs is None:
        d1, d2, _ = time_derivatives(history, grid, params, variant, eps_art)
    else:
        d1, d2 = derivs
    fr = np.stack([ddr(x, grid) for x in v])
    frr = np.stack([d2dr2(x, grid) for x in v])
    d1r = np.stack([ddr(x, grid) for x in d1])
    out = _sq(st.q, 2, grid)
    out += _sqsum(d1, 2, grid) + _sqsum(fr, 2, grid)
    out += _sq(st.u, 0, grid) + _sq(st.q, 0, grid)
    out += _sqsum(frr, 2, grid)
    out += _sq(fr[1], 0, grid) + _sq(fr[3], 0, grid) + _sq(d1[1], 0, grid) + _sq(d1[3], 0, grid)
    out += _sqsum(d1r, 2, grid)
    out += _sqsum(d2[:3], 2, grid)
    out += tau**2 * _sq(d2[3], 2, grid)
    nu = 4.0 * params.mu / 3.0 + params.lam
    if nu:
        out += nu * (_sq(d2dr2(d1[1], grid), 2, grid) + _sq(ddr(d2[1], grid), 2, grid))
    return float(out)


def entropy_integral(state, grid, params):
    return float(integrate(relative_entropy_density(state.rho, state.theta, state.u, state.q, params), grid, 2))


def wellprep_measure(state, grid, params, weight_inside=True):
    """Weighted H1 size of the heat-flux defect ``q + kappa(theta) theta_r``."""
    defect = state.q + params.kappa(state.theta) * ddr(state.theta, grid)
    return weighted_H1(defect, 2, grid, weight_inside=weight_inside)


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    E_core: float
    E_time: float
    D_inst: float
    entropy: float
    entropy_residual: float
    wellprep: float
    band_ok: bool
    complete: bool = True

    @property
    def E(self):
        return self.E_core + self.E_time

    def csv_row(self):
        vals = astuple(self)[: len(CSV_COLUMNS)]
        return [format(v, ".17g") if isinstance(v, float) else str(int(v)) if isinstance(v, bool) else str(v) for v in vals]


def diagnose(history, grid, params, variant=ModelVariant.RELAXED, eps_art=None) -> DiagnosticsRecord:
    variant = ModelVariant.parse(variant)
    params = variant.effective_params(params)
    st = history[-1]
    d1, d2, complete = time_derivatives(history, grid, params, variant, eps_art)
    e_core, e_time = energy_E(history, grid, params, variant, derivs=(d1, d2))
    d_inst = dissipation_D(history, grid, params, variant, derivs=(d1, d2))
    if variant is ModelVariant.NSF:
        # the flux is -kappa theta_r by construction, so the defect is zero
        residual = wellprep = 0.0
    else:
        residual = entropy_budget(st, grid, params, variant, eps_art=eps_art)["residual"]
        wellprep = wellprep_measure(st, grid, params)
    return DiagnosticsRecord(
        t=st.t,
        E_core=e_core,
        E_time=e_time,
        D_inst=d_inst,
        entropy=entropy_integral(st, grid, params),
        entropy_residual=float(residual),
        wellprep=wellprep,
        band_ok=in_band(st, BAND),
        complete=complete,
    )


class DiagnosticsSink:
    """Collects one record per output time from a single run.

    Pass an instance as the ``sink`` of :func:`integrator.run`.  Snapshots
    of the newest state are kept when ``keep_states`` is set.
    """

    def __init__(self, grid, params, variant=ModelVariant.RELAXED, eps_art=None, keep_states=False):
        self.grid = grid
        self.variant = ModelVariant.parse(variant)
        self.params = self.variant.effective_params(params)
        self.eps_art = eps_art
        self.keep_states = keep_states
        self.records: List[DiagnosticsRecord] = []
        self.states: List[RadialState] = []

    def __call__(self, history):
        self.records.append(diagnose(history, self.grid, self.params, self.variant, self.eps_art))
        if self.keep_states:
            self.states.append(history[-1])

    def state_at(self, t, tol=1e-9):
        for st in self.states:
            if abs(st.t - t) <= tol:
                return st
        raise KeyError(f"no snapshot at t={t}")

    def to_csv(self, fh=None):
        text = records_to_csv(self.records)
        if fh is not None:
            fh.write(text)
        return text


def records_to_csv(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rec in records:
        w.writerow(rec.csv_row())
    return buf.getvalue()


def uniform_bound_monitor(records: Sequence[DiagnosticsRecord]):
    """``(sup E, int D dt, ratio)`` with ``ratio = (sup E + int D) / E(0)``.

    The ratio is defined as 1 when the initial energy vanishes.  The
    dissipation integral uses the trapezoid rule except on the first
    interval, which takes its right endpoint value: data that are not
    compatible to high order make the pointwise dissipation at ``t = 0``
    grow with grid refinement, while its time integral stays bounded.
    """
    if len(records) < 2:
        raise ParameterError("need at least two records")
    sup_e = max(r.E for r in records)
    ts = np.array([r.t for r in records])
    ds = np.array([r.D_inst for r in records])
    widths = np.diff(ts)
    int_d = float(ds[1] * widths[0] + np.sum(0.5 * (ds[2:] + ds[1:-1]) * widths[1:]))
    e0 = records[0].E
    ratio = 1.0 if e0 == 0 else (sup_e + int_d) / e0
    return float(sup_e), int_d, float(ratio)


INTERIOR_TRIM = 2


def _check_comparable(a, b, grid, tol=1e-9):
    if len(a) != grid.size or len(b) != grid.size:
        raise ComparisonError("states do not live on this grid")
    if abs(a.t - b.t) > tol:
        raise ComparisonError(f"time stamps differ: {a.t} vs {b.t}")


def _derivs_up_to(f, order, grid):
    out = [f]
    if order >= 1:
        out.append(ddr(f, grid))
    if order >= 2:
        out.append(d2dr2(f, grid))
    if order >= 3:
        raise ParameterError("distance order is capped at 2")
    return out


def solution_distance(a: RadialState, b: RadialState, grid: RadialGrid, order=2, weight_power=2,
                      fields=("rho", "u", "theta", "q"), trim=INTERIOR_TRIM, params: Optional[PhysParams] = None,
                      fourier_flux=False):
    """Interior weighted Sobolev distance between two states.

    With ``fourier_flux`` the heat flux of ``b`` is replaced by
    ``-kappa(theta_b) (theta_b)_r`` before comparing, which is the right
    counterpart for a Fourier-law reference.
    """
    _check_comparable(a, b, grid)
    total = 0.0
    for name in fields:
        fa = getattr(a, name)
        fb = getattr(b, name)
        if name == "q" and fourier_flux:
            if params is None:
                raise ParameterError("params needed for the Fourier flux comparison")
            fb = -params.kappa(b.theta) * ddr(b.theta, grid)
        for d in _derivs_up_to(fa - fb, order, grid):
            total += integrate(d * d, grid, weight_power, trim)
    return float(math.sqrt(max(total, 0.0)))


def rate_fit(pairs, floor=1e-16):
    """Least-squares slope of ``log(distance)`` against ``log(parameter)``.

    Returns ``(exponent, r_squared)``; distances are floored at ``floor``.
    """
    pairs = list(pairs)
    if len(pairs) < 3:
        raise ParameterError("rate_fit needs at least three pairs")
    x = np.array([p for p, _ in pairs], dtype=float)
    y = np.array([d for _, d in pairs], dtype=float)
    if np.any(x <= 0):
        raise ParameterError("parameters must be positive")
    lx, ly = np.log(x), np.log(np.maximum(y, floor))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(slope), float(r2)
