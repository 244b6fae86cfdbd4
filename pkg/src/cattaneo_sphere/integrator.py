"""Time stepping: an L-stable IMEX Runge-Kutta scheme and a Picard splitting.

The IMEX scheme is the two-stage second-order SSP pair with
``gamma = 1 - 1/sqrt(2)``: Heun's method on the nonstiff part and an SDIRK
tableau on the stiff part.  Each implicit stage is linear: the viscous and
heat-conduction coefficients are taken from the stage input, and the
heat-flux relaxation is solved pointwise with the stage temperature and
density.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from . import _kernels
from .constitutive import BAND, PhysParams
from .dynamics import ModelVariant, check_heat_capacity, check_positive, node_coefficients, rhs_arrays
from .errors import NumericalError, ParameterError, SimulationAborted, StateError
from .grid import RadialGrid, ddr
from .state import FIELDS, RadialState, validate

GAMMA = 1.0 - 1.0 / math.sqrt(2.0)
SCHEMES = ("IMEX", "PICARD_SPLIT")
FIELD_INDEX = {name: k for k, name in enumerate(FIELDS)}


@dataclass
class StepControl:
    """Time-stepping options.

    ``fixed_dt`` bypasses the CFL estimate.  ``frozen`` names fields whose
    tendencies are zeroed, which isolates sub-dynamics in tests.
    ``picard_transport`` is ``"central"`` or ``"upwind"``.  A
    ``stencil_scale`` other than 1 makes the explicit operator inconsistent
    and exists only as a negative control for verification runs.
    """

    cfl: float = 0.4
    dt_max: float = 0.01
    t_end: float = 5.0
    output_every: float = 0.05
    scheme: str = "IMEX"
    picard_iters: int = 2
    newton_tol: float = 1e-10
    art_diss: float = 0.5
    fixed_dt: Optional[float] = None
    frozen: Sequence[str] = ()
    picard_transport: str = "central"
    stencil_scale: float = 1.0

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ParameterError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not self.dt_max > 0:
            raise ParameterError("dt_max must be positive")
        if self.picard_iters < 1:
            raise ParameterError("picard_iters must be >= 1")
        if self.scheme not in SCHEMES:
            raise ParameterError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.fixed_dt is not None and not self.fixed_dt > 0:
            raise ParameterError("fixed_dt must be positive")
        if not self.output_every > 0:
            raise ParameterError("output_every must be positive")
        if self.picard_transport not in ("central", "upwind"):
            raise ParameterError("picard_transport must be 'central' or 'upwind'")
        for f in self.frozen:
            if f not in FIELD_INDEX:
                raise ParameterError(f"unknown field {f!r} in frozen list")

    def eps_art(self, variant):
        return self.art_diss if variant is ModelVariant.EULER_CC else 0.0


def wave_speed(state, params: PhysParams, variant):
    """Acoustic plus second-sound speed at every node."""
    variant = ModelVariant.parse(variant)
    params = variant.effective_params(params)
    th, rho = state.theta, state.rho
    c = np.sqrt(params.R * th * (1.0 + params.R / params.Cv))
    if variant is not ModelVariant.NSF:
        from .constitutive import e_theta

        e_th = np.maximum(e_theta(th, state.q, params), 1e-12)
        c = c + np.sqrt(params.kappa(th) / (params.tau * params.g(th) * rho * e_th))
    return c


def stable_dt(state, grid: RadialGrid, params: PhysParams, variant, control: StepControl):
    c = np.abs(state.u) + wave_speed(state, params, variant)
    return float(min(control.cfl * grid.dr / c.max(), control.dt_max))


def _banded_matvec(lower, diag, upper, x):
    y = diag * x
    y[1:] += lower[1:] * x[:-1]
    y[:-1] += upper[:-1] * x[1:]
    return y


def _solve(lower, diag, upper, c, b):
    out = np.empty_like(b)
    try:
        _kernels.solve_shifted(lower, diag, upper, c, np.ascontiguousarray(b), out)
    except (ZeroDivisionError, np.linalg.LinAlgError) as exc:
        raise NumericalError(f"tridiagonal solve failed: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise NumericalError("tridiagonal solve produced non-finite values")
    return out


def _finish(y, grid, params, variant, t):
    y[1, 0] = y[1, -1] = 0.0
    if variant is ModelVariant.NSF:
        y[3] = -params.kappa(y[2]) * ddr(y[2], grid)
    else:
        y[3, 0] = y[3, -1] = 0.0
    st = RadialState(y[0], y[1], y[2], y[3], t)
    check_positive(st)
    bad = [(k, i) for k in range(4) for i in np.flatnonzero(~np.isfinite(y[k]))]
    if bad:
        raise StateError(f"non-finite values at {len(bad)} node(s)", [(i, FIELDS[k], float(y[k, i])) for k, i in bad])
    if variant is not ModelVariant.NSF:
        check_heat_capacity(st, params)
    return st


def _mask_walls(f):
    f[1, 0] = f[1, -1] = 0.0
    f[3, 0] = f[3, -1] = 0.0
    return f


def _conservative_matvec(lower, upper, x):
    """Apply a tridiagonal operator whose rows sum to zero, in difference form."""
    out = np.zeros_like(x)
    dx = np.diff(x)
    out[:-1] += upper[:-1] * dx
    out[1:] -= lower[1:] * dx
    return out


class _ImexOperator:
    """Stiff solves and nonstiff evaluations for one step.

    The implicit stage never alters the density, and for the heat-flux
    variants not the temperature either, so the linear operators are built
    from the stage input ``W``: their coefficients are then exactly those of
    the stage value.  For the Fourier-law variant the temperature-dependent
    coefficients lag the implicit heat solve of the same stage.
    """

    def __init__(self, grid, params, variant, control, gdt):
        self.grid, self.params, self.variant = grid, params, variant
        self.gdt = gdt
        self.eps = control.eps_art(variant)
        self.frozen = [FIELD_INDEX[f] for f in control.frozen]
        self.scale = control.stencil_scale
        self.viscous = variant is not ModelVariant.EULER_CC and (params.mu or params.lam) and 1 not in self.frozen
        self.heat = variant is ModelVariant.NSF and 2 not in self.frozen
        self.relax = variant is not ModelVariant.NSF and 3 not in self.frozen
        n1 = grid.size
        self.vb = tuple(np.empty(n1) for _ in range(3))
        self.hb = tuple(np.empty(n1) for _ in range(3))
        # rows whose source term is resolved with the stiff operator
        self.stiff_rows = [k for k, on in ((1, self.viscous), (2, self.heat), (3, self.relax)) if on]

    def split_forcing(self, f):
        """Return ``(explicit, implicit)`` copies of a source array."""
        f = _mask_walls(np.array(f, dtype=float))
        for k in self.frozen:
            f[k] = 0.0
        fi = np.zeros_like(f)
        fi[self.stiff_rows] = f[self.stiff_rows]
        f[self.stiff_rows] = 0.0
        return f, fi

    def implicit(self, W, source=None):
        """Solve ``Y = W + gdt * F_I(Y)`` and return ``(Y, F_I(Y))``.

        ``source`` is an optional state-independent part of ``F_I``.
        """
        grid, p = self.grid, self.params
        FI = np.zeros_like(W) if source is None else source.copy()
        if source is not None:
            W = W + self.gdt * source
        Y = W.copy()
        if self.viscous or self.heat:
            c = node_coefficients(W[2], p, self.variant)
        if self.viscous:
            _kernels.viscous_bands(W[0], W[2], c.nu, c.nup, grid.nodes, grid.dr, *self.vb)
            Y[1] = _solve(*self.vb, self.gdt, W[1])
            FI[1] += _banded_matvec(*self.vb, Y[1])
        if self.heat:
            _kernels.heat_bands(W[0], c.kap, grid.nodes, grid.dr, p.Cv, *self.hb)
            # solve for the increment so that a uniform temperature stays exact
            inc = _solve(*self.hb, self.gdt, self.gdt * _conservative_matvec(self.hb[0], self.hb[2], W[2]))
            Y[2] = W[2] + inc
            FI[2] += inc / self.gdt
        if self.relax:
            th, rho = Y[2], Y[0]
            rate = 1.0 / (p.tau * p.g(th) * rho)
            target = p.kappa(th) * ddr(th, grid)
            Q = (W[3] - self.gdt * rate * target) / (1.0 + self.gdt * rate)
            Q[0], Q[-1] = W[3, 0], W[3, -1]
            Y[3] = Q
            FI[3] += -(Q + target) * rate
            FI[3, 0] = FI[3, -1] = 0.0
        return Y, FI

    def explicit(self, Y, source=None):
        ns, _, _ = rhs_arrays(Y[0], Y[1], Y[2], Y[3], self.grid, self.params, self.variant, eps_art=self.eps,
                              stencil_scale=self.scale)
        if source is not None:
            ns = ns + source
        for k in self.frozen:
            ns[k] = 0.0
        return ns


def step_imex(state: RadialState, dt, grid: RadialGrid, params: PhysParams, variant, control: StepControl,
              forcing: Optional[Callable] = None) -> RadialState:
    """Advance one IMEX step of size ``dt``.

    ``forcing(t)`` may return a ``(4, n+1)`` source.  Its rows for fields
    with a stiff operator are resolved inside the implicit stages, the
    others explicitly.
    """
    variant = ModelVariant.parse(variant)
    params = variant.effective_params(params)
    y0 = state.as_vector()
    op = _ImexOperator(grid, params, variant, control, GAMMA * dt)
    if forcing is None:
        fe1 = fe2 = fi1 = fi2 = None
    else:
        # explicit rows at the explicit stage times (0, 1), stiff rows at the
        # implicit stage times (gamma, 1 - gamma)
        fe1, _ = op.split_forcing(forcing(state.t))
        fe2, _ = op.split_forcing(forcing(state.t + dt))
        _, fi1 = op.split_forcing(forcing(state.t + GAMMA * dt))
        _, fi2 = op.split_forcing(forcing(state.t + (1.0 - GAMMA) * dt))
    Y1, FI1 = op.implicit(y0, fi1)
    check_positive(RadialState(Y1[0], Y1[1], Y1[2], Y1[3]))
    FE1 = op.explicit(Y1, fe1)
    W2 = y0 + dt * FE1 + (dt * (1.0 - 2.0 * GAMMA)) * FI1
    check_positive(RadialState(W2[0], W2[1], W2[2], W2[3]))
    Y2, FI2 = op.implicit(W2, fi2)
    FE2 = op.explicit(Y2, fe2)
    y1 = y0 + (0.5 * dt) * (FE1 + FE2 + FI1 + FI2)
    for k in op.frozen:
        y1[k] = y0[k]
    return _finish(y1, grid, params, variant, state.t + dt)


# ---------------------------------------------------------------------------
# Picard splitting


def _diff_matrix(grid: RadialGrid):
    n1, h = grid.size, grid.dr
    D = sp.lil_matrix((n1, n1))
    for i in range(1, n1 - 1):
        D[i, i - 1], D[i, i + 1] = -0.5 / h, 0.5 / h
    D[0, 0], D[0, 1], D[0, 2] = -1.5 / h, 2.0 / h, -0.5 / h
    D[-1, -1], D[-1, -2], D[-1, -3] = 1.5 / h, -2.0 / h, 0.5 / h
    return D.tocsr()


def _upwind_matrix(grid: RadialGrid, vel):
    n1, h = grid.size, grid.dr
    rows, cols, vals = [], [], []
    for i in range(n1):
        if (vel[i] >= 0 and i > 0) or i == n1 - 1:
            rows += [i, i]
            cols += [i, i - 1]
            vals += [1.0 / h, -1.0 / h]
        else:
            rows += [i, i]
            cols += [i + 1, i]
            vals += [1.0 / h, -1.0 / h]
    return sp.csr_matrix((vals, (rows, cols)), shape=(n1, n1))


_DIFF_CACHE = {}


def _D(grid):
    key = (grid.r_min, grid.r_max, grid.n)
    if key not in _DIFF_CACHE:
        _DIFF_CACHE[key] = _diff_matrix(grid)
    return _DIFF_CACHE[key]


def _picard_sweep(y0, yt, dt, grid, params, variant, control):
    """One linear sweep with coefficients frozen at ``yt``."""
    from .constitutive import coeff_a, coeff_a_prime

    n1 = grid.size
    r = grid.nodes
    D = _D(grid)
    I = sp.identity(n1, format="csr")
    rho, u, th, q = yt
    R, Cv = params.R, params.Cv
    c = node_coefficients(th, params, variant)
    ur = D @ u
    div = ur + 2 * u / r
    heat = (4.0 / 3.0) * c.mu * (ur - u / r) ** 2 + c.lam * div**2
    half = 0.5 * dt

    # (theta, q) block with implicit-midpoint averages
    e_th = Cv + coeff_a_prime(th, params) * q**2
    a = coeff_a(th, params)
    B = rho * u * e_th - 2 * a / c.Z * q
    S = -R * rho * th * div + (2 / c.tau_n + 4 * rho * u / r) * a * q**2 + heat
    m_th = rho * e_th
    m_q = c.tau_n * rho
    Lth_th = sp.diags(B) @ D
    Lth_q = D + sp.diags(2 / r)
    Lq_q = sp.diags(m_q * u) @ D + sp.diags(2 * m_q * u / r + 1.0)
    Lq_th = sp.diags(c.kap) @ D
    A11 = sp.diags(m_th / dt) + 0.5 * Lth_th
    A12 = 0.5 * Lth_q
    A21 = 0.5 * Lq_th
    A22 = sp.diags(m_q / dt) + 0.5 * Lq_q
    b1 = m_th / dt * y0[2] - 0.5 * (Lth_th @ y0[2] + Lth_q @ y0[3]) + S
    b2 = m_q / dt * y0[3] - 0.5 * (Lq_th @ y0[2] + Lq_q @ y0[3])
    M = sp.bmat([[A11, A12], [A21, A22]], format="lil")
    for row in (n1, 2 * n1 - 1):
        M.rows[row], M.data[row] = [row], [1.0]
    b2[0] = b2[-1] = 0.0
    sol = spsolve(M.tocsc(), np.concatenate([b1, b2]))
    th_new, q_new = sol[:n1], sol[n1:]

    # velocity: viscous plus advection, Dirichlet walls
    lo, di, up = (np.zeros(n1) for _ in range(3))
    if variant is not ModelVariant.EULER_CC and np.any(c.nu):
        _kernels.viscous_bands(np.ascontiguousarray(rho), np.ascontiguousarray(th), c.nu, c.nup, r, grid.dr, lo, di, up)
    adv = u / (2 * grid.dr)
    lo[1:-1] += adv[1:-1]
    up[1:-1] -= adv[1:-1]
    pr = R * ((D @ rho) * th + rho * (D @ th)) / rho
    rhs_u = y0[1] + half * _banded_matvec(lo, di, up, y0[1]) - dt * pr
    rhs_u[0] = rhs_u[-1] = 0.0
    u_new = _solve(lo, di, up, half, rhs_u)

    # density: linear transport by the frozen velocity
    T = _upwind_matrix(grid, u) if control.picard_transport == "upwind" else D
    Lrho = sp.diags(u) @ T + sp.diags(ur + 2 * u / r)
    rho_new = spsolve((I + half * Lrho).tocsc(), y0[0] - half * (Lrho @ y0[0]))
    return np.stack([rho_new, u_new, th_new, q_new])


def step_picard(state: RadialState, dt, grid: RadialGrid, params: PhysParams, variant, control: StepControl) -> RadialState:
    """Advance one step by ``control.picard_iters`` linearised sweeps.

    Each sweep freezes the coefficients at the average of the old state and
    the previous iterate, then solves the temperature/heat-flux pair, the
    velocity and the density problems in turn.  The iteration converges to
    the implicit midpoint rule for the same semi-discrete system.
    """
    variant = ModelVariant.parse(variant)
    if variant is not ModelVariant.RELAXED:
        raise ParameterError("the Picard splitting is implemented for the relaxed system only")
    params = variant.effective_params(params)
    y0 = state.as_vector()
    yk = y0
    for _ in range(control.picard_iters):
        yk = _picard_sweep(y0, 0.5 * (y0 + yk), dt, grid, params, variant, control)
        check_positive(RadialState(*yk))
    for k in (FIELD_INDEX[f] for f in control.frozen):
        yk[k] = y0[k]
    return _finish(yk, grid, params, variant, state.t + dt)


def step(state, dt, grid, params, variant, control, forcing=None):
    if control.scheme == "PICARD_SPLIT":
        if forcing is not None:
            raise ParameterError("forcing is supported by the IMEX scheme only")
        return step_picard(state, dt, grid, params, variant, control)
    return step_imex(state, dt, grid, params, variant, control, forcing)


# ---------------------------------------------------------------------------
# driver


@dataclass
class RunReport:
    steps: int = 0
    wall_time: float = 0.0
    t_final: float = 0.0
    field_min: dict = field(default_factory=dict)
    field_max: dict = field(default_factory=dict)
    band_exited: bool = False
    aborted: bool = False
    message: str = ""
    dt_values: List[float] = field(default_factory=list)
    art_diss: float = 0.0
    backend: str = _kernels.BACKEND_NAME

    def update_extrema(self, st):
        for name in FIELDS:
            arr = getattr(st, name)
            lo, hi = float(arr.min()), float(arr.max())
            self.field_min[name] = min(self.field_min.get(name, lo), lo)
            self.field_max[name] = max(self.field_max.get(name, hi), hi)
        lo, hi = BAND
        if min(self.field_min["rho"], self.field_min["theta"]) < lo or max(self.field_max["rho"], self.field_max["theta"]) > hi:
            self.band_exited = True

    def summary(self):
        lines = [
            f"steps: {self.steps}",
            f"t_final: {self.t_final:.6g}",
            f"wall_time_s: {self.wall_time:.3f}",
            f"backend: {self.backend}",
            f"dt: {min(self.dt_values, default=0):.6g} .. {max(self.dt_values, default=0):.6g}",
            f"band_exited: {self.band_exited}",
            f"artificial_dissipation: {self.art_diss:g}",
        ]
        for name in FIELDS:
            lines.append(f"{name}: min {self.field_min.get(name, float('nan')):.6g} max {self.field_max.get(name, float('nan')):.6g}")
        if self.aborted:
            lines.append(f"aborted: {self.message}")
        return "\n".join(lines)


def output_times(t_end, every):
    k = int(math.floor(t_end / every + 1e-9))
    times = [every * i for i in range(1, k + 1)]
    if not times or t_end - times[-1] > 1e-12 * max(1.0, t_end):
        times.append(t_end)
    else:
        times[-1] = t_end
    return times


def prepare_initial(initial, grid, params, variant):
    """Replace the heat flux by the Fourier flux for the Fourier-law variant."""
    variant = ModelVariant.parse(variant)
    if variant is ModelVariant.NSF:
        return initial.replace(q=-params.kappa(initial.theta) * ddr(initial.theta, grid))
    return initial


def run(initial: RadialState, grid: RadialGrid, params: PhysParams, variant, control: StepControl,
        sink: Optional[Callable] = None, forcing: Optional[Callable] = None):
    """Integrate to ``control.t_end`` and return ``(final_state, report)``.

    ``sink(history)`` receives, at ``t = 0`` and at every output time, the
    list of the last (up to three) step levels, newest last.  Steps within
    each output interval are uniform; their size is the CFL estimate at the
    interval start unless ``control.fixed_dt`` is set.
    """
    variant = ModelVariant.parse(variant)
    params = variant.effective_params(params)
    if control.t_end < 0:
        raise ParameterError("t_end must be non-negative")
    violations = validate(initial, grid, check_q_boundary=variant is not ModelVariant.NSF)
    if violations:
        raise StateError(f"initial state invalid: {violations[0]}", [(v.index, v.field, v.value) for v in violations])
    report = RunReport(art_diss=control.eps_art(variant))
    start = time.perf_counter()
    state = prepare_initial(initial, grid, params, variant)
    report.update_extrema(state)
    history = [state]
    if sink is not None:
        sink(list(history))
    if control.t_end == 0:
        report.t_final = state.t
        return state, report
    t0 = state.t
    t_prev = t0
    try:
        for t_out in output_times(control.t_end, control.output_every):
            t_out = t0 + t_out
            interval = t_out - t_prev
            dt0 = control.fixed_dt or stable_dt(state, grid, params, variant, control)
            nsub = max(1, int(math.ceil(interval / dt0 - 1e-9)))
            dt = interval / nsub
            for k in range(nsub):
                new = step(state, dt, grid, params, variant, control, forcing)
                if k == nsub - 1:
                    new = new.replace(t=t_out)
                state = new
                report.steps += 1
                report.update_extrema(state)
                history.append(state)
                if len(history) > 3:
                    history.pop(0)
            report.dt_values.append(dt)
            t_prev = t_out
            if sink is not None:
                sink(list(history))
    except (StateError, NumericalError) as exc:
        report.aborted = True
        report.message = str(exc)
        report.t_final = state.t
        report.wall_time = time.perf_counter() - start
        raise SimulationAborted(f"run aborted at t={state.t:.6g}: {exc}", report=report, cause=exc) from exc
    report.t_final = state.t
    report.wall_time = time.perf_counter() - start
    return state, report
