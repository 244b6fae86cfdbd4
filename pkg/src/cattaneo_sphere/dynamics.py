"""Semi-discrete right-hand sides for the three model variants.

Fields are evolved in primitive form on collocated nodes.  Each evaluation
is split into a stiff part (viscous velocity operator, heat-flux relaxation
including its Fourier target, and for the Fourier-law variant the heat
conduction operator) and a nonstiff remainder, so that the integrator can
treat the former implicitly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels
from .constitutive import PhysParams, coeff_a, coeff_A, coeff_a_prime, coeff_A_prime, e_theta, z_derivatives
from .errors import ConfigurationError, StateError
from .grid import RadialGrid, integrate

DEFAULT_ART_DISS = 0.5


class ModelVariant(enum.Enum):
    """Which limit system is evolved.

    ``RELAXED`` is the full viscous Cattaneo-Christov system, ``EULER_CC``
    drops viscosity, ``NSF`` replaces the heat-flux equation by Fourier's law.
    """

    RELAXED = _kernels.RELAXED
    EULER_CC = _kernels.EULER_CC
    NSF = _kernels.NSF

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls[str(value).strip().upper()]
        except KeyError:
            raise ConfigurationError(f"unknown model variant {value!r}") from None

    def effective_params(self, params: PhysParams) -> PhysParams:
        """Validate ``params`` and apply the variant's forced values."""
        if self is ModelVariant.NSF:
            return params if params.tau == 0 else params.replace(tau=0.0)
        if params.tau <= 0:
            raise ConfigurationError(f"{self.name} requires tau > 0")
        if self is ModelVariant.EULER_CC and (params.mu or params.lam):
            return params.replace(mu=0.0, lam=0.0)
        return params

    @property
    def has_flux_equation(self):
        return self is not ModelVariant.NSF


class NodeCoefficients(NamedTuple):
    tau_n: np.ndarray
    kap: np.ndarray
    a: np.ndarray
    ap: np.ndarray
    Z: np.ndarray
    nu: np.ndarray
    nup: np.ndarray
    mu: np.ndarray
    lam: np.ndarray


def _as_array(x, n1):
    x = np.asarray(x, dtype=float)
    return np.ascontiguousarray(np.broadcast_to(x, (n1,))) if x.shape != (n1,) else np.ascontiguousarray(x)


def node_coefficients(theta, params: PhysParams, variant: ModelVariant) -> NodeCoefficients:
    """Temperature-dependent coefficients at every node."""
    theta = np.ascontiguousarray(theta, dtype=float)
    n1 = theta.size
    ones = np.ones(n1)
    zeros = np.zeros(n1)
    if variant is ModelVariant.NSF:
        tau_n, a, ap, Z = ones, zeros, zeros, ones
    elif params.g.constant is not None and params.kappa.constant is not None:
        z = params.tau * params.g.constant / params.kappa.constant
        tau_n = np.full(n1, params.tau * params.g.constant)
        a = z / theta
        ap = -a / theta
        Z = np.full(n1, z)
    else:
        Z, Z1, Z2 = z_derivatives(theta, params, order=2)
        tau_n = _as_array(params.tau * params.g(theta), n1)
        a = Z / theta - 0.5 * Z1
        ap = Z1 / theta - Z / theta**2 - 0.5 * Z2
        Z = _as_array(Z, n1)
        a, ap = _as_array(a, n1), _as_array(ap, n1)
    kap = _as_array(params.kappa(theta), n1)
    if variant is ModelVariant.EULER_CC or (params.mu == 0 and params.lam == 0):
        mu = lam = nu = nup = zeros
    else:
        mu = _as_array(params.mu * params.h(theta), n1)
        lam = _as_array(params.lam * params.l(theta), n1)
        nu = 4.0 * mu / 3.0 + lam
        if params.h.constant is not None and params.l.constant is not None:
            nup = zeros
        else:
            nup = _as_array(4.0 * params.mu * params.h.first(theta) / 3.0 + params.lam * params.l.first(theta), n1)
    return NodeCoefficients(tau_n, kap, a, ap, Z, nu, nup, mu, lam)


@dataclass
class Rhs:
    """Split time derivatives, each of shape ``(4, n+1)``.

    ``nonstiff`` already contains ``artificial``; ``total = nonstiff + stiff``.
    """

    nonstiff: np.ndarray
    stiff: np.ndarray
    artificial: np.ndarray
    variant: ModelVariant

    @property
    def total(self):
        return self.nonstiff + self.stiff

    @property
    def drho(self):
        return self.total[0]

    @property
    def du(self):
        return self.total[1]

    @property
    def dtheta(self):
        return self.total[2]

    @property
    def dq(self):
        return self.total[3]


def check_positive(state):
    bad = []
    for name in ("rho", "theta"):
        arr = getattr(state, name)
        idx = np.flatnonzero(~(arr > 0))
        bad += [(int(i), name, float(arr[i])) for i in idx]
    if bad:
        raise StateError(f"positivity lost at {len(bad)} node(s), first {bad[0]}", bad)


def check_heat_capacity(state, params):
    """Raise when ``e_theta = Cv + a'(theta) q^2`` is not positive somewhere.

    The flux subsystem stops being hyperbolic there, so a run cannot go on.
    """
    e_th = e_theta(state.theta, state.q, params)
    idx = np.flatnonzero(~(e_th > 0))
    if idx.size:
        bad = [(int(i), "e_theta", float(e_th[i])) for i in idx]
        raise StateError(f"positivity lost in e_theta at {len(bad)} node(s), first {bad[0]}", bad)


def rhs_arrays(rho, u, theta, q, grid: RadialGrid, params: PhysParams, variant: ModelVariant,
               mask_boundary=True, eps_art=None, stencil_scale=1.0, coeffs: Optional[NodeCoefficients] = None):
    """Array-level entry point used by the integrator; returns ``(ns, st, art)``."""
    n1 = grid.size
    if coeffs is None:
        coeffs = node_coefficients(theta, params, variant)
    if eps_art is None:
        eps_art = DEFAULT_ART_DISS if variant is ModelVariant.EULER_CC else 0.0
    ns = np.empty((4, n1))
    st = np.empty((4, n1))
    art = np.empty((4, n1))
    _kernels.rhs_parts(
        rho, u, theta, q, grid.nodes, grid.dr * stencil_scale,
        *coeffs, params.Cv, params.R, variant.value, float(eps_art), bool(mask_boundary),
        ns, st, art,
    )
    return ns, st, art


def rhs(state, grid: RadialGrid, params: PhysParams, variant, mask_boundary=True, eps_art=None, stencil_scale=1.0) -> Rhs:
    """Split semi-discrete time derivative of ``state``.

    Parameters
    ----------
    mask_boundary : bool
        Zero the wall rows of the velocity and heat-flux tendencies
        (Dirichlet walls).  Disable to inspect the raw operator there.
    eps_art : float, optional
        Fourth-order artificial dissipation coefficient; defaults to 0.5 for
        ``EULER_CC`` and 0 otherwise.
    stencil_scale : float
        Multiplies the spacing seen by the stencils.  Anything but 1 gives an
        inconsistent operator and is only meant as a negative control.
    """
    variant = ModelVariant.parse(variant)
    params = variant.effective_params(params)
    grid.check(state.rho, "rho")
    check_positive(state)
    ns, st, art = rhs_arrays(
        state.rho, state.u, state.theta, state.q, grid, params, variant,
        mask_boundary=mask_boundary, eps_art=eps_art, stencil_scale=stencil_scale,
    )
    return Rhs(ns, st, art, variant)


def fourier_flux_rate(theta, dtheta, grid, params):
    """Time derivative of ``-kappa(theta) theta_r`` along ``dtheta``."""
    from .grid import ddr

    k1 = params.kappa.first(theta) if params.kappa.constant is None else 0.0
    return -(k1 * dtheta * ddr(theta, grid) + params.kappa(theta) * ddr(dtheta, grid))


def tendency(state, grid, params, variant, eps_art=None):
    """Total time derivative as a ``(4, n+1)`` array.

    For ``NSF`` the heat-flux row is the rate of the Fourier flux, so the
    result describes the stored diagnostic flux as well.
    """
    variant = ModelVariant.parse(variant)
    out = rhs(state, grid, params, variant, eps_art=eps_art).total
    if variant is ModelVariant.NSF:
        out[3] = fourier_flux_rate(state.theta, out[2], grid, params)
    return out


def rhs_time_derivatives(state, grid, params, variant, h=1e-5, eps_art=None):
    """First and second time derivatives from the operator.

    The second derivative is a centred directional difference of the
    tendency along the first one with step ``h``.
    """
    from .state import RadialState

    f1 = tendency(state, grid, params, variant, eps_art)
    y = state.as_vector()
    plus = RadialState.from_vector(y + h * f1, state.t)
    minus = RadialState.from_vector(y - h * f1, state.t)
    f2 = (tendency(plus, grid, params, variant, eps_art) - tendency(minus, grid, params, variant, eps_art)) / (2 * h)
    return f1, f2


# ---------------------------------------------------------------------------
# continuum operator and manufactured solutions


def continuum_rhs(f, r, params: PhysParams, variant):
    """Right-hand side of the PDE with analytic derivatives substituted.

    ``f`` maps names to arrays: ``rho, rho_r, u, u_r, u_rr, theta, theta_r,
    theta_rr, q, q_r``.  Returns a ``(4, len(r))`` array; for ``NSF`` the
    heat-flux row is zero.
    """
    variant = ModelVariant.parse(variant)
    params = variant.effective_params(params)
    rho, u, th, q = f["rho"], f["u"], f["theta"], f["q"]
    rr, ur, urr, thr, qr = f["rho_r"], f["u_r"], f["u_rr"], f["theta_r"], f["q_r"]
    R, Cv = params.R, params.Cv
    div = ur + 2 * u / r
    p = R * rho * th
    out = np.zeros((4, np.size(r)))
    out[0] = -(rr * u + rho * ur) - 2 * rho * u / r
    visc_heat = 0.0
    mom = -rho * u * ur - R * (rr * th + rho * thr)
    if variant is not ModelVariant.EULER_CC:
        mu, lam = params.mu * params.h(th), params.lam * params.l(th)
        nu = 4 * mu / 3 + lam
        nup = 4 * params.mu * params.h.first(th) / 3 + params.lam * params.l.first(th)
        mom = mom + nu * (urr + 2 * ur / r - 2 * u / r**2) + nup * thr * div
        visc_heat = (4.0 / 3.0) * mu * (ur - u / r) ** 2 + lam * div**2
    out[1] = mom / rho
    if variant is ModelVariant.NSF:
        kap = params.kappa(th)
        k1 = params.kappa.first(th)
        lap = k1 * thr**2 + kap * (f["theta_rr"] + 2 * thr / r)
        out[2] = (-rho * u * Cv * thr - p * div + visc_heat + lap) / (rho * Cv)
    else:
        tau_n = params.tau * params.g(th)
        Z = tau_n / params.kappa(th)
        a = coeff_a(th, params)
        e_th = Cv + coeff_a_prime(th, params) * q**2
        B = rho * u * e_th - 2 * a / Z * q
        src = (2 / tau_n + 4 * rho * u / r) * a * q**2
        out[2] = (-B * thr - p * div - (qr + 2 * q / r) + src + visc_heat) / (rho * e_th)
        out[3] = -u * qr - 2 * u * q / r - (q + params.kappa(th) * thr) / (tau_n * rho)
    return out


def mms_residual(exact, t, grid: RadialGrid, params: PhysParams, variant, stencil_scale=1.0):
    """Forcing for a manufactured solution and the discrete mismatch.

    Returns a dict with ``forcing`` (the source making ``exact`` a solution
    of the continuum system), ``forcing_norms`` and ``mismatch`` /
    ``mismatch_norms``: the semi-discrete tendency of the sampled exact
    fields plus forcing minus the exact time derivative.  Wall rows of the
    Dirichlet fields are excluded from the mismatch.
    """
    from .grid import weighted_L2
    from .state import RadialState

    variant = ModelVariant.parse(variant)
    r = grid.nodes
    f = exact.evaluate(r, t)
    dt_exact = np.stack([f["rho_t"], f["u_t"], f["theta_t"], f["q_t"]])
    forcing = dt_exact - continuum_rhs(f, r, params, variant)
    st = RadialState(f["rho"], f["u"], f["theta"], f["q"], t)
    disc = rhs(st, grid, params, variant, stencil_scale=stencil_scale).total
    mismatch = disc + forcing - dt_exact
    mismatch[1, [0, -1]] = 0.0
    mismatch[3, [0, -1]] = 0.0
    if variant is ModelVariant.NSF:
        forcing[3] = 0.0
        mismatch[3] = 0.0
    names = ("rho", "u", "theta", "q")
    return {
        "forcing": forcing,
        "forcing_norms": {k: weighted_L2(forcing[i], 2, grid) for i, k in enumerate(names)},
        "mismatch": mismatch,
        "mismatch_norms": {k: weighted_L2(mismatch[i], 2, grid) for i, k in enumerate(names)},
    }


# ---------------------------------------------------------------------------
# entropy balance


def entropy_gradient(state, params: PhysParams):
    """Partial derivatives of the relative entropy density in (rho, u, theta, q)."""
    rho, u, th, q = state.rho, state.u, state.theta, state.q
    Cv, R = params.Cv, params.R
    gap = coeff_a(th, params) - coeff_A(th, params)
    dgap = coeff_a_prime(th, params) - coeff_A_prime(th, params)
    return np.stack([
        Cv * (th - np.log(th) - 1) + R * np.log(rho) + gap * q**2 + 0.5 * u**2,
        rho * u,
        rho * Cv * (1 - 1 / th) + rho * dgap * q**2,
        2 * rho * gap * q,
    ])


def entropy_flux(state, grid, params: PhysParams):
    """Radial entropy flux at every node; vanishes where ``u = q = 0``."""
    from .grid import ddr

    r = grid.nodes
    rho, u, th, q = state.rho, state.u, state.theta, state.q
    Cv, R = params.Cv, params.R
    ur = ddr(u, grid)
    div = ur + 2 * u / r
    gap = coeff_a(th, params) - coeff_A(th, params)
    mu, lam = params.mu * params.h(th), params.lam * params.l(th)
    bracket = Cv * (th - np.log(th) - 1) + R * (np.log(rho) - 1) + 0.5 * u**2 + gap * q**2
    p = R * rho * th
    return r**2 * (rho * u * bracket + p * u + q - q / th - u * (4 * mu / 3 * (ur - u / r) + lam * div))


def entropy_dissipation(state, grid, params: PhysParams):
    """Pointwise non-negative dissipation density (including the ``r^2``)."""
    from .grid import ddr

    r = grid.nodes
    rho, u, th, q = state.rho, state.u, state.theta, state.q
    ur = ddr(u, grid)
    div = ur + 2 * u / r
    mu, lam = params.mu * params.h(th), params.lam * params.l(th)
    tau_n = params.tau * params.g(th)
    heat = (r**2 + 2 * r * tau_n * rho * u) * q**2 / (params.kappa(th) * th**2)
    visc = (mu / th) * r**2 * (4.0 / 3.0) * (ur - u / r) ** 2 + (lam / th) * r**2 * div**2
    return heat + visc


def entropy_budget(state, grid, params: PhysParams, variant=ModelVariant.RELAXED, rhs_out: Optional[Rhs] = None, eps_art=None):
    """Itemised discrete entropy balance.

    ``residual = d_entropy - artificial + boundary_flux + dissipation``,
    which vanishes in the continuum limit for constant viscosity factors.
    ``artificial`` is the part of ``d_entropy`` produced by the artificial
    dissipation, if any.
    """
    variant = ModelVariant.parse(variant)
    if variant is ModelVariant.NSF:
        raise ConfigurationError("the entropy identity is stated for the heat-flux variants only")
    params = variant.effective_params(params)
    if rhs_out is None:
        rhs_out = rhs(state, grid, params, variant, eps_art=eps_art)
    grad = entropy_gradient(state, params)
    r2 = grid.nodes**2
    d_entropy = integrate(r2 * np.einsum("ij,ij->j", grad, rhs_out.total), grid)
    artificial = integrate(r2 * np.einsum("ij,ij->j", grad, rhs_out.artificial), grid)
    flux = entropy_flux(state, grid, params)
    boundary = float(flux[-1] - flux[0])
    dissipation = integrate(entropy_dissipation(state, grid, params), grid)
    return {
        "d_entropy": float(d_entropy),
        "artificial": float(artificial),
        "boundary_flux": boundary,
        "dissipation": float(dissipation),
        "residual": float(d_entropy - artificial + boundary + dissipation),
    }


def entropy_flux_residual(state, rhs_out, grid, params, variant=ModelVariant.RELAXED):
    """Scalar residual of the discrete entropy identity (see :func:`entropy_budget`)."""
    return entropy_budget(state, grid, params, variant, rhs_out)["residual"]
