"""Thermodynamics and coefficient functions of the Cattaneo-Christov gas.

The internal energy carries a heat-flux contribution,

    e = Cv*theta + a(theta)*q**2,   p = R*rho*theta,

with ``Z = tau(theta)/kappa(theta)`` and ``a = Z/theta - Z'/2``.  Temperature
dependence of the relaxation time and the transport coefficients is factored
as ``tau(theta) = tau*g(theta)``, ``mu(theta) = mu*h(theta)``,
``lambda(theta) = lambda*l(theta)``.

All functions accept scalars or numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, DomainError

BAND = (0.75, 1.25)
TAYLOR_C0 = 0.25
TAYLOR_C1 = 1.0


@dataclass(frozen=True)
class CoefficientFunction:
    """A smooth positive function of temperature with analytic derivatives.

    ``value``, ``d1`` and ``d2`` must be vectorised over numpy arrays.  A
    missing derivative raises :class:`ConfigurationError` when it is needed.
    """

    value: Callable
    d1: Optional[Callable] = None
    d2: Optional[Callable] = None
    name: str = "custom"
    constant: Optional[float] = None

    def __call__(self, theta):
        return self.value(theta)

    def first(self, theta):
        if self.d1 is None:
            raise ConfigurationError(f"coefficient {self.name!r} has no first-derivative callback")
        return self.d1(theta)

    def second(self, theta):
        if self.d2 is None:
            raise ConfigurationError(f"coefficient {self.name!r} has no second-derivative callback")
        return self.d2(theta)


def constant(c=1.0):
    """Coefficient identically equal to ``c``."""
    c = float(c)
    return CoefficientFunction(
        value=lambda th: np.full(np.shape(th), c) if np.ndim(th) else c,
        d1=lambda th: np.zeros(np.shape(th)) if np.ndim(th) else 0.0,
        d2=lambda th: np.zeros(np.shape(th)) if np.ndim(th) else 0.0,
        name=f"constant({c:g})",
        constant=c,
    )


def affine(slope=0.0):
    """``1 + slope*(theta - 1)``, normalised to 1 at the reference temperature."""
    slope = float(slope)
    if slope == 0.0:
        return constant(1.0)
    return CoefficientFunction(
        value=lambda th: 1.0 + slope * (np.asarray(th, dtype=float) - 1.0),
        d1=lambda th: np.full(np.shape(th), slope) if np.ndim(th) else slope,
        d2=lambda th: np.zeros(np.shape(th)) if np.ndim(th) else 0.0,
        name=f"affine({slope:g})",
    )


@dataclass(frozen=True)
class PhysParams:
    Cv: float = 1.0
    R: float = 1.0
    tau: float = 0.1
    mu: float = 0.1
    lam: float = 0.1
    g: CoefficientFunction = field(default_factory=constant)
    h: CoefficientFunction = field(default_factory=constant)
    l: CoefficientFunction = field(default_factory=constant)  # noqa: E741
    kappa: CoefficientFunction = field(default_factory=constant)

    def __post_init__(self):
        if not self.Cv > 0 or not self.R > 0:
            raise ConfigurationError("Cv and R must be positive")
        if self.tau < 0 or self.mu < 0 or self.lam < 0:
            raise ConfigurationError("tau, mu and lambda must be non-negative")

    def replace(self, **changes):
        from dataclasses import replace

        return replace(self, **changes)

    @property
    def nu(self):
        """Constant longitudinal viscosity scale 4*mu/3 + lambda."""
        return 4.0 * self.mu / 3.0 + self.lam

    def tau_of(self, theta):
        return self.tau * self.g(theta)

    def mu_of(self, theta):
        return self.mu * self.h(theta)

    def lam_of(self, theta):
        return self.lam * self.l(theta)

    def kappa_of(self, theta):
        return self.kappa(theta)

    @property
    def coefficients_constant(self):
        return all(f.constant is not None for f in (self.g, self.h, self.l, self.kappa))


@dataclass(frozen=True)
class ThermoEval:
    p: float
    e: float
    a: float
    Z: float
    A: float
    e_theta: float


def _positive(name, x):
    arr = np.asarray(x, dtype=float)
    if not np.all(arr > 0):
        raise DomainError(f"{name} must be positive")
    return x


def pressure(rho, theta, params: PhysParams):
    _positive("rho", rho)
    _positive("theta", theta)
    return params.R * np.asarray(rho, dtype=float) * theta if np.ndim(rho) else params.R * rho * theta


def z_derivatives(theta, params: PhysParams, order=2):
    """Return ``(Z, Z', Z'')`` (truncated to ``order``) for ``Z = tau g / kappa``."""
    theta = np.asarray(theta, dtype=float)
    tau = params.tau
    g, k = params.g(theta), params.kappa(theta)
    Z = tau * g / k
    if order == 0:
        return (Z,)
    g1, k1 = params.g.first(theta), params.kappa.first(theta)
    w1 = (g1 * k - g * k1) / k**2
    Z1 = tau * w1
    if order == 1:
        return Z, Z1
    g2, k2 = params.g.second(theta), params.kappa.second(theta)
    Z2 = tau * ((g2 * k - g * k2) / k**2 - 2.0 * k1 * w1 / k)
    return Z, Z1, Z2


def coeff_Z(theta, params: PhysParams):
    _positive("theta", theta)
    return z_derivatives(theta, params, order=0)[0]


def coeff_a(theta, params: PhysParams):
    _positive("theta", theta)
    Z, Z1 = z_derivatives(theta, params, order=1)
    return Z / theta - 0.5 * Z1


def coeff_a_prime(theta, params: PhysParams):
    """d a / d theta; needs second derivatives of g and kappa."""
    _positive("theta", theta)
    Z, Z1, Z2 = z_derivatives(theta, params, order=2)
    return Z1 / theta - Z / theta**2 - 0.5 * Z2


def coeff_A(theta, params: PhysParams):
    """``A = a/theta - Z/(2 theta^2)``, which equals ``-(Z/(2 theta))'``."""
    _positive("theta", theta)
    Z, Z1 = z_derivatives(theta, params, order=1)
    a = Z / theta - 0.5 * Z1
    return a / theta - Z / (2.0 * theta**2)


def coeff_A_prime(theta, params: PhysParams):
    _positive("theta", theta)
    Z, Z1, Z2 = z_derivatives(theta, params, order=2)
    # A = Z/(2 th^2) - Z'/(2 th)
    return Z1 / (2 * theta**2) - Z / theta**3 - Z2 / (2 * theta) + Z1 / (2 * theta**2)


def internal_energy(theta, q, params: PhysParams):
    _positive("theta", theta)
    return params.Cv * np.asarray(theta, dtype=float) + coeff_a(theta, params) * np.asarray(q, dtype=float) ** 2


def e_theta(theta, q, params: PhysParams):
    """de/dtheta at fixed heat flux: ``Cv + a'(theta) q^2``."""
    return params.Cv + coeff_a_prime(theta, params) * np.asarray(q, dtype=float) ** 2


def energy_second_derivatives(theta, q, params: PhysParams, h=1e-5):
    """Second derivatives of ``e`` used by the a priori bounds.

    ``e_theta_theta = a''(theta) q^2`` is taken by a centred difference of the
    analytic ``a'``; the mixed ones are analytic.
    """
    q = np.asarray(q, dtype=float)
    a1 = coeff_a_prime(theta, params)
    a2 = (coeff_a_prime(np.asarray(theta) + h, params) - coeff_a_prime(np.asarray(theta) - h, params)) / (2 * h)
    return {
        "e_theta_theta": a2 * q**2,
        "e_theta_q": 2.0 * a1 * q,
        "e_theta_q_q": 2.0 * a1 * np.ones_like(q),
    }


def thermo_eval(rho, theta, q, params: PhysParams) -> ThermoEval:
    Z, Z1 = z_derivatives(theta, params, order=1)
    _positive("theta", theta)
    a = Z / theta - 0.5 * Z1
    return ThermoEval(
        p=pressure(rho, theta, params),
        e=params.Cv * theta + a * q**2,
        a=a,
        Z=Z,
        A=a / theta - Z / (2 * theta**2),
        e_theta=e_theta(theta, q, params),
    )


def thermodynamic_relation(rho, theta, q, params: PhysParams):
    """Both sides of ``rho^2 e_rho = p - theta p_theta``.

    ``e`` does not depend on ``rho`` and ``p`` is linear in ``theta``, so both
    sides vanish; they are evaluated the long way to expose the degeneracy.
    """
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    e_rho = np.zeros_like(rho * theta * q)
    lhs = rho**2 * e_rho
    p = params.R * rho * theta
    p_theta = params.R * rho
    rhs = p - theta * p_theta
    return lhs, rhs


def gap_condition(theta, params: PhysParams):
    """Coercivity margin ``a + (Z/(2 theta))' - tau/4``; positive is good."""
    if params.tau == 0:
        return np.zeros_like(np.asarray(theta, dtype=float)) if np.ndim(theta) else 0.0
    _positive("theta", theta)
    Z, Z1 = z_derivatives(theta, params, order=1)
    a = Z / theta - 0.5 * Z1
    dZ_over_2theta = Z1 / (2 * theta) - Z / (2 * theta**2)
    return a + dZ_over_2theta - params.tau / 4.0


def relative_entropy_density(rho, theta, u, q, params: PhysParams):
    """Relative entropy w.r.t. the rest state (1, 0, 1, 0), without the r^2 weight."""
    _positive("rho", rho)
    _positive("theta", theta)
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    u = np.asarray(u, dtype=float)
    q = np.asarray(q, dtype=float)
    # written in terms of the deviations to avoid cancellation near the rest state
    dth, drho = theta - 1.0, rho - 1.0
    out = params.Cv * rho * (dth - np.log1p(dth)) + params.R * (rho * np.log1p(drho) - drho) + 0.5 * rho * u**2
    if params.tau > 0:
        out = out + rho * (coeff_a(theta, params) - coeff_A(theta, params)) * q**2
    return out


def taylor_bounds_check(x):
    """Check both quadratic Taylor envelopes at ``x`` in the admissible band.

    Returns ``(lower_ok, upper_ok)`` for
    ``C0 (x-1)^2 <= f(x) <= C1 (x-1)^2`` with ``f`` running over
    ``x ln x - x + 1`` and ``x - ln x - 1``.
    """
    x = float(x)
    if not BAND[0] <= x <= BAND[1]:
        raise DomainError(f"x={x} outside the admissible band {BAND}")
    sq = (x - 1.0) ** 2
    f1 = x * np.log(x) - x + 1.0
    f2 = x - np.log(x) - 1.0
    lower = TAYLOR_C0 * sq <= f1 and TAYLOR_C0 * sq <= f2
    upper = f1 <= TAYLOR_C1 * sq and f2 <= TAYLOR_C1 * sq
    return bool(lower), bool(upper)
