"""Admissibility of the wall condition ``q = 0`` for the (theta, q) subsystem.

Written as ``A0 U_t + A1 U_r = F`` with ``U = (theta, q)``, the linearised
temperature/heat-flux pair is symmetric hyperbolic.  The wall is
non-characteristic when ``A1`` is invertible there, and ``q = 0`` is a
maximally nonnegative condition when the boundary form ``nu * A1`` is
nonnegative on its kernel and indefinite on anything larger.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constitutive import PhysParams, coeff_a, coeff_Z, e_theta
from .errors import ConfigurationError, MatrixError

KERNEL_VECTOR = np.array([1.0, 0.0])
WITNESS_VECTOR = np.array([1.0, 1.0])


@dataclass(frozen=True)
class BoundaryMatrices:
    A0: np.ndarray
    A1: np.ndarray
    nu: int

    def __post_init__(self):
        if self.nu not in (-1, 1):
            raise ValueError("outward normal sign must be -1 or +1")


def assemble_boundary_matrices(rho, u, theta, q, params: PhysParams, nu=-1) -> BoundaryMatrices:
    """Coefficient matrices at one node; ``nu`` is the outward normal sign."""
    if params.tau <= 0:
        raise ConfigurationError("boundary matrices need tau > 0")
    tau_n = params.tau * params.g(theta)
    kap = params.kappa(theta)
    e_th = e_theta(theta, q, params)
    a = coeff_a(theta, params)
    Z = coeff_Z(theta, params)
    A0 = np.array([[rho * e_th, 0.0], [0.0, tau_n * rho / kap]], dtype=float)
    A1 = np.array([[rho * u * e_th - 2.0 * a * q / Z, 1.0], [1.0, tau_n * rho * u / kap]], dtype=float)
    return BoundaryMatrices(A0, A1, int(nu))


def noncharacteristic_check(m: BoundaryMatrices, tol=1e-12):
    """Return ``(ok, det((A0)^-1 A1))``."""
    det0 = np.linalg.det(m.A0)
    if abs(det0) < 1e-300 or not np.isfinite(det0):
        raise MatrixError("A0 is singular")
    # 2x2 determinant identity avoids forming the inverse
    a1 = m.A1
    det = (a1[0, 0] * a1[1, 1] - a1[0, 1] * a1[1, 0]) / (m.A0[0, 0] * m.A0[1, 1] - m.A0[0, 1] * m.A0[1, 0])
    return bool(abs(det) > tol), float(det)


def maximal_nonnegativity_check(m: BoundaryMatrices):
    """Boundary-form values on the kernel of ``q = 0`` and on a witness outside it.

    Returns ``(on_kernel, witness_outside, maximal)``.  ``maximal`` is True
    when the form is nonnegative on the kernel and the full matrix
    ``nu * A1`` is indefinite, so no larger subspace is admissible.
    """
    form = m.nu * m.A1
    on_kernel = float(KERNEL_VECTOR @ form @ KERNEL_VECTOR)
    witness = float(WITNESS_VECTOR @ form @ WITNESS_VECTOR)
    lam_min = float(np.linalg.eigvalsh(0.5 * (form + form.T))[0])
    return on_kernel, witness, bool(on_kernel >= 0.0 and lam_min < 0.0)


def wall_report(state, params: PhysParams):
    """Both checks at both walls of a state (inner normal -1, outer +1)."""
    out = {}
    for label, idx, nu in (("inner", 0, -1), ("outer", -1, 1)):
        m = assemble_boundary_matrices(state.rho[idx], state.u[idx], state.theta[idx], state.q[idx], params, nu)
        ok, det = noncharacteristic_check(m)
        on_kernel, witness, maximal = maximal_nonnegativity_check(m)
        out[label] = {
            "A0": m.A0.tolist(),
            "A1": m.A1.tolist(),
            "nu": nu,
            "noncharacteristic": ok,
            "det": det,
            "on_kernel": on_kernel,
            "witness": witness,
            "maximal": maximal,
        }
    return out
