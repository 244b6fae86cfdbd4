"""Pure numpy/scipy implementation of the hot kernels.

Every function writes into caller-supplied output arrays so the compiled
core can be swapped in without changing call sites.
"""

import numpy as np
from scipy.linalg import solve_banded

RELAXED, EULER_CC, NSF = 0, 1, 2


def _d1(f, dr, out):
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * dr)
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dr)
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * dr)
    return out


def rhs_parts(
    rho, u, theta, q, r, dr,
    tau_n, kap, a, ap, Z, nu, nup, mu, lam,
    Cv, R, variant, eps_art, mask,
    out_ns, out_st, out_art,
):
    """Fill the nonstiff, stiff and artificial-dissipation tendencies.

    Output arrays have shape ``(4, n+1)`` in field order rho, u, theta, q.
    The artificial part is already included in ``out_ns``.
    """
    n1 = rho.size
    rr = np.empty(n1)
    ur = np.empty(n1)
    thr = np.empty(n1)
    qr = np.empty(n1)
    _d1(rho, dr, rr)
    _d1(u, dr, ur)
    _d1(theta, dr, thr)
    _d1(q, dr, qr)
    urr = np.empty(n1)
    urr[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (dr * dr)
    urr[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / (dr * dr)
    urr[-1] = (2.0 * u[-1] - 5.0 * u[-2] + 4.0 * u[-3] - u[-4]) / (dr * dr)

    uor = u / r
    div = ur + 2.0 * uor
    p = R * rho * theta
    shear = ur - uor
    heat = (4.0 / 3.0) * mu * shear * shear + lam * div * div

    out_ns[0] = -(rr * u + rho * ur) - 2.0 * rho * uor
    out_ns[1] = -u * ur - R * (rr * theta + rho * thr) / rho
    out_st[0] = 0.0
    if variant == EULER_CC:
        out_st[1] = 0.0
    else:
        out_st[1] = (nu * (urr + 2.0 * ur / r - 2.0 * uor / r) + nup * thr * div) / rho

    if variant == NSF:
        out_ns[2] = (-rho * u * Cv * thr - p * div + heat) / (rho * Cv)
        out_ns[3] = 0.0
        out_st[3] = 0.0
        rh = 0.5 * (r[1:] + r[:-1])
        kh = 0.5 * (kap[1:] + kap[:-1])
        flux = kh * rh * rh * (theta[1:] - theta[:-1])
        lap = np.empty(n1)
        lap[1:-1] = flux[1:] - flux[:-1]
        r_in = r[0] - 0.5 * dr
        r_out = r[-1] + 0.5 * dr
        lap[0] = kh[0] * (rh[0] ** 2 + r_in**2) * (theta[1] - theta[0])
        lap[-1] = -kh[-1] * (rh[-1] ** 2 + r_out**2) * (theta[-1] - theta[-2])
        out_st[2] = lap / (r * r * dr * dr * rho * Cv)
    else:
        e_th = Cv + ap * q * q
        B = rho * u * e_th - 2.0 * (a / Z) * q
        src = (2.0 / tau_n + 4.0 * rho * uor) * a * q * q
        out_ns[2] = (-B * thr - p * div - (qr + 2.0 * q / r) + src + heat) / (rho * e_th)
        out_ns[3] = -u * qr - 2.0 * uor * q
        out_st[2] = 0.0
        out_st[3] = -(q + kap * thr) / (tau_n * rho)

    out_art[:] = 0.0
    if eps_art > 0.0 and n1 >= 5:
        for k, f in enumerate((rho, u, theta, q)):
            out_art[k, 2:-2] = -eps_art * (f[4:] - 4.0 * f[3:-1] + 6.0 * f[2:-2] - 4.0 * f[1:-3] + f[:-4]) / dr
        out_ns += out_art

    if mask:
        for k in (1, 3):
            out_ns[k, 0] = out_ns[k, -1] = 0.0
            out_st[k, 0] = out_st[k, -1] = 0.0
            out_art[k, 0] = out_art[k, -1] = 0.0


def viscous_bands(rho, theta, nu, nup, r, dr, lower, diag, upper):
    """Tridiagonal rows of the viscous velocity operator (interior rows only).

    ``lower[i]`` multiplies ``u[i-1]`` and ``upper[i]`` multiplies ``u[i+1]``.
    Wall rows are zero.
    """
    thr = np.empty(rho.size)
    _d1(theta, dr, thr)
    c1 = 2.0 * nu / r + nup * thr
    c0 = -2.0 * nu / (r * r) + 2.0 * nup * thr / r
    h2 = dr * dr
    lower[:] = (nu / h2 - c1 / (2.0 * dr)) / rho
    diag[:] = (-2.0 * nu / h2 + c0) / rho
    upper[:] = (nu / h2 + c1 / (2.0 * dr)) / rho
    for b in (lower, diag, upper):
        b[0] = b[-1] = 0.0


def heat_bands(rho, kap, r, dr, Cv, lower, diag, upper):
    """Tridiagonal rows of the conservative radial heat operator.

    Wall rows use a mirrored ghost node, i.e. zero wall gradient.
    """
    rh = 0.5 * (r[1:] + r[:-1])
    kh = 0.5 * (kap[1:] + kap[:-1])
    w = kh * rh * rh
    scale = 1.0 / (r * r * dr * dr * rho * Cv)
    lower[0] = upper[-1] = 0.0
    lower[1:] = w * scale[1:]
    upper[:-1] = w * scale[:-1]
    diag[1:-1] = -(w[1:] + w[:-1]) * scale[1:-1]
    r_in = r[0] - 0.5 * dr
    r_out = r[-1] + 0.5 * dr
    upper[0] = kh[0] * (rh[0] ** 2 + r_in**2) * scale[0]
    diag[0] = -upper[0]
    lower[-1] = kh[-1] * (rh[-1] ** 2 + r_out**2) * scale[-1]
    diag[-1] = -lower[-1]


def solve_shifted(lower, diag, upper, c, b, out):
    """Solve ``(I - c L) x = b`` for tridiagonal ``L`` and write ``x`` to ``out``."""
    n1 = b.size
    ab = np.empty((3, n1))
    ab[0, 0] = 0.0
    ab[0, 1:] = -c * upper[:-1]
    ab[1] = 1.0 - c * diag
    ab[2, :-1] = -c * lower[1:]
    ab[2, -1] = 0.0
    out[:] = solve_banded((1, 1), ab, b, check_finite=False)
