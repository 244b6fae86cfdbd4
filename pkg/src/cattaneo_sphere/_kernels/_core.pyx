# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels; signatures mirror ``_fallback``."""

import numpy as np

cdef int RELAXED = 0
cdef int EULER_CC = 1
cdef int NSF = 2


cdef inline double d1(const double[::1] f, Py_ssize_t i, Py_ssize_t n, double dr) noexcept nogil:
    if i == 0:
        return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dr)
    if i == n:
        return (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) / (2.0 * dr)
    return (f[i + 1] - f[i - 1]) / (2.0 * dr)


cdef inline double d2(const double[::1] f, Py_ssize_t i, Py_ssize_t n, double dr) noexcept nogil:
    if i == 0:
        return (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (dr * dr)
    if i == n:
        return (2.0 * f[n] - 5.0 * f[n - 1] + 4.0 * f[n - 2] - f[n - 3]) / (dr * dr)
    return (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (dr * dr)


cdef inline double d4(const double[::1] f, Py_ssize_t i) noexcept nogil:
    return f[i + 2] - 4.0 * f[i + 1] + 6.0 * f[i] - 4.0 * f[i - 1] + f[i - 2]


def rhs_parts(
    const double[::1] rho, const double[::1] u, const double[::1] theta, const double[::1] q,
    const double[::1] r, double dr,
    const double[::1] tau_n, const double[::1] kap, const double[::1] a, const double[::1] ap,
    const double[::1] Z, const double[::1] nu, const double[::1] nup,
    const double[::1] mu, const double[::1] lam,
    double Cv, double R, int variant, double eps_art, bint mask,
    double[:, ::1] out_ns, double[:, ::1] out_st, double[:, ::1] out_art,
):
    cdef Py_ssize_t n = rho.shape[0] - 1
    cdef Py_ssize_t i, k
    cdef double rr, ur, urr, thr, qr, uor, div, p, shear, heat, e_th, B, src
    cdef double rh_m, rh_p, kh_m, kh_p, lap, r_in, r_out
    with nogil:
        for i in range(n + 1):
            rr = d1(rho, i, n, dr)
            ur = d1(u, i, n, dr)
            thr = d1(theta, i, n, dr)
            urr = d2(u, i, n, dr)
            uor = u[i] / r[i]
            div = ur + 2.0 * uor
            p = R * rho[i] * theta[i]
            shear = ur - uor
            heat = (4.0 / 3.0) * mu[i] * shear * shear + lam[i] * div * div

            out_ns[0, i] = -(rr * u[i] + rho[i] * ur) - 2.0 * rho[i] * uor
            out_ns[1, i] = -u[i] * ur - R * (rr * theta[i] + rho[i] * thr) / rho[i]
            out_st[0, i] = 0.0
            if variant == EULER_CC:
                out_st[1, i] = 0.0
            else:
                out_st[1, i] = (nu[i] * (urr + 2.0 * ur / r[i] - 2.0 * uor / r[i]) + nup[i] * thr * div) / rho[i]

            if variant == NSF:
                out_ns[2, i] = (-rho[i] * u[i] * Cv * thr - p * div + heat) / (rho[i] * Cv)
                out_ns[3, i] = 0.0
                out_st[3, i] = 0.0
                if i == 0:
                    rh_p = 0.5 * (r[0] + r[1])
                    kh_p = 0.5 * (kap[0] + kap[1])
                    r_in = r[0] - 0.5 * dr
                    lap = kh_p * (rh_p * rh_p + r_in * r_in) * (theta[1] - theta[0])
                elif i == n:
                    rh_m = 0.5 * (r[n] + r[n - 1])
                    kh_m = 0.5 * (kap[n] + kap[n - 1])
                    r_out = r[n] + 0.5 * dr
                    lap = -kh_m * (rh_m * rh_m + r_out * r_out) * (theta[n] - theta[n - 1])
                else:
                    rh_p = 0.5 * (r[i] + r[i + 1])
                    rh_m = 0.5 * (r[i] + r[i - 1])
                    kh_p = 0.5 * (kap[i] + kap[i + 1])
                    kh_m = 0.5 * (kap[i] + kap[i - 1])
                    lap = kh_p * rh_p * rh_p * (theta[i + 1] - theta[i]) - kh_m * rh_m * rh_m * (theta[i] - theta[i - 1])
                out_st[2, i] = lap / (r[i] * r[i] * dr * dr * rho[i] * Cv)
            else:
                qr = d1(q, i, n, dr)
                e_th = Cv + ap[i] * q[i] * q[i]
                B = rho[i] * u[i] * e_th - 2.0 * (a[i] / Z[i]) * q[i]
                src = (2.0 / tau_n[i] + 4.0 * rho[i] * uor) * a[i] * q[i] * q[i]
                out_ns[2, i] = (-B * thr - p * div - (qr + 2.0 * q[i] / r[i]) + src + heat) / (rho[i] * e_th)
                out_ns[3, i] = -u[i] * qr - 2.0 * uor * q[i]
                out_st[2, i] = 0.0
                out_st[3, i] = -(q[i] + kap[i] * thr) / (tau_n[i] * rho[i])

            for k in range(4):
                out_art[k, i] = 0.0
            if eps_art > 0.0 and 2 <= i <= n - 2:
                out_art[0, i] = -eps_art * d4(rho, i) / dr
                out_art[1, i] = -eps_art * d4(u, i) / dr
                out_art[2, i] = -eps_art * d4(theta, i) / dr
                out_art[3, i] = -eps_art * d4(q, i) / dr
                for k in range(4):
                    out_ns[k, i] += out_art[k, i]

        if mask:
            for k in range(1, 4, 2):
                out_ns[k, 0] = 0.0
                out_ns[k, n] = 0.0
                out_st[k, 0] = 0.0
                out_st[k, n] = 0.0
                out_art[k, 0] = 0.0
                out_art[k, n] = 0.0


def viscous_bands(
    const double[::1] rho, const double[::1] theta, const double[::1] nu, const double[::1] nup,
    const double[::1] r, double dr, double[::1] lower, double[::1] diag, double[::1] upper,
):
    cdef Py_ssize_t n = rho.shape[0] - 1
    cdef Py_ssize_t i
    cdef double thr, c1, c0, h2 = dr * dr
    with nogil:
        lower[0] = diag[0] = upper[0] = 0.0
        lower[n] = diag[n] = upper[n] = 0.0
        for i in range(1, n):
            thr = (theta[i + 1] - theta[i - 1]) / (2.0 * dr)
            c1 = 2.0 * nu[i] / r[i] + nup[i] * thr
            c0 = -2.0 * nu[i] / (r[i] * r[i]) + 2.0 * nup[i] * thr / r[i]
            lower[i] = (nu[i] / h2 - c1 / (2.0 * dr)) / rho[i]
            diag[i] = (-2.0 * nu[i] / h2 + c0) / rho[i]
            upper[i] = (nu[i] / h2 + c1 / (2.0 * dr)) / rho[i]


def heat_bands(
    const double[::1] rho, const double[::1] kap, const double[::1] r, double dr, double Cv,
    double[::1] lower, double[::1] diag, double[::1] upper,
):
    cdef Py_ssize_t n = rho.shape[0] - 1
    cdef Py_ssize_t i
    cdef double rh, w_m, w_p, scale, r_ghost
    with nogil:
        for i in range(n + 1):
            scale = 1.0 / (r[i] * r[i] * dr * dr * rho[i] * Cv)
            if i == 0:
                rh = 0.5 * (r[0] + r[1])
                r_ghost = r[0] - 0.5 * dr
                lower[0] = 0.0
                upper[0] = 0.5 * (kap[0] + kap[1]) * (rh * rh + r_ghost * r_ghost) * scale
                diag[0] = -upper[0]
            elif i == n:
                rh = 0.5 * (r[n] + r[n - 1])
                r_ghost = r[n] + 0.5 * dr
                upper[n] = 0.0
                lower[n] = 0.5 * (kap[n] + kap[n - 1]) * (rh * rh + r_ghost * r_ghost) * scale
                diag[n] = -lower[n]
            else:
                rh = 0.5 * (r[i] + r[i - 1])
                w_m = 0.5 * (kap[i] + kap[i - 1]) * rh * rh
                rh = 0.5 * (r[i] + r[i + 1])
                w_p = 0.5 * (kap[i] + kap[i + 1]) * rh * rh
                lower[i] = w_m * scale
                upper[i] = w_p * scale
                diag[i] = -(w_m + w_p) * scale


def solve_shifted(
    const double[::1] lower, const double[::1] diag, const double[::1] upper,
    double c, const double[::1] b, double[::1] out,
):
    """Thomas algorithm for ``(I - c L) x = b``."""
    cdef Py_ssize_t n1 = b.shape[0]
    cdef Py_ssize_t i
    cdef double[::1] cp = np.empty(n1)
    cdef double m, bi
    with nogil:
        bi = 1.0 - c * diag[0]
        if bi == 0.0:
            with gil:
                raise ZeroDivisionError("singular tridiagonal system")
        cp[0] = -c * upper[0] / bi
        out[0] = b[0] / bi
        for i in range(1, n1):
            m = (1.0 - c * diag[i]) - (-c * lower[i]) * cp[i - 1]
            if m == 0.0:
                with gil:
                    raise ZeroDivisionError("singular tridiagonal system")
            cp[i] = -c * upper[i] / m
            out[i] = (b[i] - (-c * lower[i]) * out[i - 1]) / m
        for i in range(n1 - 2, -1, -1):
            out[i] -= cp[i] * out[i + 1]
