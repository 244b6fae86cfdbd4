"""Closed-form manufactured fields for verification runs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TrigFamily:
    """Smooth trigonometric fields on ``[r_min, r_max]``.

    With ``x = (r - r_min)/L``::

        rho   = 1 + alpha cos(pi x) (1 + t)
        u     = alpha sin(pi x) (1 - t)
        theta = 1 + alpha cos(pi x) exp(-t)
        q     = alpha sin(2 pi x) exp(-t)

    Velocity and heat flux vanish at both walls for all times.
    """

    r_min: float = 1.0
    r_max: float = 2.0
    alpha: float = 0.05

    def evaluate(self, r, t):
        """Values and the analytic derivatives needed by the operator."""
        L = self.r_max - self.r_min
        k = np.pi / L
        x = (np.atleast_1d(np.asarray(r, dtype=float)) - self.r_min) / L
        al = self.alpha
        c, s = np.cos(np.pi * x), np.sin(np.pi * x)
        c2, s2 = np.cos(2 * np.pi * x), np.sin(2 * np.pi * x)
        e = np.exp(-t)
        # exact zeros at the walls instead of sin(pi) roundoff
        s[np.isclose(x, 0.0) | np.isclose(x, 1.0)] = 0.0
        s2[np.isclose(x, 0.0) | np.isclose(x, 1.0)] = 0.0
        return {
            "rho": 1 + al * c * (1 + t),
            "rho_r": -al * k * s * (1 + t),
            "rho_t": al * c,
            "u": al * s * (1 - t),
            "u_r": al * k * c * (1 - t),
            "u_rr": -al * k * k * s * (1 - t),
            "u_t": -al * s,
            "theta": 1 + al * c * e,
            "theta_r": -al * k * s * e,
            "theta_rr": -al * k * k * c * e,
            "theta_t": -al * c * e,
            "q": al * s2 * e,
            "q_r": 2 * al * k * c2 * e,
            "q_t": -al * s2 * e,
        }


FAMILIES = {"trig": TrigFamily}


def get_family(name, r_min=1.0, r_max=2.0, **kw):
    try:
        cls = FAMILIES[name]
    except KeyError:
        raise KeyError(f"unknown manufactured family {name!r}; known: {sorted(FAMILIES)}") from None
    return cls(r_min=r_min, r_max=r_max, **kw)
