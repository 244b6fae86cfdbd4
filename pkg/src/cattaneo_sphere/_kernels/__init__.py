"""Kernel backend selection.

The compiled core is used when it was built and ``CATTANEO_PURE_PYTHON`` is
not set to a true value; otherwise the numpy/scipy fallback is used.  Both
expose ``rhs_parts``, ``viscous_bands``, ``heat_bands`` and
``solve_shifted`` with identical signatures.
"""

import os

from . import _fallback

RELAXED, EULER_CC, NSF = _fallback.RELAXED, _fallback.EULER_CC, _fallback.NSF

try:
    from . import _core as compiled
except ImportError:  # extension not built
    compiled = None


def _want_pure():
    return os.environ.get("CATTANEO_PURE_PYTHON", "").strip().lower() in ("1", "true", "yes", "on")


backend = _fallback if (compiled is None or _want_pure()) else compiled
BACKEND_NAME = "fallback" if backend is _fallback else "compiled"

rhs_parts = backend.rhs_parts
viscous_bands = backend.viscous_bands
heat_bands = backend.heat_bands
solve_shifted = backend.solve_shifted

__all__ = [
    "BACKEND_NAME",
    "compiled",
    "rhs_parts",
    "viscous_bands",
    "heat_bands",
    "solve_shifted",
    "RELAXED",
    "EULER_CC",
    "NSF",
]
