import numpy as np
import pytest

from cattaneo_sphere import _kernels
from cattaneo_sphere._kernels import _fallback

compiled = _kernels.compiled
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled core not built")

N1 = 65
def inputs(seed=7):
    rng = np.random.default_rng(seed)
    x = np.linspace(0.0, 1.0, N1)

    def smooth(base, amp):
        return base + amp * (np.sin(3 * x) + 3e-3 * rng.standard_normal(N1))

    r = np.linspace(1.0, 2.0, N1)
    fields = [smooth(1.0, 0.05), smooth(0.0, 0.02), smooth(1.0, 0.03), smooth(0.0, 0.01)]
    coeffs = {k: smooth(1.0, 0.1) for k in ("tau_n", "kap", "a", "Z", "nu", "mu", "lam")}
    coeffs["ap"] = smooth(0.0, 0.1)
    coeffs["nup"] = smooth(0.0, 0.1)
    return r, fields, coeffs


def call_rhs(mod, variant, eps_art, mask):
    r, (rho, u, th, q), c = inputs()
    outs = [np.zeros((4, N1)) for _ in range(3)]
    mod.rhs_parts(rho, u, th, q, r, r[1] - r[0], c["tau_n"], c["kap"], c["a"], c["ap"], c["Z"],
                  c["nu"], c["nup"], c["mu"], c["lam"], 1.0, 1.0, variant, eps_art, mask, *outs)
    return outs


@needs_compiled
@pytest.mark.parametrize("variant", [_fallback.RELAXED, _fallback.EULER_CC, _fallback.NSF])
@pytest.mark.parametrize("eps_art, mask", [(0.0, True), (0.5, True), (0.5, False)])
def test_rhs_backends_agree(variant, eps_art, mask):
    a = call_rhs(_fallback, variant, eps_art, mask)
    b = call_rhs(compiled, variant, eps_art, mask)
    for x, y in zip(a, b):
        scale = max(1.0, np.max(np.abs(x)))
        np.testing.assert_allclose(x, y, rtol=0, atol=1e-12 * scale)


@needs_compiled
def test_band_builders_agree():
    r, (rho, _, th, _), c = inputs()
    dr = r[1] - r[0]
    for name, args in (("viscous_bands", (rho, th, c["nu"], c["nup"], r, dr)), ("heat_bands", (rho, c["kap"], r, dr, 1.0))):
        got = []
        for mod in (_fallback, compiled):
            bands = [np.zeros(N1) for _ in range(3)]
            getattr(mod, name)(*args, *bands)
            got.append(bands)
        for x, y in zip(*got):
            np.testing.assert_allclose(x, y, rtol=1e-13, atol=1e-9)


@needs_compiled
@pytest.mark.parametrize("c", [1e-4, 1e-2, 1.0])
def test_shifted_solves_agree(c):
    r, (rho, _, _, _), co = inputs()
    lo, di, up = (np.zeros(N1) for _ in range(3))
    _fallback.heat_bands(rho, co["kap"], r, r[1] - r[0], 1.0, lo, di, up)
    b = np.sin(np.linspace(0, 3, N1))
    x1, x2 = np.empty(N1), np.empty(N1)
    _fallback.solve_shifted(lo, di, up, c, b, x1)
    compiled.solve_shifted(lo, di, up, c, b, x2)
    np.testing.assert_allclose(x1, x2, rtol=1e-10, atol=1e-12)
    resid = x1 - c * (di * x1 + np.r_[0.0, lo[1:] * x1[:-1]] + np.r_[up[:-1] * x1[1:], 0.0]) - b
    assert np.max(np.abs(resid)) < 1e-10 * max(1.0, np.max(np.abs(x1)))


def test_backend_name_reports_selection():
    from cattaneo_sphere import BACKEND_NAME

    expected = "compiled" if _kernels.backend is compiled else "fallback"
    assert BACKEND_NAME == expected


def test_fallback_selected_by_environment():
    import os
    import subprocess
    import sys

    env = dict(os.environ, CATTANEO_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import cattaneo_sphere as c; print(c.BACKEND_NAME)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "fallback"
