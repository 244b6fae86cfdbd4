import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from cattaneo_sphere import ModelVariant, PhysParams, RadialGrid, RadialState, affine, perturbation_data, rhs
from cattaneo_sphere.constitutive import coeff_a, coeff_a_prime, coeff_Z
from cattaneo_sphere.dynamics import (
    continuum_rhs,
    entropy_budget,
    entropy_dissipation,
    entropy_flux_residual,
    mms_residual,
    node_coefficients,
    rhs_time_derivatives,
)
from cattaneo_sphere.errors import ConfigurationError, StateError
from cattaneo_sphere.grid import d2dr2, ddr, weighted_L2

from conftest import observed_orders

VARIANT_PARAMS = {
    "RELAXED": PhysParams(),
    "EULER_CC": PhysParams(mu=0.0, lam=0.0),
    "NSF": PhysParams(tau=0.0),
}


@pytest.mark.parametrize("variant", list(VARIANT_PARAMS))
def test_equilibrium_is_steady(variant, grid64):
    out = rhs(RadialState.equilibrium(grid64), grid64, VARIANT_PARAMS[variant], variant)
    assert np.max(np.abs(out.total)) < 1e-13
    assert np.max(np.abs(out.nonstiff + out.stiff - out.total)) < 1e-13


def reference_rhs(s, g, p):
    """Direct transcription of the relaxed operator with the grid derivatives."""
    r = g.nodes
    rho, u, th, q = s.rho, s.u, s.theta, s.q
    rr, ur, thr, qr, urr = ddr(rho, g), ddr(u, g), ddr(th, g), ddr(q, g), d2dr2(u, g)
    div = ur + 2 * u / r
    tau_n = p.tau * p.g(th)
    kap = p.kappa(th)
    a, Z = coeff_a(th, p), coeff_Z(th, p)
    e_th = p.Cv + coeff_a_prime(th, p) * q**2
    mu, lam = p.mu * p.h(th), p.lam * p.l(th)
    nu, nup = 4 * mu / 3 + lam, 4 * p.mu * p.h.first(th) / 3 + p.lam * p.l.first(th)
    B = rho * u * e_th - 2 * a * q / Z
    heat = (4 / 3) * mu * (ur - u / r) ** 2 + lam * div**2
    out = np.empty((4, g.size))
    out[0] = -(rr * u + rho * ur) - 2 * rho * u / r
    out[1] = -u * ur - p.R * (rr * th + rho * thr) / rho + (nu * (urr + 2 * ur / r - 2 * u / r**2) + nup * thr * div) / rho
    out[2] = (-B * thr - p.R * rho * th * div - (qr + 2 * q / r) + (2 / tau_n + 4 * rho * u / r) * a * q**2 + heat) / (rho * e_th)
    out[3] = -u * qr - 2 * u * q / r - (q + kap * thr) / (tau_n * rho)
    out[[1, 3], 0] = out[[1, 3], -1] = 0.0
    return out


def random_state(g, seed, amp=0.05):
    rng = np.random.default_rng(seed)
    x = g.x
    modes = [np.sin((k + 1) * np.pi * x) for k in range(3)]
    f = [1 + amp * sum(rng.uniform(-1, 1) * m for m in modes) for _ in range(2)]
    u = amp * sum(rng.uniform(-1, 1) * m for m in modes)
    q = amp * sum(rng.uniform(-1, 1) * m for m in modes)
    u[[0, -1]] = q[[0, -1]] = 0.0
    return RadialState(f[0], u, f[1], q)


@pytest.mark.parametrize("seed", range(5))
def test_split_matches_direct_transcription(seed, variable_params):
    g = RadialGrid(1.0, 2.0, 48)
    s = random_state(g, seed)
    out = rhs(s, g, variable_params, "RELAXED")
    ref = reference_rhs(s, g, variable_params)
    assert np.max(np.abs(out.nonstiff + out.stiff - ref)) < 1e-12
    assert np.max(np.abs(out.total - (out.stiff + out.nonstiff))) < 1e-14


def test_stiff_part_holds_viscosity_and_relaxation(params):
    g = RadialGrid(1.0, 2.0, 48)
    s = random_state(g, 3)
    out = rhs(s, g, params, "RELAXED")
    assert np.all(out.stiff[0] == 0) and np.all(out.stiff[2] == 0)
    expected = -(s.q + params.kappa(s.theta) * ddr(s.theta, g)) / (params.tau * s.rho)
    np.testing.assert_allclose(out.stiff[3, 1:-1], expected[1:-1], rtol=1e-13, atol=1e-15)


def test_pure_relaxation_row(grid64, params):
    q = 0.01 * np.sin(np.pi * grid64.x)
    q[[0, -1]] = 0.0
    s = RadialState.equilibrium(grid64).replace(q=q)
    out = rhs(s, grid64, params, "RELAXED")
    np.testing.assert_array_equal(out.dq, -q / params.tau)


def test_nsf_temperature_is_radial_laplacian():
    p = PhysParams(tau=0.0)
    errs, ns = [], [64, 128, 256]
    for n in ns:
        g = RadialGrid(1.0, 2.0, n)
        r, x = g.nodes, g.x
        prof = np.cos(np.pi * x)  # zero slope at both walls
        s = RadialState(np.ones(g.size), np.zeros(g.size), 1 + 0.01 * prof, np.zeros(g.size))
        k = np.pi
        lap = -k**2 * np.cos(k * x) - (2 / r) * k * np.sin(k * x)
        errs.append(np.max(np.abs(rhs(s, g, p, "NSF").dtheta - 0.01 * lap / p.Cv)))
    assert min(observed_orders(errs, ns)) >= 1.9


def test_velocity_from_rest_is_pressure_driven(params):
    g = RadialGrid(1.0, 2.0, 64)
    s = perturbation_data(g, 0.02, 1, params).replace(u=np.zeros(g.size))
    expected = -params.R * (ddr(s.rho, g) * s.theta + s.rho * ddr(s.theta, g)) / s.rho
    np.testing.assert_allclose(rhs(s, g, params, "RELAXED").du[1:-1], expected[1:-1], rtol=1e-12, atol=1e-15)


def test_variant_rules(params):
    assert ModelVariant.NSF.effective_params(params).tau == 0.0
    e = ModelVariant.EULER_CC.effective_params(params)
    assert e.mu == 0 and e.lam == 0
    with pytest.raises(ConfigurationError):
        ModelVariant.RELAXED.effective_params(params.replace(tau=0.0))
    with pytest.raises(ConfigurationError):
        ModelVariant.EULER_CC.effective_params(params.replace(tau=0.0))
    with pytest.raises(ConfigurationError):
        ModelVariant.parse("FOO")
    assert ModelVariant.parse("euler_cc") is ModelVariant.EULER_CC


def test_positivity_loss_raises(grid64, params):
    rho = np.ones(grid64.size)
    rho[7] = -0.1
    with pytest.raises(StateError) as info:
        rhs(RadialState.equilibrium(grid64).replace(rho=rho), grid64, params, "RELAXED")
    assert info.value.nodes[0][:2] == (7, "rho")


@given(a=st.floats(min_value=-1, max_value=1), b=st.floats(min_value=-1, max_value=1))
def test_viscous_dissipation_form_nonnegative(a, b):
    form = 2 * a**2 + 4 * b**2 - (2 / 3) * (a + 2 * b) ** 2
    assert form >= -1e-15
    assert form == pytest.approx((4 / 3) * (a - b) ** 2, abs=1e-14)


def test_viscous_dissipation_sweep_and_pointwise(params):
    a, b = np.meshgrid(np.linspace(-1, 1, 201), np.linspace(-1, 1, 201))
    assert np.all(2 * a**2 + 4 * b**2 - (2 / 3) * (a + 2 * b) ** 2 >= -1e-14)
    g = RadialGrid(1.0, 2.0, 64)
    for seed in range(3):
        s = random_state(g, seed)
        assert np.all(entropy_dissipation(s.replace(q=np.zeros(g.size)), g, params) >= 0)


# ---------------------------------------------------------------------------
# symbolic operator and entropy identity

R_, T_ = sp.symbols("r t", positive=True)


def symbolic_system(c_g=0.3, c_k=0.5, tau=0.1, mu=0.1, lam=0.05, Cv=1.3, R=0.7, variant="RELAXED"):
    r = R_
    x = r - 1
    rho = 1 + sp.Rational(1, 20) * sp.cos(sp.pi * x)
    u = sp.Rational(1, 25) * sp.sin(sp.pi * x) * (1 + x)
    th = 1 + sp.Rational(1, 30) * sp.cos(2 * sp.pi * x) + sp.Rational(1, 50) * x
    q = sp.Rational(1, 40) * sp.sin(2 * sp.pi * x)
    th_s = sp.Symbol("th", positive=True)
    g = 1 + c_g * (th_s - 1)
    kap = 1 + c_k * (th_s - 1)
    Z = tau * g / kap
    a = Z / th_s - sp.diff(Z, th_s) / 2
    A = a / th_s - Z / (2 * th_s**2)
    ap = sp.diff(a, th_s)
    sub = lambda e: e.subs(th_s, th)  # noqa: E731
    D = lambda f: sp.diff(f, r)  # noqa: E731
    div = D(u) + 2 * u / r
    p = R * rho * th
    visc = mu * (2 * D(u) ** 2 + 4 * u**2 / r**2 - sp.Rational(2, 3) * div**2) + lam * div**2
    if variant == "EULER_CC":
        mu = lam = 0
        visc = 0
    out = {"rho": -D(rho * u) - 2 * rho * u / r}
    out["u"] = (-rho * u * D(u) - D(p) + D((sp.Rational(4, 3) * mu + lam) * div)) / rho
    if variant == "NSF":
        kk = sub(kap)
        out["theta"] = (-rho * u * Cv * D(th) - p * div + visc + D(r**2 * kk * D(th)) / r**2) / (rho * Cv)
        out["q"] = sp.Integer(0)
    else:
        e_th = Cv + sub(ap) * q**2
        B = rho * u * e_th - 2 * sub(a / Z) * q
        src = (2 / sub(tau * g) + 4 * rho * u / r) * sub(a) * q**2
        out["theta"] = (-B * D(th) - p * div - (D(q) + 2 * q / r) + src + visc) / (rho * e_th)
        out["q"] = (-sub(tau * g) * rho * (u * D(q) + 2 * u * q / r) - q - sub(kap) * D(th)) / (sub(tau * g) * rho)
    fields = {"rho": rho, "u": u, "theta": th, "q": q}
    pieces = dict(a=sub(a), A=sub(A), dgap=sub(sp.diff(a - A, th_s)), kap=sub(kap), tau_n=sub(tau * g), mu=mu, lam=lam, Cv=Cv, R=R)
    return fields, out, pieces


def _params(c_g=0.3, c_k=0.5, tau=0.1, mu=0.1, lam=0.05, Cv=1.3, R=0.7):
    return PhysParams(Cv=Cv, R=R, tau=tau, mu=mu, lam=lam, g=affine(c_g), kappa=affine(c_k))


@pytest.mark.parametrize("variant", ["RELAXED", "EULER_CC", "NSF"])
def test_continuum_rhs_matches_symbolic_system(variant):
    fields, out, _ = symbolic_system(variant=variant, tau=0.0 if variant == "NSF" else 0.1)
    kw = dict(tau=0.0) if variant == "NSF" else {}
    if variant == "EULER_CC":
        kw = dict(mu=0.0, lam=0.0)
    p = _params(**kw)
    rr = np.linspace(1.05, 1.95, 7)
    f = {}
    for k, e in fields.items():
        f[k] = sp.lambdify(R_, e)(rr) * np.ones_like(rr)
        f[k + "_r"] = sp.lambdify(R_, sp.diff(e, R_))(rr) * np.ones_like(rr)
        f[k + "_rr"] = sp.lambdify(R_, sp.diff(e, R_, 2))(rr) * np.ones_like(rr)
    got = continuum_rhs(f, rr, p, variant)
    for i, k in enumerate(("rho", "u", "theta", "q")):
        want = sp.lambdify(R_, out[k])(rr) * np.ones_like(rr)
        np.testing.assert_allclose(got[i], want, rtol=1e-11, atol=1e-13)


def test_entropy_identity_holds_symbolically():
    fields, out, pc = symbolic_system(c_g=0.3, c_k=0.5, mu=0.1, lam=0.05)
    rho, u, th, q = (fields[k] for k in ("rho", "u", "theta", "q"))
    r = R_
    Cv, R = pc["Cv"], pc["R"]
    gap = pc["a"] - pc["A"]
    eta = rho * Cv * (th - sp.log(th) - 1) + R * (rho * sp.log(rho) - rho + 1) + rho * gap * q**2 + rho * u**2 / 2
    # chain rule: d/dt eta along the system
    grad = [
        Cv * (th - sp.log(th) - 1) + R * sp.log(rho) + gap * q**2 + u**2 / 2,
        rho * u,
        rho * Cv * (1 - 1 / th) + rho * pc["dgap"] * q**2,
        2 * rho * gap * q,
    ]
    deta = sum(gi * out[k] for gi, k in zip(grad, ("rho", "u", "theta", "q")))
    mu, lam = pc["mu"], pc["lam"]
    div = sp.diff(u, r) + 2 * u / r
    bracket = Cv * (th - sp.log(th) - 1) + R * (sp.log(rho) - 1) + u**2 / 2 + gap * q**2
    flux = r**2 * (rho * u * bracket + R * rho * th * u + q - q / th - u * (4 * mu / 3 * (sp.diff(u, r) - u / r) + lam * div))
    diss = (r**2 + 2 * r * pc["tau_n"] * rho * u) * q**2 / (pc["kap"] * th**2)
    diss += mu / th * r**2 * (2 * sp.diff(u, r) ** 2 + 4 * u**2 / r**2 - sp.Rational(2, 3) * div**2) + lam / th * r**2 * div**2
    identity = sp.lambdify(R_, r**2 * deta + sp.diff(flux, r) + diss)
    for x in np.linspace(1.01, 1.99, 9):
        assert abs(identity(x)) < 1e-14


# ---------------------------------------------------------------------------
# manufactured residuals and entropy budget


class QuasiStaticProfile:
    """(1, 0, 1 + 0.01 e^-t s, -kappa theta_r) with s = sin^2(pi x)."""

    def __init__(self, kappa_fn):
        self.kappa = kappa_fn

    def evaluate(self, r, t):
        x = r - 1
        k = np.pi
        s, sr, srr = np.sin(k * x) ** 2, k * np.sin(2 * k * x), 2 * k**2 * np.cos(2 * k * x)
        amp = 0.01 * np.exp(-t)
        th, thr, thrr = 1 + amp * s, amp * sr, amp * srr
        q, qr = -thr, -thrr
        z = np.zeros_like(r)
        return dict(rho=1 + z, rho_r=z, rho_t=z, u=z, u_r=z, u_rr=z, u_t=z, theta=th, theta_r=thr, theta_rr=thrr,
                    theta_t=-amp * s, q=q, q_r=qr, q_t=amp * sr)


class StaticDensity:
    def evaluate(self, r, t):
        x = r - 1
        s, sr = np.sin(np.pi * x) ** 2, np.pi * np.sin(2 * np.pi * x)
        z = np.zeros_like(r)
        return dict(rho=1 + 0.01 * s * (1 + t), rho_r=0.01 * sr * (1 + t), rho_t=0.01 * s, u=z, u_r=z, u_rr=z, u_t=z,
                    theta=1 + z, theta_r=z, theta_rr=z, theta_t=z, q=z, q_r=z, q_t=z)


class Rest:
    def evaluate(self, r, t):
        z = np.zeros_like(r)
        return dict(rho=1 + z, rho_r=z, rho_t=z, u=z, u_r=z, u_rr=z, u_t=z, theta=1 + z, theta_r=z, theta_rr=z,
                    theta_t=z, q=z, q_r=z, q_t=z)


def test_mms_residual_equilibrium(grid64, params):
    res = mms_residual(Rest(), 0.3, grid64, params, "RELAXED")
    assert max(res["forcing_norms"].values()) == 0.0
    assert max(res["mismatch_norms"].values()) < 1e-14


def test_mms_residual_mass_forcing(grid64, params):
    res = mms_residual(StaticDensity(), 0.0, grid64, params, "RELAXED")
    s = np.sin(np.pi * grid64.x) ** 2
    np.testing.assert_allclose(res["forcing"][0], 0.01 * s, atol=1e-16)


def test_mms_discrete_mismatch_second_order(params):
    ns, errs = [64, 128, 256], []
    for n in ns:
        g = RadialGrid(1.0, 2.0, n)
        res = mms_residual(QuasiStaticProfile(params.kappa), 0.2, g, params, "RELAXED")
        errs.append(max(res["mismatch_norms"].values()))
    assert min(observed_orders(errs, ns)) >= 1.9


def test_entropy_budget_equilibrium(grid64, params):
    b = entropy_budget(RadialState.equilibrium(grid64), grid64, params)
    assert all(v == 0 for v in b.values())


def test_entropy_residual_converges(params):
    ns, res = [64, 128, 256, 512], []
    for n in ns:
        g = RadialGrid(1.0, 2.0, n)
        s = perturbation_data(g, 0.01, 1, params)
        res.append(abs(entropy_flux_residual(s, rhs(s, g, params, "RELAXED"), g, params)))
    assert min(observed_orders(res, ns)) >= 1.5


def test_entropy_budget_itemises_boundary_flux(grid64, params):
    s = perturbation_data(grid64, 0.01, 1, params)
    u = s.u.copy()
    u[-1] = 0.01
    b = entropy_budget(s.replace(u=u), grid64, params)
    assert b["boundary_flux"] != 0.0
    assert entropy_budget(s, grid64, params)["boundary_flux"] == 0.0
    with pytest.raises(ConfigurationError):
        entropy_budget(s, grid64, params.replace(tau=0.0), "NSF")


def test_artificial_dissipation_is_itemised(grid64, params):
    s = perturbation_data(grid64, 0.01, 2, params)
    p = params.replace(mu=0.0, lam=0.0)
    b = entropy_budget(s, grid64, p, "EULER_CC")
    assert b["artificial"] < 0
    out = rhs(s, grid64, p, "EULER_CC")
    assert np.all(out.artificial[:, :2] == 0) and np.all(out.artificial[:, -2:] == 0)


def test_rhs_time_derivatives_consistent(params):
    g = RadialGrid(1.0, 2.0, 64)
    s = perturbation_data(g, 0.01, 1, params)
    f1, f2 = rhs_time_derivatives(s, g, params, "RELAXED")
    np.testing.assert_allclose(f1, rhs(s, g, params, "RELAXED").total)
    h = 1e-4
    plus = RadialState.from_vector(s.as_vector() + h * f1)
    est = (rhs(plus, g, params, "RELAXED").total - f1) / h
    assert np.max(np.abs(est - f2)) < 1e-3 * max(1.0, np.max(np.abs(f2)))


def test_node_coefficients_fast_path_matches_general(params):
    th = np.linspace(0.9, 1.1, 11)
    fast = node_coefficients(th, params, ModelVariant.RELAXED)
    slow_params = params.replace(g=affine(1e-300), kappa=affine(1e-300))
    slow = node_coefficients(th, slow_params, ModelVariant.RELAXED)
    for a, b in zip(fast, slow):
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)
