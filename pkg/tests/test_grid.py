import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cattaneo_sphere import RadialGrid
from cattaneo_sphere.errors import GridTooSmallError, ShapeError
from cattaneo_sphere.grid import d2dr2, d3dr3, ddr, integrate, weighted_H1, weighted_L2

from conftest import observed_orders


def test_nodes_uniform_and_increasing():
    g = RadialGrid(1.0, 2.0, 512)
    assert g.nodes[0] == 1.0 and g.nodes[-1] == 2.0
    assert np.all(np.diff(g.nodes) > 0)
    assert np.max(np.abs(np.diff(g.nodes) - g.dr)) < 1e-14 * g.dr * 1e2
    assert g.size == 513


@pytest.mark.parametrize("kw", [dict(r_min=0.5), dict(r_min=2.0, r_max=1.5), dict(n=0)])
def test_invalid_grids_rejected(kw):
    base = dict(r_min=1.0, r_max=2.0, n=16)
    base.update(kw)
    with pytest.raises(Exception):
        RadialGrid(**base)


def test_weighted_L2_examples():
    g = RadialGrid(1.0, 2.0, 4096)
    assert weighted_L2(np.zeros(g.size), 2, g) == 0.0
    assert weighted_L2(np.ones(g.size), 2, g) == pytest.approx(np.sqrt(7 / 3), abs=1e-6)
    assert weighted_L2(np.ones(g.size), 0, g) == pytest.approx(1.0, rel=1e-14)


def test_length_mismatch_is_shape_error():
    g = RadialGrid(1.0, 2.0, 8)
    with pytest.raises(ShapeError):
        weighted_L2(np.ones(5), 0, g)
    with pytest.raises(ShapeError):
        ddr(np.ones(5), g)


@given(c=st.lists(st.floats(min_value=-3, max_value=3), min_size=3, max_size=3), n=st.integers(min_value=4, max_value=64))
def test_trapezoid_on_quadratics(c, n):
    g = RadialGrid(1.0, 2.0, n)
    r = g.nodes
    f = c[0] + c[1] * r + c[2] * r**2
    exact = c[0] + c[1] * 1.5 + c[2] * 7 / 3
    # the trapezoid rule integrates linear parts exactly; the quadratic part has error dr^2/12 * f''
    corr = -c[2] * 2 * g.dr**2 / 12
    assert integrate(f, g) + corr == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_trapezoid_exact_for_linear_polynomials():
    g = RadialGrid(1.0, 2.0, 7)
    assert integrate(3 + 2 * g.nodes, g) == pytest.approx(6.0, rel=1e-14)


def test_derivative_exactness():
    g = RadialGrid(1.0, 2.0, 16)
    r = g.nodes
    np.testing.assert_allclose(ddr(np.full(g.size, 4.0), g), 0.0, atol=1e-12)
    np.testing.assert_allclose(ddr(r**2, g), 2 * r, rtol=1e-12)
    np.testing.assert_allclose(d2dr2(r**2, g), 2.0, rtol=1e-10)
    np.testing.assert_allclose(d2dr2(r, g), 0.0, atol=1e-9)
    np.testing.assert_allclose(d3dr3(r**3, g), 6.0, rtol=1e-8)


@pytest.mark.parametrize("op, exact", [(ddr, np.cos), (d2dr2, lambda r: -np.sin(r)), (d3dr3, lambda r: -np.cos(r))])
def test_derivative_convergence_order(op, exact):
    ns = [32, 64, 128, 256]
    errs = []
    for n in ns:
        g = RadialGrid(1.0, 2.0, n)
        errs.append(np.max(np.abs(op(np.sin(g.nodes), g) - exact(g.nodes))))
    assert min(observed_orders(errs, ns)) >= 1.9


def test_small_grid_rejected():
    g = RadialGrid(1.0, 2.0, 3)
    with pytest.raises(GridTooSmallError):
        ddr(np.ones(4), g)
    with pytest.raises(GridTooSmallError):
        d2dr2(np.ones(4), g)


def test_weighted_H1_examples():
    g = RadialGrid(1.0, 2.0, 4096)
    r = g.nodes
    assert weighted_H1(np.zeros(g.size), 2, g) == 0.0
    assert weighted_H1(np.ones(g.size), 2, g, weight_inside=False) == pytest.approx(np.sqrt(7 / 3), abs=1e-6)
    # weight inside: (r * 1)_r = 1 adds the interval length
    assert weighted_H1(np.ones(g.size), 2, g) == pytest.approx(np.sqrt(10 / 3), abs=1e-6)
    for inside in (True, False):
        assert weighted_H1(r - 1, 0, g, weight_inside=inside) == pytest.approx(np.sqrt(4 / 3), abs=1e-6)


@given(c=st.floats(min_value=-1e3, max_value=1e3), w=st.sampled_from([0, 2]))
def test_weighted_L2_homogeneous(c, w):
    g = RadialGrid(1.0, 2.0, 32)
    f = np.sin(3 * g.nodes) + 0.2
    assert weighted_L2(c * f, w, g) == pytest.approx(abs(c) * weighted_L2(f, w, g), rel=1e-14, abs=1e-300)


def test_trim_integrates_interior_only():
    g = RadialGrid(1.0, 2.0, 10)
    assert integrate(np.ones(g.size), g, trim=2) == pytest.approx(0.6, rel=1e-14)
    with pytest.raises(GridTooSmallError):
        integrate(np.ones(g.size), g, trim=5)
