import json
import re

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cattaneo_sphere import PhysParams, RadialGrid, RadialState, perturbation_data
from cattaneo_sphere.errors import ConfigurationError, ParameterError
from cattaneo_sphere.functionals import wellprep_measure
from cattaneo_sphere.grid import ddr, weighted_H1
from cattaneo_sphere.state import compatibility_check, in_band, read_snapshots, snapshot_line, validate, write_snapshots

from conftest import observed_orders


def test_state_is_immutable_copy(grid64):
    rho = np.ones(grid64.size)
    s = RadialState.equilibrium(grid64)
    t = RadialState(rho, np.zeros(grid64.size), np.ones(grid64.size), np.zeros(grid64.size))
    rho[3] = 5.0
    assert t.rho[3] == 1.0
    with pytest.raises(ValueError):
        s.rho[0] = 2.0
    assert s.as_vector().shape == (4, grid64.size)
    assert RadialState.from_vector(s.as_vector(), 0.5).t == 0.5


def test_validate_examples(grid64):
    eq = RadialState.equilibrium(grid64)
    assert validate(eq, grid64) == []
    u = np.zeros(grid64.size)
    u[0] = 0.1
    bad = validate(eq.replace(u=u), grid64)
    assert [(v.index, v.field, v.rule) for v in bad] == [(0, "u", "boundary")]
    th = np.ones(grid64.size)
    th[10] = 0.7
    bad = validate(eq.replace(theta=th), grid64, band=True)
    assert [(v.index, v.field, v.rule) for v in bad] == [(10, "theta", "band")]
    assert validate(eq.replace(theta=th), grid64) == []


def test_validate_reports_positivity_and_length(grid64):
    eq = RadialState.equilibrium(grid64)
    rho = np.ones(grid64.size)
    rho[5] = -1.0
    v = validate(eq.replace(rho=rho), grid64)
    assert any(x.rule == "positive" and x.index == 5 and x.field == "rho" for x in v)
    assert all(x.rule == "length" for x in validate(eq, RadialGrid(1, 2, 32)))
    assert "node 5" in str(v[0])


def test_perturbation_zero_amplitude_is_equilibrium(grid64, params):
    s = perturbation_data(grid64, 0.0, 1, params)
    np.testing.assert_array_equal(s.as_vector(), RadialState.equilibrium(grid64).as_vector())


@given(amp=st.floats(min_value=0.0, max_value=0.1), mode=st.integers(min_value=1, max_value=4))
def test_perturbation_data_valid_and_prepared(amp, mode):
    g = RadialGrid(1.0, 2.0, 128)
    p = PhysParams()
    s = perturbation_data(g, amp, mode, p)
    assert validate(s, g, band=True) == []
    assert wellprep_measure(s, g, p) < 1e-10
    assert s.u[1] == pytest.approx(amp * np.sin(mode * np.pi * g.x[1]) ** 4)


def test_ill_prepared_measure(params):
    g = RadialGrid(1.0, 2.0, 256)
    s = perturbation_data(g, 0.01, 1, params, well_prepared=False)
    assert np.all(s.q == 0)
    expected = weighted_H1(params.kappa(s.theta) * ddr(s.theta, g), 2, g)
    assert wellprep_measure(s, g, params) == pytest.approx(expected, rel=1e-14)
    assert expected > 0


def test_defect_sets_measure(params):
    g = RadialGrid(1.0, 2.0, 256)
    s = perturbation_data(g, 0.01, 1, params, defect=0.003)
    assert wellprep_measure(s, g, params) == pytest.approx(0.003, rel=1e-9)


def test_perturbation_rejects_bad_mode(grid64, params):
    with pytest.raises(ParameterError):
        perturbation_data(grid64, 0.01, 0, params)
    with pytest.raises(ParameterError):
        perturbation_data(grid64, -0.01, 1, params)


def test_compatibility_examples(grid64, params):
    ok0, ok1, res = compatibility_check(RadialState.equilibrium(grid64), grid64, params, "RELAXED")
    assert ok0 and ok1 and all(v == 0 for v in res.values())
    q = np.zeros(grid64.size)
    q[-1] = 0.01
    ok0, _, res = compatibility_check(RadialState.equilibrium(grid64).replace(q=q), grid64, params, "RELAXED")
    assert not ok0 and res["k0"] == 0.01
    with pytest.raises(ConfigurationError):
        compatibility_check(RadialState.equilibrium(grid64), grid64, params.replace(tau=0.0), "RELAXED")


def test_compatibility_first_order_residual_converges(params):
    ns = [64, 128, 256, 512]
    res = []
    for n in ns:
        g = RadialGrid(1.0, 2.0, n)
        ok0, _, r = compatibility_check(perturbation_data(g, 0.01, 1, params), g, params, "RELAXED")
        assert ok0 and r["k0"] == 0.0
        res.append(max(r["k1_u"], r["k1_q"]))
    assert min(observed_orders(res, ns)) >= 1.9


def test_snapshot_roundtrip(tmp_path, params):
    g = RadialGrid(1.0, 2.0, 16)
    states = [perturbation_data(g, 0.01, 1, params, t=t) for t in (0.0, 0.1 / 3)]
    path = tmp_path / "snap.ndjson"
    write_snapshots(path, states, g)
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    obj = json.loads(lines[1])
    assert set(obj) == {"t", "r", "rho", "u", "theta", "q"}
    assert len(obj["r"]) == g.size
    for num in re.findall(r"-?\d\.\d+e[+-]\d+", lines[1]):
        assert len(num.split("e")[0].replace("-", "").replace(".", "")) >= 15
    back = list(read_snapshots(path))
    for a, b in zip(states, back):
        np.testing.assert_array_equal(a.as_vector(), b.as_vector())
        assert a.t == b.t
    assert snapshot_line(states[0], g).startswith('{"t":')


def test_in_band(grid64, params):
    assert in_band(perturbation_data(grid64, 0.1, 1, params))
    assert not in_band(perturbation_data(grid64, 0.3, 1, params))
