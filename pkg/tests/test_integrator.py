import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from lorenz_lab.core import CLASSICAL, divergence, symmetry_map, vector_field
from lorenz_lab.errors import NoEvent
from lorenz_lab.integrator import (
    DEFAULT_CONFIG,
    IntegratorConfig,
    Trajectory,
    advance_to_event,
    flow_map,
    integrate,
    linear_event,
    volume_ratio,
)
from lorenz_lab.section import ellipsoid_value

S0 = np.array([1.0, 1.0, 1.0])
starts = st.tuples(
    st.floats(-15, 15, allow_nan=False), st.floats(-20, 20, allow_nan=False), st.floats(5, 45, allow_nan=False)
).map(np.array)


def _reference(s0, t, sense=1):
    sol = solve_ivp(
        lambda _t, y: sense * vector_field(CLASSICAL, y), (0, t), s0, method="DOP853", rtol=1e-13, atol=1e-13
    )
    return sol.y[:, -1]


def _rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=-1)
    with pytest.raises(ValueError):
        IntegratorConfig(max_step=0.0)
    tight = DEFAULT_CONFIG.tightened(10)
    assert tight.rel_tol == pytest.approx(1e-11)
    assert tight.abs_tol == pytest.approx(1e-13)


@pytest.mark.parametrize("t", [0.5, 1.0, 3.0])
def test_matches_independent_solver(t):
    assert _rel(flow_map(CLASSICAL, S0, t), _reference(S0, t)) < 1e-8


def test_dense_output_matches_independent_solver():
    traj = integrate(CLASSICAL, S0, (0.0, 2.0))
    tq = np.linspace(0.0, 2.0, 37)
    sol = solve_ivp(lambda _t, y: vector_field(CLASSICAL, y), (0, 2), S0, method="DOP853", rtol=1e-13, atol=1e-13, dense_output=True)
    np.testing.assert_allclose(traj(tq), sol.sol(tq).T, rtol=1e-7, atol=1e-8)
    assert isinstance(traj, Trajectory)
    np.testing.assert_allclose(traj.end, traj(2.0), atol=1e-12)


def test_integrate_offsets_clock():
    traj = integrate(CLASSICAL, S0, (5.0, 6.0))
    assert traj.t[0] == 5.0 and traj.t[-1] == pytest.approx(6.0)
    with pytest.raises(ValueError):
        integrate(CLASSICAL, S0, (1.0, 1.0))


@settings(max_examples=20, deadline=None)
@given(starts)
def test_equivariance(s0):
    a = flow_map(CLASSICAL, symmetry_map(s0), 1.0)
    b = symmetry_map(flow_map(CLASSICAL, s0, 1.0))
    assert _rel(a, b) < 1e-8


def test_flow_identity_and_composition():
    np.testing.assert_array_equal(flow_map(CLASSICAL, S0, 0.0), S0)
    full = flow_map(CLASSICAL, S0, 1.0)
    half = flow_map(CLASSICAL, flow_map(CLASSICAL, S0, 0.5), 0.5)
    assert _rel(half, full) < 1e-8


def test_reversibility():
    # backward integration amplifies forward errors by roughly exp(22), so the
    # round trip only reaches 1e-7 at near-machine tolerances
    cfg = IntegratorConfig(1e-14, 1e-16)
    s1 = flow_map(CLASSICAL, S0, 1.0, cfg)
    back = flow_map(CLASSICAL, s1, -1.0, cfg)
    assert _rel(back, S0) < 1e-7
    np.testing.assert_allclose(flow_map(CLASSICAL, s1, -1.0), _reference(s1, 1.0, sense=-1), rtol=1e-4)


def test_euler_defect_is_second_order():
    s0 = np.array([3.0, -2.0, 20.0])
    defects = []
    for t in (1e-2, 5e-3, 2.5e-3):
        defects.append(np.linalg.norm(flow_map(CLASSICAL, s0, t) - (s0 + t * vector_field(CLASSICAL, s0))))
    for a, b in zip(defects, defects[1:]):
        assert a / b == pytest.approx(4.0, rel=0.05)


@pytest.mark.parametrize("method", ["octahedron", "tetrahedron"])
def test_volume_contraction(method):
    ratio = volume_ratio(CLASSICAL, S0, 1.0, method=method)
    assert ratio == pytest.approx(math.exp(divergence(CLASSICAL)), rel=1e-3)


def test_volume_ratio_rejects_unknown_method():
    with pytest.raises(ValueError):
        volume_ratio(CLASSICAL, S0, 1.0, method="cube")


def test_volume_ratio_tracks_divergence_over_time():
    for t in (0.25, 0.5):
        assert volume_ratio(CLASSICAL, [2.0, 3.0, 20.0], t) == pytest.approx(math.exp(t * divergence(CLASSICAL)), rel=1e-3)


def test_trapping_ellipsoid_is_never_left():
    rng = np.random.default_rng(3)
    for _ in range(5):
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        # point on V = 1000^2 along the ray u from (0, 0, 2 rho)
        c = np.array([0.0, 0.0, 56.0])
        q = np.array([28.0, 10.0, 10.0])
        r = 1000.0 / math.sqrt(np.sum(q * u**2))
        s0 = c + r * u
        assert ellipsoid_value(CLASSICAL, s0) == pytest.approx(1000.0**2)
        traj = integrate(CLASSICAL, s0, (0.0, 10.0))
        _, pts = traj.sample(per_step=4)
        assert np.all(ellipsoid_value(CLASSICAL, pts[1:]) < 1000.0**2 * (1 + 1e-12))


def test_event_location_two_tolerances():
    ev = linear_event([0, 0, 1], 27.0, "any", "z27")
    s0 = [1.0, 1.0, 40.0]
    a = advance_to_event(CLASSICAL, s0, ev)
    b = advance_to_event(CLASSICAL, s0, ev, DEFAULT_CONFIG.tightened(100))
    assert abs(a.state[2] - 27) <= 1e-9
    assert abs(b.state[2] - 27) <= 1e-9
    assert a.t == pytest.approx(b.t, abs=1e-8)
    np.testing.assert_allclose(a.state, b.state, atol=1e-7)


def test_event_unreachable():
    with pytest.raises(NoEvent):
        advance_to_event(CLASSICAL, S0, linear_event([0, 0, 1], 1e6), DEFAULT_CONFIG.with_max_time(50))


def test_direction_filter():
    s0 = [1.0, 1.0, 40.0]
    any_hit = advance_to_event(CLASSICAL, s0, linear_event([0, 0, 1], 27.0, "any"))
    up_hit = advance_to_event(CLASSICAL, s0, linear_event([0, 0, 1], 27.0, "up"))
    assert any_hit.rate < 0  # starts above, first crossing goes down
    assert up_hit.rate > 0
    assert any_hit.t <= up_hit.t


def test_csv_round_trip(tmp_path):
    traj = integrate(CLASSICAL, S0, (0.0, 0.5))
    traj.to_csv(tmp_path / "t.csv")
    data = np.loadtxt(tmp_path / "t.csv", delimiter=",", skiprows=1)
    np.testing.assert_array_equal(data[:, 1:], traj.states)
