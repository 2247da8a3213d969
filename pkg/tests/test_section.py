import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorenz_lab.core import CLASSICAL, Params, fixed_points, symmetry_map
from lorenz_lab.errors import NotOnSection, NotTrapping, SectionInvalid
from lorenz_lab.section import (
    BOUNDARY,
    PARABOLOID,
    PLANE,
    SYMBOL_A,
    SYMBOL_B,
    SectionSpec,
    build_section,
    classify_crossing,
    ellipsoid_value,
    flux_through_paraboloid,
    in_hairpin,
    minimal_trapping_radius,
    next_crossing,
    paraboloid_value,
    return_map,
    tangency_curves,
    tangency_roots,
    tangency_value,
    trapping_box,
    validate_transversality,
    validate_trapping,
)

X0 = math.sqrt(72)


@pytest.fixture(scope="module")
def sec():
    return build_section(CLASSICAL, validate=False)


def test_paraboloid_value():
    assert paraboloid_value(CLASSICAL, [0, 0, 5]) == pytest.approx(-40 / 3)
    assert abs(paraboloid_value(CLASSICAL, fixed_points(CLASSICAL).p_plus)) <= 1e-12


@given(st.floats(-30, 30), st.floats(-30, 30))
def test_paraboloid_zero_set(x, y):
    s = np.array([x, y, x * y / CLASSICAL.beta])
    assert abs(paraboloid_value(CLASSICAL, s)) <= 1e-12 * max(1.0, abs(x * y))


def test_tangency_value_hand_values():
    assert tangency_value(CLASSICAL, 0, 0) == 0
    assert abs(tangency_value(CLASSICAL, X0, X0)) <= 1e-9
    assert tangency_value(CLASSICAL, 0, 1) == pytest.approx(10)


@settings(max_examples=50)
@given(st.floats(-30, 30), st.floats(-30, 30))
def test_flux_on_paraboloid_equals_tangency_value(x, y):
    s = np.array([x, y, x * y / CLASSICAL.beta])
    ref = tangency_value(CLASSICAL, x, y)
    assert flux_through_paraboloid(CLASSICAL, s) == pytest.approx(ref, rel=1e-9, abs=1e-9 * (1 + abs(x) ** 4))


@pytest.mark.parametrize("x", [8.0, 12.0, 20.0, 30.0])
def test_tangency_roots_match_quadratic(x):
    p = CLASSICAL
    # sigma y^2 - (sigma + 1 + x^2/beta) x y + rho x^2 = 0
    ref = np.sort(np.roots([p.sigma, -(p.sigma + 1 + x**2 / p.beta) * x, p.rho * x**2]).real)
    near, far = tangency_roots(p, x)
    np.testing.assert_allclose(np.sort([near, far]), ref, rtol=1e-10)
    mid = 0.5 * (near + far)
    assert in_hairpin(p, x, mid)
    assert tangency_value(p, x, mid) < 0
    assert not in_hairpin(p, x, 2 * max(near, far))


def test_tangency_curves_through_wing_centers_and_away_from_origin():
    c = tangency_curves(CLASSICAL, resolution=800)
    fp = fixed_points(CLASSICAL)
    for curve, center in ((c.delta_plus, fp.p_plus), (c.delta_minus, fp.p_minus)):
        step = np.max(np.linalg.norm(np.diff(curve, axis=0), axis=1))
        assert np.min(np.linalg.norm(curve - center, axis=1)) <= step
        assert np.min(np.linalg.norm(curve, axis=1)) > 1.0
    np.testing.assert_allclose(symmetry_map(c.delta_plus), c.delta_minus, atol=1e-9)
    assert np.max(np.abs(tangency_value(CLASSICAL, c.delta_plus[:, 0], c.delta_plus[:, 1]))) < 1e-6


def test_membership(sec):
    eps = sec.epsilon
    assert sec.contains([0.1, 0.1, eps])
    assert not sec.contains([0.0, 0.0, 0.0])
    assert sec.part_of([0.1, 0.1, eps]) == PLANE
    q = np.array([20.0, 2.0, 40.0 / CLASSICAL.beta])
    assert sec.part_of(q) == PARABOLOID


@given(st.floats(-40, 40), st.floats(-40, 40))
def test_membership_is_symmetric(x, y):
    sec = build_section(CLASSICAL, validate=False)
    s = sec.lift([x, y])
    assert sec.part_of(s) == sec.part_of(symmetry_map(s))


def test_classification():
    # (2, 1, eps) lies on the plane part once beta eps > 2
    sec = build_section(CLASSICAL, SectionSpec(epsilon=1.0), validate=False)
    eps = sec.epsilon
    a = classify_crossing(sec, [2.0, 1.0, eps])
    assert a.symbol == SYMBOL_A and a.part == PLANE
    assert classify_crossing(sec, symmetry_map(a.state)).symbol == SYMBOL_B
    assert classify_crossing(sec, [1e-15, 0.0, eps]).symbol == BOUNDARY
    with pytest.raises(NotOnSection):
        classify_crossing(sec, [1.0, 1.0, 3.0])
    default = build_section(CLASSICAL, validate=False)
    with pytest.raises(NotOnSection):
        classify_crossing(default, [2.0, 1.0, default.epsilon])


def test_classification_with_dividing_curve(sec):
    # a vertical dividing line at x = 1 oriented upward has the A side on its right
    cut = sec.with_eta(np.array([[1.0, -50.0], [1.0, 50.0]]))
    eps = sec.epsilon
    assert cut.symbol_of([2.0, 0.0, eps]) == SYMBOL_A
    assert cut.symbol_of([0.5, 0.0, eps]) == SYMBOL_B


def test_invalid_spec():
    with pytest.raises(SectionInvalid):
        build_section(CLASSICAL, SectionSpec(epsilon=30.0), validate=False)
    with pytest.raises(SectionInvalid):
        build_section(Params(10, 2, 8 / 3), validate=False)


def test_transversality_classical(sec):
    reports = validate_transversality(CLASSICAL, sec, 10000)
    for r in reports:
        assert r["min_margin"] > 0 and not r["failures"]
        assert r["min_margin_A"] == pytest.approx(r["min_margin_B"], rel=1e-12)
    # on the plane part the margin is -zdot = beta eps - xy, bounded below by nothing but positive
    assert reports[0]["part"] == PLANE


def test_transversality_fails_when_plane_reaches_the_tangency_curves():
    big = build_section(CLASSICAL, SectionSpec(epsilon=26.0), validate=False)
    with pytest.raises(SectionInvalid):
        validate_transversality(CLASSICAL, big, 2000)
    reports = validate_transversality(CLASSICAL, big, 2000, raise_on_fail=False)
    assert any(r["failures"] for r in reports)


def test_trapping():
    rep = validate_trapping(CLASSICAL, 1000.0)
    assert rep["min_margin"] > 0 and not rep["failures"]
    with pytest.raises(NotTrapping):
        validate_trapping(CLASSICAL, 1.0)
    small = validate_trapping(CLASSICAL, 1.0, raise_on_fail=False)
    bad = np.array(small["failures"])
    # each reported state really has outward flux, and so does its mirror image
    for s in bad[:20]:
        for q in (s, symmetry_map(s)):
            x, y, z = q
            assert CLASSICAL.rho * x**2 + y**2 + CLASSICAL.beta * z**2 - 2 * CLASSICAL.rho * CLASSICAL.beta * z <= 0


def test_minimal_trapping_radius():
    r = minimal_trapping_radius(CLASSICAL)
    assert not validate_trapping(CLASSICAL, r, raise_on_fail=False)["failures"]
    assert validate_trapping(CLASSICAL, 0.8 * r, raise_on_fail=False)["failures"]
    lo, hi = trapping_box(CLASSICAL)
    fp = fixed_points(CLASSICAL)
    for c in (fp.origin, fp.p_plus, fp.p_minus):
        assert np.all(c > lo) and np.all(c < hi)
        assert ellipsoid_value(CLASSICAL, c) < r**2


def test_return_map_lands_on_section(sec):
    xy, pt = return_map(sec, [3.0, 2.0])
    assert pt is not None and sec.contains(pt.state, tol=1e-8)
    np.testing.assert_array_equal(xy, pt.state[:2])
    kind, pt2, _ = next_crossing(sec, sec.lift([3.0, 2.0]))
    assert kind in (PLANE, PARABOLOID)
    np.testing.assert_array_equal(pt2.state, pt.state)


def test_return_map_commutes_with_symmetry(sec):
    xy, pt = return_map(sec, [3.0, 2.0])
    xy2, pt2 = return_map(sec, [-3.0, -2.0])
    np.testing.assert_allclose(xy2, -xy, atol=1e-9)
    assert {pt.symbol, pt2.symbol} == {SYMBOL_A, SYMBOL_B}
