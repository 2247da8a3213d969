import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorenz_lab.core import Params, symmetry_map
from lorenz_lab.errors import NotPrimitive, RefineFailed, ResolutionTooCoarse, SeparationTooSmall
from lorenz_lab.integrator import IntegratorConfig
from lorenz_lab.knots import (
    Word,
    _separable,
    axis_closure,
    find_periodic_orbit,
    gauss_linking,
    gauss_linking_raw,
    hopf_calibration,
    hopf_pair,
    is_primitive,
    lorenz_braid,
    orbit_polyline,
    primitive_words,
    same_cycle,
    template_check,
)
from lorenz_lab.manifolds import winding_numbers
from lorenz_lab.section import build_section

CLASSICAL = Params(10.0, 28.0, 8.0 / 3.0)
TPOINT = Params(10.167289455, 30.868087472, 8.0 / 3.0)
# period of the AB orbit at the classical parameters, frozen from a
# run at rtol 1e-12 and cross-checked against scipy DOP853 below
AB_PERIOD = 1.5586522107


words = st.text(alphabet="AB", min_size=1, max_size=9)


def mobius(n):
    out, m, d = 1, n, 2
    while d * d <= m:
        if m % d == 0:
            m //= d
            if m % d == 0:
                return 0
            out = -out
        d += 1
    return -out if m > 1 else out


def necklace_count(n):
    return sum(mobius(d) * 2 ** (n // d) for d in range(1, n + 1) if n % d == 0) // n


def crossing_linking(c1, c2):
    """Linking number from signed crossings of the xy projection (c1 over c2)."""
    a, b = np.asarray(c1, float), np.asarray(c2, float)
    a1, b1 = np.roll(a, -1, axis=0), np.roll(b, -1, axis=0)
    total = 0
    for i in range(len(a)):
        p, r = a[i], a1[i] - a[i]
        q, s = b, b1 - b
        den = r[0] * s[:, 1] - r[1] * s[:, 0]
        ok = np.abs(den) > 1e-15
        qp = q[:, :2] - p[:2]
        t = np.where(ok, (qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]) / np.where(ok, den, 1), -1)
        u = np.where(ok, (qp[:, 0] * r[1] - qp[:, 1] * r[0]) / np.where(ok, den, 1), -1)
        hit = ok & (t >= 0) & (t < 1) & (u >= 0) & (u < 1)
        for j in np.nonzero(hit)[0]:
            za = p[2] + t[j] * r[2]
            zb = q[j, 2] + u[j] * s[j, 2]
            if za > zb:
                total += int(np.sign(r[0] * s[j, 1] - r[1] * s[j, 0]))
    return total


# ------------------------------------------------------------------ words


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6, 7])
def test_primitive_word_counts_match_necklace_formula(n):
    assert len(primitive_words(n, n)) == necklace_count(n)


def test_primitive_words_up_to_five():
    assert primitive_words(2) == ["A", "B", "AB"]
    assert len(primitive_words(5, 2)) == 12
    assert "AAB" in primitive_words(3) and "ABA" not in primitive_words(3)


@given(words)
def test_primitive_is_rotation_invariant(w):
    wd = Word(w)
    assert all(is_primitive(r) == wd.primitive for r in wd.rotations())
    assert wd.swapped().primitive == wd.primitive


@given(words, st.integers(2, 4))
def test_powers_are_not_primitive(w, k):
    assert not is_primitive(w * k)


def test_word_rejects_bad_letters():
    with pytest.raises(ValueError):
        Word("ABC")
    with pytest.raises(ValueError):
        Word("")
    assert str(Word("aab")) == "AAB"
    assert same_cycle("AAB", "ABA") and not same_cycle("AAB", "ABB")


# ------------------------------------------------------------------ braids


def test_braid_ab():
    b = lorenz_braid("AB")
    assert list(b.permutation) == [1, 0]
    assert b.crossing_count == 1
    assert b.closure_components() == 1


def test_braid_aab():
    b = lorenz_braid("AAB")
    assert list(b.permutation) == [1, 2, 0]
    assert b.crossing_count == 2
    assert b.closure_components() == 1


def test_braid_rejects_powers():
    with pytest.raises(NotPrimitive):
        lorenz_braid("ABAB")


@settings(max_examples=60)
@given(words.filter(is_primitive).filter(lambda w: len(set(w)) == 2), st.integers(0, 8))
def test_braid_invariant_under_rotation_and_symmetric_under_swap(w, k):
    b = lorenz_braid(w)
    k %= len(w)
    r = lorenz_braid(w[k:] + w[:k])
    assert list(r.permutation) == list(b.permutation)
    assert b.crossing_count == lorenz_braid(Word(w).swapped().letters).crossing_count
    perm = list(b.permutation)
    inversions = sum(perm[i] > perm[j] for i in range(len(perm)) for j in range(i + 1, len(perm)))
    assert inversions == b.crossing_count
    assert b.closure_components() == 1


# ------------------------------------------------------------------ linking


def test_hopf_link():
    assert abs(hopf_calibration()) == 1
    c1, c2 = hopf_pair()
    assert crossing_linking(c1, c2) == gauss_linking(c1, c2)


def test_right_hand_rule_sign():
    # ccw circle about the z axis, axis oriented upward and closed far away
    t = np.linspace(0, 2 * np.pi, 300, endpoint=False)
    circle = np.column_stack([np.cos(t), np.sin(t), np.zeros_like(t)])
    z = np.linspace(-50, 50, 5000)
    line = np.column_stack([np.zeros_like(z), np.zeros_like(z), z])
    th = np.linspace(0, np.pi, 200)[1:-1]
    arc = np.column_stack([50 * np.sin(th), np.zeros_like(th), 50 * np.cos(th)])
    axis = np.vstack([line, arc])
    assert gauss_linking(circle, axis) == 1
    assert gauss_linking(circle[::-1], axis) == -1


def test_distant_circles_unlinked():
    c1, c2 = hopf_pair()
    assert gauss_linking(c1, c2 + [10.0, 0, 0]) == 0


def torus_curve(k, n=600, r=0.4):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return np.column_stack([(1 + r * np.cos(k * t)) * np.cos(t), (1 + r * np.cos(k * t)) * np.sin(t), r * np.sin(k * t)])


@settings(max_examples=15, deadline=None)
@given(st.integers(-3, 3), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi), st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_linking_properties(k, a1, a2, shift):
    core = torus_curve(0, 300, 0.0)
    curve = torus_curve(k)
    lk = gauss_linking(curve, core)
    assert abs(lk) == abs(k)
    assert gauss_linking(core, curve) == lk
    assert gauss_linking(curve[::-1], core) == -lk
    assert crossing_linking(curve, core) == lk
    ca, sa, cb, sb = np.cos(a1), np.sin(a1), np.cos(a2), np.sin(a2)
    rot = np.array([[ca, -sa, 0], [sa, ca, 0], [0, 0, 1]]) @ np.array([[1, 0, 0], [0, cb, -sb], [0, sb, cb]])
    move = lambda c: c @ rot.T + np.asarray(shift)
    assert gauss_linking(move(curve), move(core)) == lk


def test_separation_too_small():
    c1, c2 = hopf_pair(400)
    # passes 1e-3 from c1, well under ten segment lengths
    with pytest.raises(SeparationTooSmall):
        gauss_linking(c1, c2 - [1.0 - 1e-3, 0.0, 0.0])


def test_polyline_integral_is_exact_at_coarse_resolution():
    c1, c2 = hopf_pair(6)
    assert abs(gauss_linking_raw(c1, c2)) == pytest.approx(1.0, abs=1e-6)


def test_resolution_too_coarse(monkeypatch):
    import lorenz_lab.knots as knots

    monkeypatch.setattr(knots, "gauss_linking_raw", lambda a, b: 0.5)
    with pytest.raises(ResolutionTooCoarse):
        knots.gauss_linking(*hopf_pair())


# ------------------------------------------------------------------ separability


def test_separability_negative_control():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(200, 2))
    assert not _separable(a, rng.normal(size=(200, 2)))
    assert _separable(a, rng.normal(size=(200, 2)) + [10.0, 0.0])


# ------------------------------------------------------------------ periodic orbits


@pytest.fixture(scope="module")
def classical_section():
    return build_section(CLASSICAL, validate=False)


@pytest.fixture(scope="module")
def ab_orbit(classical_section):
    return find_periodic_orbit(CLASSICAL, classical_section, "AB", IntegratorConfig())


def test_ab_orbit(ab_orbit):
    assert ab_orbit.period == pytest.approx(AB_PERIOD, rel=1e-8)
    assert ab_orbit.residual <= 1e-9
    assert ab_orbit.realized == "AB"


def test_ab_period_against_scipy(ab_orbit):
    from scipy.integrate import solve_ivp

    from lorenz_lab.core import vector_field

    s0 = ab_orbit.trajectory(IntegratorConfig()).states[0]
    sol = solve_ivp(lambda t, s: vector_field(CLASSICAL, s), (0, ab_orbit.period), s0, method="DOP853", rtol=1e-12, atol=1e-12)
    assert np.linalg.norm(sol.y[:, -1] - s0) < 1e-6


def test_symmetric_partner_orbits(classical_section):
    cfg = IntegratorConfig()
    aab = find_periodic_orbit(CLASSICAL, classical_section, "AAB", cfg)
    bba = find_periodic_orbit(CLASSICAL, classical_section, "BBA", cfg)
    assert aab.period == pytest.approx(bba.period, rel=1e-9)
    ta = aab.trajectory(cfg)
    tb = bba.trajectory(cfg)
    _, pa = ta.sample(per_step=2)
    _, pb = tb.sample(per_step=2)
    img = symmetry_map(pa)
    from scipy.spatial import cKDTree

    d, _ = cKDTree(img).query(pb)
    # dense point sets agree up to the sampling spacing
    spacing = np.max(np.linalg.norm(np.diff(pa, axis=0), axis=1))
    assert d.max() < spacing


def test_power_word_rejected(classical_section):
    with pytest.raises(NotPrimitive):
        find_periodic_orbit(CLASSICAL, classical_section, "ABAB", IntegratorConfig())


def test_single_letter_has_no_orbit(classical_section):
    with pytest.raises(RefineFailed):
        find_periodic_orbit(CLASSICAL, classical_section, "A", IntegratorConfig())


def test_ab_linking_equals_winding(ab_orbit):
    poly = orbit_polyline(ab_orbit)
    w = winding_numbers(poly, CLASSICAL)
    lk = gauss_linking(poly, axis_closure(CLASSICAL, "plus"))
    assert lk == w.n_plus == 1
    assert gauss_linking(poly, axis_closure(CLASSICAL, "minus")) == w.n_minus


# ------------------------------------------------------------------ template


def test_template_small_grid_at_tpoint():
    sec = build_section(TPOINT, validate=False)
    r = template_check(TPOINT, sec, 100)
    assert r.passed and r.disjoint and r.onto
    ia, ib = r.images["A"], r.images["B"]
    assert np.allclose(symmetry_map(ia), ib)
