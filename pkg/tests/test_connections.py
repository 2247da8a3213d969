import math

import numpy as np
import pytest

from lorenz_lab.connections import (
    SENTINEL,
    SearchConfig,
    find_homoclinic,
    find_tpoint,
    first_return_signature,
    heteroclinic_residual,
    homoclinic_arc,
    is_sentinel,
    loop_signature,
    path_scan,
)
from lorenz_lab.core import CLASSICAL, Params
from lorenz_lab.errors import BracketInvalid, Captured, PathOutsideDomain
from lorenz_lab.integrator import DEFAULT_CONFIG
from lorenz_lab.manifolds import winding_numbers

BETA = 8.0 / 3.0
# frozen from runs of the searches below; cross-checked at 10x tighter tolerances
RHO_PRINCIPAL = 13.926557064
RHO_N3_SIGMA3 = 133.77608328
TPOINT = (30.868087472, 10.167289455)


@pytest.fixture(scope="module")
def principal():
    return find_homoclinic(BETA, 10.0, (13.0, 15.0))


@pytest.fixture(scope="module")
def tpoint():
    return find_tpoint(BETA, (30.8, 10.2))


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(param_tol=0)
    with pytest.raises(ValueError):
        SearchConfig(max_iters=0)


def test_signature_sides():
    assert first_return_signature(Params(10, 15, BETA)) < 0
    try:
        assert first_return_signature(Params(10, 13, BETA)) > 0
    except Captured as exc:
        assert exc.target == "p+"


def test_signature_continuity_away_from_flip():
    a = first_return_signature(Params(10, 20.0, BETA))
    b = first_return_signature(Params(10, 20.0001, BETA))
    assert abs(a - b) < 1e-2


def test_loop_signature_flips_at_principal_homoclinic():
    assert loop_signature(Params(10, 13.9, BETA)) == 1
    assert loop_signature(Params(10, 13.95, BETA)) == -1


def test_principal_homoclinic(principal):
    assert principal.params.rho == pytest.approx(13.9265, abs=1e-3)
    assert principal.params.rho == pytest.approx(RHO_PRINCIPAL, abs=1e-6)
    assert (principal.winding.n_plus, principal.winding.n_minus) == (1, 0)
    assert principal.N == 1
    assert principal.residual <= 1e-6
    rec = principal.to_record()
    assert rec["kind"] == "homoclinic" and rec["winding"]["plus"] == 1


def test_principal_homoclinic_tight_tolerances(principal):
    tight = find_homoclinic(BETA, 10.0, (13.0, 15.0), DEFAULT_CONFIG.tightened(10))
    assert abs(tight.params.rho - principal.params.rho) < 1e-3


def test_principal_homoclinic_mirror_run(principal):
    mirror = find_homoclinic(BETA, 10.0, (13.0, 15.0), side="minus")
    assert mirror.params.rho == pytest.approx(principal.params.rho, abs=1e-9)
    assert (mirror.winding.n_plus, mirror.winding.n_minus) == (0, 1)


def test_principal_homoclinic_loop_signature_agrees(principal):
    alt = find_homoclinic(BETA, 10.0, (13.0, 15.0), signature="loop")
    assert alt.params.rho == pytest.approx(principal.params.rho, abs=1e-6)
    assert (alt.winding.n_plus, alt.winding.n_minus) == (1, 0)


def test_homoclinic_arc_returns_near_origin(principal):
    arc, hits = homoclinic_arc(Params(10, principal.params.rho, BETA))
    assert np.linalg.norm(arc.end) < 0.1 * CLASSICAL.x0
    assert hits >= 0


def test_three_loop_homoclinic_winds_twice_and_once():
    res = find_homoclinic(BETA, 3.0, (133.5, 134.0), crossing=3, signature="loop", search=SearchConfig(param_tol=1e-9))
    assert res.params.rho == pytest.approx(RHO_N3_SIGMA3, abs=1e-6)
    assert (res.winding.n_plus, res.winding.n_minus) == (2, 1)
    assert res.N == 3
    tight = find_homoclinic(
        BETA, 3.0, (133.5, 134.0), DEFAULT_CONFIG.tightened(100), crossing=3, signature="loop", search=SearchConfig(param_tol=1e-9)
    )
    assert tight.params.rho == pytest.approx(res.params.rho, abs=1e-6)


def test_bracket_invalid():
    with pytest.raises(BracketInvalid):
        find_homoclinic(BETA, 10.0, (15.0, 13.0))
    with pytest.raises(BracketInvalid):
        find_homoclinic(BETA, 10.0, (16.0, 20.0))
    with pytest.raises(ValueError):
        find_homoclinic(BETA, 10.0, (13.0, 15.0), signature="nope")


def test_heteroclinic_residual_sentinel_at_classical():
    res = heteroclinic_residual(CLASSICAL)
    assert is_sentinel(res)
    assert abs(res[0]) >= SENTINEL


def test_heteroclinic_residual_finite_near_guess():
    for rho in np.linspace(30.6, 31.0, 5):
        for sigma in np.linspace(10.0, 10.4, 5):
            r = heteroclinic_residual(Params(sigma, rho, BETA))
            assert np.all(np.isfinite(r))


def test_tpoint(tpoint):
    assert tpoint.params.rho == pytest.approx(30.8680, abs=0.01)
    assert tpoint.params.sigma == pytest.approx(10.1673, abs=0.01)
    assert tpoint.params.rho == pytest.approx(TPOINT[0], abs=1e-6)
    assert tpoint.params.sigma == pytest.approx(TPOINT[1], abs=1e-6)
    assert tpoint.residual <= 1e-6
    assert tpoint.hits_before_connection == 0
    assert np.linalg.norm(heteroclinic_residual(tpoint.params)) <= 1e-6


def test_tpoint_rerun_is_fixed(tpoint):
    again = find_tpoint(BETA, (tpoint.params.rho, tpoint.params.sigma))
    assert again.iterations <= 2
    assert again.params.rho == pytest.approx(tpoint.params.rho, abs=1e-6)


def test_tpoint_mirror(tpoint):
    mirror = find_tpoint(BETA, (30.8, 10.2), side="minus")
    assert mirror.params.rho == pytest.approx(tpoint.params.rho, abs=1e-6)
    assert mirror.params.sigma == pytest.approx(tpoint.params.sigma, abs=1e-6)


def test_path_scan_single_sign_change():
    samples, sign_changes, _ = path_scan(lambda s: Params(10, 13 + 2 * s, BETA), 50)
    assert len(samples) == 50
    assert len(sign_changes) == 1
    lo, hi = sign_changes[0]
    assert 13 + 2 * lo < RHO_PRINCIPAL < 13 + 2 * hi


def test_path_scan_constant_path():
    _, sign_changes, prefix_changes = path_scan(lambda s: CLASSICAL, 6)
    assert sign_changes == [] and prefix_changes == []


def test_path_scan_between_one_and_three_loop_homoclinics():
    a = np.array([RHO_PRINCIPAL, 10.0])
    b = np.array([RHO_N3_SIGMA3, 3.0])

    def path(s):
        rho, sigma = a + s * (b - a)
        return Params(sigma, rho, BETA)

    _, _, prefix_changes = path_scan(path, 20)
    assert len(prefix_changes) >= 1


def test_path_scan_rejects_domain_exit():
    with pytest.raises(PathOutsideDomain):
        path_scan(lambda s: Params(10, 2 + 20 * s, BETA), 5)
