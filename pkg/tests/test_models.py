import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from asianctmc.chain import StateGrid, validate_generator
from asianctmc.errors import ArgumentError, ConstructionError
from asianctmc.models import (
    CEV, CGMY, CIR, DEJD, MJD, GridSpec, build_diffusion_generator, build_generator, build_grid,
    cell_mass_quadrature, default_span, jump_rates, make_grid, repaired_nodes, risk_neutral_drift_check,
)
from asianctmc.pricing import Market, PricingRequest, price_asian
from asianctmc.reference import CGMY_MODEL, DEJD_MODEL, JUMP_MARKET, MJD_MODEL, cev


def _moments(gen):
    x = gen.x
    d = x[None, :] - x[:, None]
    return (gen.q * d).sum(axis=1), (gen.q * d**2).sum(axis=1)


def test_parameter_validation():
    with pytest.raises(ArgumentError):
        DEJD(sigma=0.1, lam=0.1, p_up=1.5, eta1=10, eta2=5, r=0.0)
    with pytest.raises(ArgumentError):
        DEJD(sigma=0.1, lam=0.1, p_up=0.5, eta1=0.9, eta2=5, r=0.0)
    with pytest.raises(ArgumentError):
        CGMY(C=1, G=5, M=5, Y=2.0, r=0.0)
    with pytest.raises(ArgumentError):
        GridSpec(n_states=2)
    with pytest.raises(ArgumentError):
        GridSpec(boundary="sticky")


def test_uniform_random_walk_rates():
    h, sigma = 0.1, 0.3
    grid = StateGrid(np.arange(1, 12) * h)
    gen = build_diffusion_generator(lambda x: 0 * x, lambda x: sigma + 0 * x, grid)
    q = gen.q
    for i in range(1, 10):
        assert q[i, i + 1] == pytest.approx(sigma**2 / (2 * h**2), rel=1e-12)
        assert q[i, i - 1] == pytest.approx(sigma**2 / (2 * h**2), rel=1e-12)


@pytest.mark.parametrize("beta", [-0.5, 0.0, 0.25, 0.5])
def test_cev_moment_identities(beta):
    spec = cev(beta)
    grid = build_grid(spec, GridSpec(), 100.0, 1.0)
    x = grid.states
    mu = spec.r * x
    var = spec.sigma**2 * x ** (2 * beta + 2)
    gen = build_generator(spec, grid)
    m1, m2 = _moments(gen)
    ok = ~repaired_nodes(x, mu, var)
    ok[[0, -1]] = False
    assert np.max(np.abs(m1 - mu)[ok] / np.maximum(1, np.abs(mu[ok]))) < 1e-12
    assert np.max(np.abs(m2 - var)[ok] / np.maximum(1, var[ok])) < 1e-12


def test_cir_drift_identity_and_repair():
    spec = CIR(kappa=0.5, theta_bar=1.0, sigma=0.5, r=0.0)
    grid = build_grid(spec, GridSpec(), 1.0, 1.0)
    gen = build_generator(spec, grid)
    assert validate_generator(gen) == []
    x = grid.states
    mu, var = spec.kappa * (spec.theta_bar - x), spec.sigma**2 * x
    m1, _ = _moments(gen)
    bad = repaired_nodes(x, mu, var)
    ok = ~bad
    ok[[0, -1]] = False
    assert np.max(np.abs(m1 - mu)[ok]) < 1e-12
    # repaired nodes still match the drift exactly (upwind keeps the first moment)
    inner = bad.copy()
    inner[[0, -1]] = False
    assert np.max(np.abs(m1 - mu)[inner], initial=0.0) < 1e-12
    # the check reports the model's own drift, which is not r x
    defect = risk_neutral_drift_check(gen, spec.r)
    assert defect == pytest.approx(np.max(np.abs(mu[1:-1] - spec.r * x[1:-1])), rel=1e-9)


def test_zero_vol_interior_is_construction_error():
    grid = StateGrid(np.linspace(1, 2, 5))
    with pytest.raises(ConstructionError, match="node"):
        build_diffusion_generator(lambda x: x, lambda x: np.where(x > 1.5, 0.0, 0.2), grid)


def test_dejd_without_jumps_is_gbm():
    spec = DEJD(sigma=0.2, lam=0.0, p_up=0.4, eta1=10.0, eta2=5.0, r=0.03)
    grid = build_grid(spec, GridSpec(), 100.0, 1.0)
    jump = build_generator(spec, grid, spot=100.0)
    gbm = build_diffusion_generator(lambda x: 0.03 * x, lambda x: 0.2 * x, grid)
    assert np.max(np.abs(jump.q - gbm.q)) <= 1e-12 * np.max(np.abs(gbm.q))
    assert risk_neutral_drift_check(jump, 0.03) <= 1e-10 * 100


@pytest.mark.parametrize("spec", [DEJD_MODEL, MJD_MODEL, CGMY_MODEL], ids=["dejd", "mjd", "cgmy"])
def test_jump_generators_valid_and_risk_neutral(spec):
    grid = build_grid(spec, GridSpec(), 100.0, 1.0)
    gen = build_generator(spec, grid, spot=100.0)
    assert validate_generator(gen) == []
    assert risk_neutral_drift_check(gen, spec.r) < 1e-9 * 100


def test_dejd_far_rate_matches_on_grid_mass():
    grid = build_grid(DEJD_MODEL, GridSpec(), 100.0, 1.0)
    rates, _, overflow = jump_rates(DEJD_MODEL, grid)
    x = grid.states
    i = grid.index_of(100.0)
    edges = np.concatenate([[0.0], 0.5 * (x[1:] + x[:-1]), [x[-1] + 0.5 * (x[-1] - x[-2])]])
    with np.errstate(divide="ignore"):
        le = np.log(edges / x[i])
    # everything outside cells i-1..i+1 but inside the grid, plus the lumped overflow
    far = DEJD_MODEL.cell_mass(-np.inf, le[i - 1]) + DEJD_MODEL.cell_mass(le[i + 2], np.inf)
    assert rates[i].sum() == pytest.approx(far, rel=1e-10)
    assert overflow[i] < 1e-8 * DEJD_MODEL.lam


def test_mjd_row_against_quadrature():
    grid = build_grid(MJD_MODEL, GridSpec(), 100.0, 1.0)
    rates, _, _ = jump_rates(MJD_MODEL, grid)
    x = grid.states
    i = grid.index_of(100.0)
    edges = np.concatenate([[0.0], 0.5 * (x[1:] + x[:-1]), [x[-1] + 0.5 * (x[-1] - x[-2])]])
    with np.errstate(divide="ignore"):
        le = np.log(edges / x[i])
    for j in (0, 5, i - 3, i + 3, len(x) - 2):
        quad = cell_mass_quadrature(MJD_MODEL, le[j], le[j + 1])
        assert rates[i, j] == pytest.approx(quad, rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("spec", [DEJD_MODEL, MJD_MODEL, CGMY_MODEL], ids=["dejd", "mjd", "cgmy"])
@pytest.mark.parametrize("cell", [(-2.0, -0.5), (-0.3, -0.05), (0.05, 0.3), (0.5, 1.5)])
def test_cell_mass_closed_form_vs_quadrature(spec, cell):
    a, b = cell
    assert float(spec.cell_mass(a, b)) == pytest.approx(cell_mass_quadrature(spec, a, b), rel=1e-10, abs=1e-14)


def test_mass_check_rejects_short_grid():
    with pytest.raises(ConstructionError, match="widen"):
        build_generator(MJD_MODEL, make_grid(100.0, 1.0, 110.0, 50, 0.03), spot=100.0)


def test_grid_contains_spot_and_span():
    for spec in (DEJD_MODEL, cev(0.25)):
        g = build_grid(spec, GridSpec(), 100.0, 1.0)
        low, high = default_span(spec, 100.0, 1.0)
        assert g.states[0] == low and g.states[-1] == high
        assert g.index_of(100.0) >= 1
    with pytest.raises(ConstructionError):
        make_grid(100.0, 120.0, 200.0, 50, 0.03)


@given(st.floats(0.05, 0.6), st.floats(0.1, 3.0), st.floats(0.2, 2.0), st.integers(10, 80))
def test_cir_builds_are_valid(sigma, kappa, theta, n):
    spec = CIR(kappa=kappa, theta_bar=theta, sigma=sigma, r=0.01)
    gen = build_generator(spec, build_grid(spec, GridSpec(n_states=n), 1.0, 1.0))
    assert validate_generator(gen) == []


@given(st.floats(0.05, 0.4), st.floats(0.0, 2.0), st.floats(0.0, 1.0), st.floats(1.5, 30), st.floats(1.0, 30))
def test_dejd_builds_are_valid(sigma, lam, p, eta1, eta2):
    spec = DEJD(sigma=sigma, lam=lam, p_up=p, eta1=eta1, eta2=eta2, r=0.03)
    grid = build_grid(spec, GridSpec(), 100.0, 1.0)
    gen = build_generator(spec, grid, spot=100.0)
    assert validate_generator(gen) == []


@pytest.mark.parametrize("spec", [DEJD_MODEL, MJD_MODEL, CGMY_MODEL], ids=["dejd", "mjd", "cgmy"])
def test_refinement_moves_atm_price_little(spec):
    base = PricingRequest(spec, JUMP_MARKET, 100.0, 12)
    low, high = default_span(spec, 100.0, 1.0)
    fine = PricingRequest(spec, JUMP_MARKET, 100.0, 12, GridSpec(n_states=100, low=0.5 * low, high=1.5 * high))
    a, b = price_asian(base).price, price_asian(fine).price
    assert abs(a - b) / b < 2e-3
