import math
import time
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from asianctmc import oracles
from asianctmc.chain import Chain, Generator, StateGrid, transition_matrix
from asianctmc.errors import ArgumentError, ConstructionError
from asianctmc.models import GridSpec
from asianctmc.pricing import (
    CSV_COLUMNS, THREADS_ENV, Market, PricingRequest, TableRow, convergence_sweep, expected_integral,
    expected_sum_discrete, normalized_generator, price_asian, price_on_chain, price_table, table_csv,
    thread_count, timing_profile,
)
from asianctmc.reference import CGMY_MODEL, CIR_MARKET, CIR_STANDIN, DEJD_MODEL, JUMP_MARKET, MJD_MODEL, cev, CEV_MARKET

# published single-transform prices at N = 50
PUBLISHED = [
    (DEJD_MODEL, 90.0, 12, 12.70873),
    (MJD_MODEL, 100.0, 250, 5.05803),
    (CGMY_MODEL, 100.0, None, 5.08138),
]


@pytest.mark.parametrize("model,K,n,expected", PUBLISHED, ids=["dejd-n12-K90", "mjd-n250-K100", "cgmy-cont-K100"])
def test_published_jump_prices(model, K, n, expected):
    res = price_asian(PricingRequest(model, JUMP_MARKET, K, n))
    assert abs(res.price - expected) / expected < 0.01
    assert not res.flagged and res.n_states == 50


def test_request_invariants():
    with pytest.raises(ArgumentError):
        PricingRequest(MJD_MODEL, JUMP_MARKET, -1.0, 12)
    with pytest.raises(ArgumentError):
        PricingRequest(MJD_MODEL, JUMP_MARKET, 100.0, 0)
    with pytest.raises(ArgumentError):
        Market(100.0, 0.03, 0.0)
    with pytest.raises(ArgumentError):
        PricingRequest(MJD_MODEL, Market(100.0, 0.01, 1.0), 100.0, 12)
    with pytest.raises(ConstructionError):
        price_asian(PricingRequest(MJD_MODEL, JUMP_MARKET, 100.0, 12, GridSpec(low=120.0)))


def test_mean_correction_defaults():
    assert PricingRequest(CIR_STANDIN, CIR_MARKET, 1.0).corrects_mean
    assert not PricingRequest(MJD_MODEL, JUMP_MARKET, 100.0).corrects_mean
    assert not PricingRequest(CIR_STANDIN, CIR_MARKET, 1.0, mean_correction=False).corrects_mean


@pytest.mark.parametrize("n", [1, 12, 250])
def test_zero_strike_is_discounted_expected_average(n):
    req = PricingRequest(MJD_MODEL, JUMP_MARKET, 0.0, n)
    res = price_asian(req)
    assert res.strategy == "zero-strike"
    gen = normalized_generator(MJD_MODEL, GridSpec(), 100.0, 1.0)
    i0 = gen.grid.index_of(1.0)
    p = transition_matrix(gen, 1.0 / n)
    v, total = gen.x.copy(), gen.x[i0]
    for _ in range(n):
        v = p @ v
        total += v[i0]
    direct = math.exp(-JUMP_MARKET.r) / (n + 1) * total * 100.0
    assert abs(res.price - direct) <= 1e-10 * direct


def test_zero_strike_risk_neutral_mean():
    # for a risk-neutral chain the expected average is the forward average
    res = price_asian(PricingRequest(MJD_MODEL, JUMP_MARKET, 0.0, None))
    r = JUMP_MARKET.r
    assert res.price == pytest.approx(100.0 * math.exp(-r) * math.expm1(r) / r, rel=1e-3)


def test_expected_integral_matches_quadrature(rng):
    from scipy import integrate
    from asianctmc import linalg

    gen = oracles.random_generator(rng, 4)
    direct = [integrate.quad(lambda s: (linalg.expm(gen.q, s) @ gen.x)[i], 0, 1.5, epsabs=1e-13)[0] for i in range(4)]
    assert np.allclose(expected_integral(gen, 1.5), direct, atol=1e-11)


def test_price_on_chain_single_state_and_speed():
    gen = Generator(StateGrid(np.array([1.0])), np.zeros((1, 1)))
    t0 = time.perf_counter()
    res = price_on_chain(gen, 0, 0.0, 1.0, 0.5, 12)
    assert time.perf_counter() - t0 < 5e-3
    assert res.price == pytest.approx(0.5, abs=1e-8)
    prices = [price_on_chain(gen, 0, 0.0, 1.0, 0.5, n).price for n in (1, 12, 250)]
    prices.append(price_on_chain(gen, 0, 0.0, 1.0, 0.5, None).price)
    assert np.ptp(prices) < 1e-8
    with pytest.raises(ArgumentError):
        price_on_chain(gen, 1, 0.0, 1.0, 0.5, 12)


def test_uncorrected_cir_differs_from_corrected():
    req = PricingRequest(CIR_STANDIN, CIR_MARKET, 1.0, 12)
    a = price_asian(req)
    b = price_asian(replace(req, mean_correction=False))
    assert abs(a.price - b.price) == pytest.approx(abs(a.mean_defect), rel=1e-9)


def test_price_table_rows_and_errors():
    reqs = [PricingRequest(MJD_MODEL, JUMP_MARKET, k, 12) for k in (90.0, 100.0)]
    bad = PricingRequest(MJD_MODEL, JUMP_MARKET, 100.0, 12, GridSpec(low=150.0))
    rows = price_table(reqs + [bad], benchmarks=[None, 5.0, None])
    assert [r.status for r in rows[:2]] == ["ok", "ok"]
    assert rows[2].status.startswith("error") and rows[2].price is None
    assert rows[0].as_record()["rel_err_pct"] == "n/a"
    assert rows[1].as_record()["rel_err_pct"] != "n/a"
    with pytest.raises(ArgumentError):
        price_table([])


def test_csv_fixed_columns_and_determinism():
    reqs = [PricingRequest(DEJD_MODEL, JUMP_MARKET, k, n) for k in (90.0, 110.0) for n in (12, None)]
    a = table_csv(price_table(reqs), timing=False)
    b = table_csv(price_table(reqs, threads=2), timing=False)
    assert a == b
    assert a.splitlines()[0] == ",".join(CSV_COLUMNS)
    assert CSV_COLUMNS[:6] == ("K", "n", "benchmark", "price", "rel_err_pct", "seconds")
    assert a.splitlines()[2].split(",")[1] == "inf"


def test_thread_env(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert thread_count() == 3
    monkeypatch.setenv(THREADS_ENV, "zero")
    with pytest.raises(ArgumentError):
        thread_count()


def test_table_row_percentages():
    row = TableRow(100.0, 12, 5.0, 5.05, 0.01, reference=5.0)
    assert row.rel_err_pct == pytest.approx(1.0)
    assert row.ref_dev_pct == pytest.approx(1.0)


def test_timing_profile_shape():
    prof = timing_profile(PricingRequest(MJD_MODEL, JUMP_MARKET, 100.0, 12), repetitions=3)
    assert len(prof.samples) == 3 and prof.median > 0 and prof.median_cold >= prof.median * 0.5
    assert {"chain", "inversion", "build"} <= set(prof.breakdown)
    with pytest.raises(ArgumentError):
        timing_profile(PricingRequest(MJD_MODEL, JUMP_MARKET, 100.0, 12), repetitions=2)


def test_convergence_sweep_cir():
    res = convergence_sweep(PricingRequest(CIR_STANDIN, CIR_MARKET, 1.0, None), [12, 25, 50, 100, 250])
    assert res.monotone
    assert res.gaps[-1] < res.gaps[0]
    assert all(a > b for a, b in zip(res.gaps, res.gaps[1:]))
    with pytest.raises(ArgumentError):
        convergence_sweep(PricingRequest(CIR_STANDIN, CIR_MARKET, 1.0, None), [25, 12])


@pytest.mark.parametrize("model,market", [(CIR_STANDIN, CIR_MARKET), (cev(0.25), CEV_MARKET),
                                          (CGMY_MODEL, JUMP_MARKET)], ids=["cir", "cev", "cgmy"])
@pytest.mark.parametrize("n", [12, None])
def test_strike_monotone_and_bounds(model, market, n):
    S = market.spot
    ladder = S * np.linspace(0.7, 1.3, 13)
    res = [price_asian(PricingRequest(model, market, k, n)) for k in ladder]
    prices = np.array([r.price for r in res])
    assert np.all(np.diff(prices) <= 1e-9 * S)
    gen = normalized_generator(model, GridSpec(), S, market.T)
    i0 = gen.grid.index_of(1.0)
    disc = math.exp(-market.r * market.T)
    if n is None:
        avg = expected_integral(gen, market.T)[i0] / market.T * S
    else:
        avg = expected_sum_discrete(Chain(gen, market.T / n), n)[i0] / (n + 1) * S
    for k, r in zip(ladder, res):
        slack = max(r.error, 1e-4 * max(1.0, r.price))
        assert r.price >= disc * max(avg - k, 0.0) - slack
        assert r.price <= disc * gen.x.max() * S + slack


@given(st.integers(0, 2**32 - 1), st.floats(0.6, 1.4), st.booleans())
def test_enumeration_agreement_random(seed, moneyness, martingale):
    r = np.random.default_rng(seed)
    if martingale:
        gen, rate = oracles.random_martingale_generator(r, 4), 0.0
    else:
        gen, rate = oracles.random_generator(r, 4), float(r.uniform(-0.05, 0.1))
    K = float(gen.x[1] * moneyness)
    exact = oracles.enumerate_discrete_price(Chain(gen), rate, 1.0, 4, K, 1)
    from asianctmc.inversion import InversionConfig

    got = price_on_chain(gen, 1, rate, 1.0, K, 4, InversionConfig(series_terms=20000), mean_correction=not martingale)
    assert abs(got.price - exact) < 1e-6
