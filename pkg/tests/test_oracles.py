import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from asianctmc import oracles
from asianctmc.chain import Chain, Generator, StateGrid
from asianctmc.errors import ArgumentError, DomainError
from asianctmc.inversion import InversionConfig
from asianctmc.pricing import price_on_chain
from asianctmc.transforms import g_continuous_values, g_discrete_values


def _one(x1=1.2, delta=None):
    return Chain(Generator(StateGrid(np.array([x1])), np.zeros((1, 1))), delta)


def _two_state(lam, a, b):
    return Generator(StateGrid(np.array([a, b])), np.array([[-lam, lam], [lam, -lam]]))


def test_query_region_checks(rng):
    chain = Chain(oracles.random_generator(rng, 3), 0.5)
    with pytest.raises(DomainError):
        oracles.DoubleTransformQuery(theta=-1.0, z=0.1)
    with pytest.raises(ArgumentError):
        oracles.DoubleTransformQuery(theta=1.0)
    assert oracles.DoubleTransformQuery(1.0, z=0.1).check(chain, 0.02)
    with pytest.raises(DomainError):
        oracles.DoubleTransformQuery(1.0, z=1.5).check(chain, 0.02)
    with pytest.raises(DomainError):
        oracles.DoubleTransformQuery(1.0, mu=1e-3).check(chain, 0.02)


def test_L_discrete_at_zero_and_single_state():
    chain = _one(1.2, 0.25)
    th = 0.7 + 1j
    assert np.allclose(oracles.L_discrete(chain, 0.0, th, 0.0), g_discrete_values(chain, 0.0, 0, th)[:, 0], atol=1e-15)
    z = 0.4 - 0.2j
    a = np.exp(-th * 1.2)
    # sum_n z^n [a^{n+1}/th^2 - 1/th^2 + (n+1) x/th]
    exact = a / (1 - z * a) / th**2 - 1 / (th**2 * (1 - z)) + 1.2 / (th * (1 - z) ** 2)
    assert abs(oracles.L_discrete(chain, 0.0, th, z)[0] - exact) < 1e-13


def test_L_discrete_equals_power_series(rng):
    chain = Chain(oracles.random_generator(rng, 4), 0.3)
    th, z, r = 1.5 + 0.5j, 0.3 * np.exp(0.7j), 0.04
    series = sum(z**n * g_discrete_values(chain, r, n, th)[:, 0] for n in range(61))
    assert np.max(np.abs(series - oracles.L_discrete(chain, r, th, z))) < 1e-10


def test_z_coefficient_trivial_cases():
    chain = _one(0.9, 0.5)
    th = 1.1 - 0.3j
    for n in (0, 3, 8):
        assert abs(oracles.z_coefficient(chain, 0.0, th, n)[0] - g_discrete_values(chain, 0.0, n, th)[0, 0]) < 1e-11
    c = Chain(oracles.random_generator(np.random.default_rng(1), 3), 0.5)
    assert np.allclose(oracles.z_coefficient(c, 0.01, th, 0), oracles.L_discrete(c, 0.01, th, 0.0), atol=1e-11)
    with pytest.raises(ArgumentError):
        oracles.z_coefficient(c, 0.01, th, -1)


def test_L_continuous_single_state_and_asymptote(rng):
    chain = _one(1.2)
    th, mu = 0.8 + 0.4j, 3.0 + 1j
    m = 1 / (th * 1.2 + mu)
    exact = m / th**2 - 1 / (th**2 * mu) + 1.2 / (th * mu * (mu - 0.03))
    assert abs(oracles.L_continuous(chain, 0.03, th, mu)[0] - exact) < 1e-14
    big = Chain(oracles.random_generator(rng, 4))
    mu = 1e7
    assert np.max(np.abs(mu * oracles.resolvent_ones(big, th, mu) - 1)) < 1e-5
    with pytest.raises(DomainError):
        oracles.L_continuous(chain, 0.03, th, 0.03)


def test_L_continuous_is_laplace_transform_of_gc(rng):
    gen = oracles.random_generator(rng, 3)
    chain = Chain(gen)
    th, r = 1.0 + 0.5j, 0.02
    from asianctmc import linalg

    mu = 2 * linalg.inf_norm(gen.q - th * np.diag(gen.x))

    def part(i, fn):
        return integrate.quad(lambda t: math.exp(-mu * t) * fn(g_continuous_values(chain, r, t, th)[i, 0]),
                              0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=400)[0]

    L = oracles.L_continuous(chain, r, th, mu)
    for i in range(3):
        est = part(i, np.real) + 1j * part(i, np.imag)
        assert abs(est - L[i]) < 1e-8


def test_mu_invert_single_state_and_small_time(rng):
    chain = _one(1.2)
    th = 0.9 + 0.2j
    got = oracles.mu_invert(chain, 0.0, th, 0.6)[0]
    exact = np.exp(-th * 1.2 * 0.6) / th**2 - 1 / th**2 + 1.2 * 0.6 / th
    assert abs(got - exact) < 1e-8
    c = Chain(oracles.random_generator(rng, 4))
    assert np.max(np.abs(oracles.mu_invert(c, 0.01, th, 1e-4))) < 1e-7
    with pytest.raises(ArgumentError):
        oracles.mu_invert(c, 0.01, th, 0.0)


def test_neumann_partial_sums_approach_resolvent(rng):
    from asianctmc import linalg

    chain = Chain(oracles.random_generator(rng, 5))
    th = 1.2 + 0.3j
    mu = 1.6 * linalg.inf_norm(chain.q - th * np.diag(chain.x))
    sums = oracles.neumann_partial_sums(chain, th, mu, 150)
    res = np.max(np.abs(sums - oracles.resolvent_ones(chain, th, mu)[None, :]), axis=1)
    assert np.all(np.diff(res) <= 1e-15)
    assert res[-1] < 1e-12


def test_enumeration_trivial_cases(rng):
    gen = oracles.random_generator(rng, 3)
    x = gen.x
    assert oracles.enumerate_discrete_price(Chain(gen), 0.05, 1.0, 0, 0.9 * x[1], 1) == pytest.approx(
        math.exp(-0.05) * 0.1 * x[1], rel=1e-14)
    one = _one(1.2)
    for n in (1, 5):
        assert oracles.enumerate_discrete_price(one, 0.05, 2.0, n, 1.0, 0) == pytest.approx(math.exp(-0.1) * 0.2)
    with pytest.raises(ArgumentError):
        oracles.enumerate_discrete_price(Chain(oracles.random_generator(rng, 10)), 0.0, 1.0, 8, 1.0, 0)


def test_enumeration_matches_pipeline_example(rng):
    gen = oracles.random_martingale_generator(rng, 4)
    exact = oracles.enumerate_discrete_price(Chain(gen), 0.0, 1.0, 4, gen.x[1], 1)
    got = price_on_chain(gen, 1, 0.0, 1.0, gen.x[1], 4, InversionConfig(series_terms=20000)).price
    assert abs(got - exact) < 1e-6


def test_martingale_generator_has_zero_drift(rng):
    gen = oracles.random_martingale_generator(rng, 6)
    assert np.max(np.abs(gen.q @ gen.x)) < 1e-13
    assert np.all(gen.q[[0, -1]] == 0)


def test_mc_single_state_is_exact():
    price, se = oracles.mc_continuous_price(_one(1.2), 0.05, 2.0, 1.0, 0, oracles.McConfig(paths=1000))
    assert price == pytest.approx(math.exp(-0.1) * 0.2, rel=1e-14)
    assert se == 0.0


def test_mc_two_state_occupation():
    lam, a, b, T = 1.5, 0.8, 1.3, 1.0
    gen = _two_state(lam, a, b)
    mean_area = 0.5 * (a + b) * T + 0.5 * (a - b) * (1 - math.exp(-2 * lam * T)) / (2 * lam)
    price, se = oracles.mc_continuous_price(Chain(gen), 0.0, T, 0.0, 0, oracles.McConfig(paths=40_000, seed=3))
    assert abs(price - mean_area / T) < 3 * se


def test_mc_reproducible_and_validated():
    gen = _two_state(2.0, 0.9, 1.1)
    cfg = oracles.McConfig(paths=5000, seed=11)
    assert oracles.mc_continuous_price(Chain(gen), 0.0, 1.0, 1.0, 0, cfg) == oracles.mc_continuous_price(
        Chain(gen), 0.0, 1.0, 1.0, 0, cfg)
    with pytest.raises(ArgumentError):
        oracles.mc_continuous_price(Chain(gen), 0.0, 1.0, 1.0, 0, oracles.McConfig(paths=50))
    with pytest.raises(ArgumentError):
        oracles.McConfig(paths=0)


def test_simulated_area_bounds(rng):
    gen = oracles.random_generator(rng, 5)
    area = oracles.simulate_integral(gen, 2.0, 2, 2000, np.random.Generator(np.random.Philox(5)))
    assert np.all(area >= 2.0 * gen.x.min() - 1e-12) and np.all(area <= 2.0 * gen.x.max() + 1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(0, 8))
def test_z_coefficient_matches_discrete_transform(seed, n_states, n):
    r = np.random.default_rng(seed)
    chain = Chain(oracles.random_generator(r, n_states), float(r.uniform(0.05, 1)))
    th = complex(r.uniform(0.2, 3), r.uniform(-5, 5))
    rate = float(r.uniform(-0.05, 0.1))
    got = oracles.z_coefficient(chain, rate, th, n)
    assert np.max(np.abs(got - g_discrete_values(chain, rate, n, th)[:, 0])) < 1e-9


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.sampled_from([0.25, 1.0, 4.0]))
def test_mu_invert_matches_continuous_transform(seed, n_states, t):
    r = np.random.default_rng(seed)
    chain = Chain(oracles.random_generator(r, n_states))
    th = complex(r.uniform(0.2, 3), r.uniform(-5, 5))
    rate = float(r.uniform(-0.05, 0.1))
    got = oracles.mu_invert(chain, rate, th, t)
    assert np.max(np.abs(got - g_continuous_values(chain, rate, t, th)[:, 0])) < 1e-6
