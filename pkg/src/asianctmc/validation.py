"""Seeded property suite behind ``asianctmc validate``.

Every property returns an :class:`Outcome`. A failing outcome carries the
seed and a serialized chain (when one is involved) so the instance can be
replayed with ``Chain.from_json``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import linalg, oracles
from .chain import Chain, Generator, StateGrid, transition_matrix, validate_generator
from .errors import ArgumentError, ConstructionError, DomainError, NumericError
from .inversion import InversionConfig, invert_laplace
from .models import (
    CEV, CIR, DEJD, GridSpec, build_diffusion_generator, build_generator, build_grid,
    cell_mass_quadrature, default_span, repaired_nodes, risk_neutral_drift_check,
)
from .pricing import (
    Market, PricingRequest, expected_sum_discrete, normalized_generator, price_asian, price_on_chain,
)
from .transforms import (
    _discrete_power_term, continuous_exp_term, g_discrete_values, geometric_factor,
)

DEFAULT_SEED = 20240501
ENUMERATION_SERIES_TERMS = 20000


@dataclass(frozen=True)
class ValidateConfig:
    seed: int = DEFAULT_SEED
    cases: int = 100
    mc_paths: int = 200_000
    enumeration_cases: int = 50
    extra_generators: tuple = ()   # (label, Generator) pairs checked by the generator property

    def __post_init__(self):
        if self.cases < 1 or self.enumeration_cases < 1:
            raise ArgumentError("case counts must be >= 1")
        if self.mc_paths < 100:
            raise ArgumentError(f"mc_paths must be >= 100, got {self.mc_paths}")


@dataclass
class Outcome:
    name: str
    passed: bool
    worst: float
    tolerance: float
    detail: str = ""
    seconds: float = 0.0
    seed: Optional[int] = None
    instance: Optional[str] = None

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name:<34} worst={self.worst:.3g} tol={self.tolerance:.3g}  {self.detail}".rstrip()


class _Tracker:
    """Keeps the worst value seen and the instance that produced it."""

    def __init__(self, name: str, tol: float):
        self.name, self.tol = name, tol
        self.worst = 0.0
        self.seed = None
        self.chain = None
        self.note = ""

    def see(self, value: float, seed=None, chain: Optional[Chain] = None, note: str = ""):
        value = float(value)
        if not np.isfinite(value):
            value = math.inf
        if value > self.worst:
            self.worst, self.seed, self.chain, self.note = value, seed, chain, note

    def done(self, detail: str = "") -> Outcome:
        ok = self.worst <= self.tol
        if ok:
            return Outcome(self.name, True, self.worst, self.tol, detail)
        text = " ".join(s for s in (detail, f"worst at: {self.note}" if self.note else "") if s)
        inst = self.chain.to_json() if self.chain is not None else None
        return Outcome(self.name, False, self.worst, self.tol, text, seed=self.seed, instance=inst)


def _rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(1e-300, float(np.max(np.abs(b)))))


# --- benchmark instances ---------------------------------------------------------

def benchmark_cases():
    """One (label, model, market) per model family, at the table parameters."""
    from . import reference as ref

    return [
        ("cir", ref.CIR_STANDIN, ref.CIR_MARKET),
        ("cev", ref.cev(0.25), ref.CEV_MARKET),
        ("dejd", ref.DEJD_MODEL, ref.JUMP_MARKET),
        ("mjd", ref.MJD_MODEL, ref.JUMP_MARKET),
        ("cgmy", ref.CGMY_MODEL, ref.JUMP_MARKET),
    ]


def _bench_gen(model, market, n_states=50) -> Generator:
    return normalized_generator(model, GridSpec(n_states=n_states), market.spot, market.T)


# --- linalg ------------------------------------------------------------------------------

def prop_chapman_kolmogorov(cfg: ValidateConfig) -> Outcome:
    tr = _Tracker("linalg.chapman_kolmogorov", 1e-9)
    for k in range(cfg.cases):
        rng = np.random.default_rng([cfg.seed, 1, k])
        gen = oracles.random_generator(rng, int(rng.integers(2, 21)), rate_scale=float(rng.uniform(0.1, 5)))
        s, t = rng.uniform(0, 2, 2)
        lhs = linalg.expm(gen.q, s + t)
        rhs = linalg.expm(gen.q, s) @ linalg.expm(gen.q, t)
        tr.see(linalg.max_norm(lhs - rhs), k, Chain(gen))
    return tr.done()


def prop_stochastic(cfg: ValidateConfig) -> Outcome:
    tr = _Tracker("linalg.row_sums_preserved", 1e-10)
    for k in range(cfg.cases):
        rng = np.random.default_rng([cfg.seed, 2, k])
        gen = oracles.random_generator(rng, int(rng.integers(2, 31)), rate_scale=float(rng.uniform(0.1, 10)))
        p = linalg.expm(gen.q, float(rng.uniform(0, 3)))
        tr.see(np.max(np.abs(p.sum(axis=1) - 1.0)), k, Chain(gen))
    for label, model, market in benchmark_cases():
        gen = _bench_gen(model, market)
        p = linalg.expm(gen.q, market.T / 12)
        tr.see(np.max(np.abs(p.sum(axis=1) - 1.0)), label, Chain(gen))
    return tr.done()


def prop_expm_action(cfg: ValidateConfig) -> Outcome:
    tr = _Tracker("linalg.expm_action_vs_expm", 1e-10)
    for k in range(min(cfg.cases, 40)):
        rng = np.random.default_rng([cfg.seed, 3, k])
        n = int(rng.integers(1, 51))
        m = rng.normal(size=(n, n)) * rng.uniform(0.1, 3)
        if k % 2:
            m = m + 1j * rng.normal(size=(n, n))
        v = rng.normal(size=n)
        t = float(rng.uniform(0, 2))
        tr.see(_rel(linalg.expm_action(m, t, v), linalg.expm(m, t) @ v), k)
    return tr.done()


def prop_neumann_inverse(cfg: ValidateConfig) -> Outcome:
    """Residual ||I - a S_m|| = ||(I - a)^{m+1}|| must shrink at every step."""
    tr = _Tracker("linalg.neumann_monotone", 0.0)
    for k in range(min(cfg.cases, 40)):
        rng = np.random.default_rng([cfg.seed, 4, k])
        n = int(rng.integers(1, 15))
        e = rng.normal(size=(n, n))
        e *= rng.uniform(0.2, 0.9) / linalg.inf_norm(e)
        a = np.eye(n) - e
        inv = linalg.mat_inverse(a)
        res = [linalg.inf_norm(np.eye(n) - a @ linalg.neumann_inverse_check(a, m)) for m in range(60)]
        rises = max(0.0, max(b - a_ for a_, b in zip(res, res[1:])) - 1e-13)
        err = linalg.max_norm(linalg.neumann_inverse_check(a, 400) - inv) / max(1.0, linalg.max_norm(inv))
        tr.see(rises + (err if err > 1e-10 else 0.0), k)
    return tr.done("(rise in residual, plus limit error above 1e-10)")


# --- chain / models ---------------------------------------------------------------------------

def prop_semigroup(cfg: ValidateConfig) -> Outcome:
    tr = _Tracker("chain.transition_semigroup", 1e-9)
    for label, model, market in benchmark_cases():
        gen = _bench_gen(model, market)
        s, t = market.T / 12, market.T / 7
        lhs = transition_matrix(gen, s) @ transition_matrix(gen, t)
        tr.see(linalg.max_norm(lhs - transition_matrix(gen, s + t)), label, Chain(gen))
    return tr.done()


def model_builds():
    """Every (label, model, market, GridSpec) the suite builds generators for."""
    from . import reference as ref

    out = []
    for label, model, market in benchmark_cases():
        for n in (25, 50, 100):
            out.append((f"{label}/N={n}", model, market, GridSpec(n_states=n)))
    for beta in (-0.5, -0.25, 0.0, 0.25, 0.5):
        out.append((f"cev(beta={beta})/N=50", ref.cev(beta), ref.CEV_MARKET, GridSpec()))
    for block in ref.TABLES[3].blocks:
        out.append((f"table3:{block.label}", block.model, block.market, GridSpec()))
    out.append(("cir/absorbing", ref.CIR_STANDIN, ref.CIR_MARKET, GridSpec(boundary="absorbing")))
    return out


def prop_generators_valid(cfg: ValidateConfig) -> Outcome:
    tr = _Tracker("models.generators_valid", 0.0)
    builds = 0
    for label, model, market, grid in model_builds():
        states = build_grid(model, grid, market.spot, market.T)
        gen = build_generator(model, states, grid.boundary, grid.mass_tol, market.spot)
        builds += 1
        problems = validate_generator(gen)
        tr.see(len(problems), label, Chain(gen), f"{label}: {problems[0]}" if problems else "")
    for label, gen in cfg.extra_generators:
        builds += 1
        problems = validate_generator(gen)
        tr.see(len(problems), label, Chain(gen), f"{label}: {problems[0]}" if problems else "")
    return tr.done(f"({builds} builds, worst = violation count)")


def prop_diffusion_identities(cfg: ValidateConfig) -> Outcome:
    """Drift and variance matched at interior nodes that needed no upwind repair."""
    from . import reference as ref

    tr = _Tracker("models.diffusion_moments", 1e-12)
    cases = [("cir", ref.CIR_STANDIN, ref.CIR_MARKET)] + [
        (f"cev({b})", ref.cev(b), ref.CEV_MARKET) for b in (-0.5, 0.0, 0.5)
    ]
    repaired = 0
    for label, model, market in cases:
        states = build_grid(model, GridSpec(), market.spot, market.T)
        x = states.states
        if isinstance(model, CIR):
            mu = model.kappa * (model.theta_bar - x)
            var = model.sigma**2 * x
        else:
            mu = model.r * x
            var = model.sigma**2 * x ** (2 * model.beta + 2)
        gen = build_diffusion_generator(lambda _: mu, lambda _: np.sqrt(var), states)
        mask = ~repaired_nodes(x, mu, var)
        mask[[0, -1]] = False
        repaired += int(np.sum(repaired_nodes(x, mu, var)))
        d = x[None, :] - x[:, None]
        m1 = (gen.q * d).sum(axis=1)
        m2 = (gen.q * d**2).sum(axis=1)
        tr.see(np.max(np.abs(m1 - mu)[mask] / np.maximum(1.0, np.abs(mu[mask]))), label, Chain(gen), f"{label} drift")
        tr.see(np.max(np.abs(m2 - var)[mask] / np.maximum(1.0, var[mask])), label, Chain(gen), f"{label} variance")
    for label, model, market in benchmark_cases()[2:]:
        gen = build_generator(model, build_grid(model, GridSpec(), market.spot, market.T), spot=market.spot)
        tr.see(risk_neutral_drift_check(gen, model.r) / market.spot, label, Chain(gen), f"{label} drift")
    return tr.done(f"({repaired} repaired nodes excluded)")


def prop_dejd_no_jumps(cfg: ValidateConfig) -> Outcome:
    tr = _Tracker("models.dejd_zero_intensity_is_gbm", 1e-12)
    spec = DEJD(sigma=0.2, lam=0.0, p_up=0.4, eta1=10.0, eta2=5.0, r=0.03)
    states = build_grid(spec, GridSpec(), 100.0, 1.0)
    jump = build_generator(spec, states, spot=100.0)
    gbm = build_diffusion_generator(lambda x: 0.03 * x, lambda x: 0.2 * x, states)
    tr.see(linalg.max_norm(jump.q - gbm.q) / linalg.max_norm(gbm.q), None, Chain(jump))
    return tr.done()


def prop_jump_convergence(cfg: ValidateConfig) -> Outcome:
    """Doubling N and widening the span moves the n=12 ATM price by < 0.2%."""
    tr = _Tracker("models.grid_refinement_atm", 2e-3)
    parts = []
    for label, model, market in benchmark_cases():
        base = PricingRequest(model, market, market.spot, 12)
        low, high = default_span(model, market.spot, market.T)
        fine = replace(base, grid=GridSpec(n_states=100, low=0.5 * low, high=1.5 * high))
        a, b = price_asian(base).price, price_asian(fine).price
        rel = abs(b - a) / b
        parts.append(f"{label}={100 * rel:.3f}%")
        tr.see(rel, label, None, label)
    return tr.done(" ".join(parts))


def prop_cell_mass(cfg: ValidateConfig) -> Outcome:
    tr = _Tracker("models.cell_mass_vs_quadrature", 1e-10)
    cells = [(-3.0, -1.0), (-0.5, -0.1), (-0.1, -0.02), (0.02, 0.1), (0.1, 0.5), (0.7, 2.0)]
    for label, model, _ in benchmark_cases()[2:]:
        for a, b in cells:
            exact = float(model.cell_mass(a, b))
            quad = cell_mass_quadrature(model, a, b)
            tr.see(abs(exact - quad) / max(1.0, abs(quad)), label, None, f"{label} cell ({a}, {b})")
    return tr.done()


# --- transforms ---------------------------------------------------------------------------------

def prop_backward_forward(cfg: ValidateConfig) -> Outcome:
    tr = _Tracker("transforms.backward_vs_forward", 1e-12)
    for k in range(min(cfg.cases, 20)):
        rng = np.random.default_rng([cfg.seed, 5, k])
        gen = oracles.random_generator(rng, 10, rate_scale=float(rng.uniform(0.2, 3)))
        chain = Chain(gen, 1.0 / 25)
        th = rng.uniform(0.1, 5) + 1j * rng.uniform(-20, 20, 4)
        bw = g_discrete_values(chain, 0.03, 25, th, "backward")
        fw = g_discrete_values(chain, 0.03, 25, th, "forward")
        # the matrix-power term can be far below the other terms of g_d, so it is compared on its own too
        pb = _discrete_power_term(chain.p_delta, chain.x, 25, th, "backward")
        pf = _discrete_power_term(chain.p_delta, chain.x, 25, th, "forward")
        tr.see(max(_rel(bw, fw), _rel(pb, pf)), k, chain)
    return tr.done("(N=10, n=25; g_d and its matrix-power term)")


def prop_expm_strategies(cfg: ValidateConfig) -> Outcome:
    tr = _Tracker("transforms.expm_vs_expm_action", 1e-10)
    for k in range(min(cfg.cases, 20)):
        rng = np.random.default_rng([cfg.seed, 5, k])
        gen = oracles.random_generator(rng, 10, rate_scale=float(rng.uniform(0.2, 3)))
        th = rng.uniform(0.1, 5) + 1j * rng.uniform(-20, 20, 4)
        a = continuous_exp_term(Chain(gen), 1.0, th, "expm")
        b = continuous_exp_term(Chain(gen), 1.0, th, "expm-action")
        tr.see(_rel(a, b), k, Chain(gen))
    for label, model, market in benchmark_cases():
        gen = _bench_gen(model, market)
        th = np.array([2.0 + 5j, 10.0 - 40j])
        a = continuous_exp_term(Chain(gen), market.T, th, "expm")
        b = continuous_exp_term(Chain(gen), market.T, th, "expm-action")
        tr.see(_rel(a, b), label, Chain(gen), label)
    return tr.done()


def prop_row_bounds(cfg: ValidateConfig) -> Outcome:
    """Real theta: (e^{-theta D} P)^n e^{-theta D} 1 lies in (0, e^{-theta (n+1) min x}]
    and decays in theta."""
    tr = _Tracker("transforms.first_term_bounds", 0.0)
    for k in range(min(cfg.cases, 30)):
        rng = np.random.default_rng([cfg.seed, 6, k])
        gen = oracles.random_generator(rng, int(rng.integers(2, 9)))
        n = int(rng.integers(0, 20))
        chain = Chain(gen, 1.0 / max(n, 1))
        th = np.sort(rng.uniform(0.05, 8, 6))
        v = _discrete_power_term(chain.p_delta, chain.x, n, th.astype(complex), "backward").real
        cap = np.exp(-th * (n + 1) * chain.x.min())
        over = np.max(v - cap[None, :]) / cap.max()
        bad = float(max(0.0, over - 1e-12)) + float(np.sum(v <= 0))
        bad += float(np.sum(np.diff(v, axis=1) > 1e-15))
        tr.see(bad, k, chain)
    return tr.done()


def prop_geometric_factor(cfg: ValidateConfig) -> Outcome:
    tr = _Tracker("transforms.geometric_factor", 1e-12)
    rng = np.random.default_rng([cfg.seed, 7])
    for _ in range(200):
        n = int(rng.integers(0, 300))
        rd = float(rng.choice([-1, 1]) * 10 ** rng.uniform(-10, -1))
        direct = math.fsum(math.exp(j * rd) for j in range(n + 1))
        tr.see(abs(geometric_factor(n, rd) - direct) / direct, None, None, f"n={n} r*delta={rd:.3g}")
    return tr.done()


# --- inversion ------------------------------------------------------------------------------

def _ramp(c):
    return lambda s: c / s - 1 / s**2 + np.exp(-c * s) / s**2


# (name, transform, k, f(k)); the ramp (c-k)+ is sampled at k = c/2 and c/4
CLOSED_FORM_POINTS = tuple(
    [(f"k at {k}", lambda s: 1 / s**2, k, k) for k in (0.5, 1.0, 4.0, 10.0)]
    + [(f"1-exp(-k) at {k}", lambda s: 1 / (s * (s + 1)), k, -math.expm1(-k)) for k in (0.5, 2.0, 10.0)]
    + [(f"exp(-{c}k) at 1", (lambda c: lambda s: 1 / (s + c))(c), 1.0, math.exp(-c)) for c in (0.5, 2.0)]
    + [(f"({c}-k)+ at {k}", _ramp(c), k, c - k) for c in (1.0, 3.0, 10.0) for k in (c / 2, c / 4)]
)
KINK_OFFSETS = (0.8, 0.9, 0.97, 1.03, 1.1, 1.5, 2.0)


def prop_closed_form_pairs(cfg: ValidateConfig) -> Outcome:
    tr = _Tracker("inversion.closed_form_pairs", 1e-8)
    for name, fhat, k, exact in CLOSED_FORM_POINTS:
        tr.see(abs(invert_laplace(fhat, k).value - exact), None, None, name)
    # N=1, r=0, x=1, t=1: the continuous transform of (1-k)+
    one = Chain(Generator(StateGrid(np.array([1.0])), np.zeros((1, 1))))
    from .transforms import g_continuous_values

    v = invert_laplace(lambda th: g_continuous_values(one, 0.0, 1.0, th)[0, 0], 0.5).value
    tr.see(abs(v - 0.5), None, one, "one-state chain at k=0.5")
    return tr.done()


def kink_profile(c: float = 1.0, cfg: InversionConfig = InversionConfig()):
    """Absolute inversion error of (c-k)+ at k = c * offset, near the kink."""
    import warnings

    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for off in KINK_OFFSETS:
            k = c * off
            out.append((off, abs(invert_laplace(_ramp(c), k, cfg).value - max(c - k, 0.0))))
    return out


def _inversion_sensitivity(name: str, other: InversionConfig, tol: float) -> Outcome:
    tr = _Tracker(name, tol)
    for label, model, market in benchmark_cases():
        for n in (12, 250, None):
            for m in (0.9, 1.0, 1.1):
                base = PricingRequest(model, market, m * market.spot, n)
                a = price_asian(base).price
                b = price_asian(replace(base, inversion=other)).price
                tr.see(abs(a - b) / a, label, None, f"{label} n={n} K={m * market.spot:g}")
    return tr.done("(relative change in price)")


def prop_series_stability(cfg: ValidateConfig) -> Outcome:
    return _inversion_sensitivity("inversion.series_terms_15_vs_30", InversionConfig(series_terms=15), 1e-6)


def prop_aliasing_stability(cfg: ValidateConfig) -> Outcome:
    return _inversion_sensitivity("inversion.a_param_18.4_vs_23", InversionConfig(a_param=18.4), 1e-6)


# --- oracles ------------------------------------------------------------------------------

def _random_chain_case(cfg, k):
    rng = np.random.default_rng([cfg.seed, 8, k])
    gen = oracles.random_generator(rng, int(rng.integers(1, 7)), rate_scale=float(rng.uniform(0.2, 3)))
    r = float(rng.uniform(-0.05, 0.1))
    theta = complex(rng.uniform(0.2, 3), rng.uniform(-5, 5))
    return rng, gen, r, theta


def prop_z_coefficient(cfg: ValidateConfig) -> Outcome:
    tr = _Tracker("oracles.z_coefficient", 1e-9)
    for k in range(cfg.cases):
        rng, gen, r, theta = _random_chain_case(cfg, k)
        chain = Chain(gen, float(rng.uniform(0.05, 1)))
        for n in range(9):
            est = oracles.z_coefficient(chain, r, theta, n)
            direct = g_discrete_values(chain, r, n, theta)[:, 0]
            tr.see(np.max(np.abs(est - direct)), k, chain, f"n={n} r={r:.4g} theta={theta:.4g}")
    return tr.done()


def prop_mu_inversion(cfg: ValidateConfig) -> Outcome:
    from .transforms import g_continuous_values

    tr = _Tracker("oracles.mu_invert", 1e-6)
    for k in range(cfg.cases):
        _, gen, r, theta = _random_chain_case(cfg, k)
        chain = Chain(gen)
        for t in (0.25, 1.0, 4.0):
            est = oracles.mu_invert(chain, r, theta, t)
            direct = g_continuous_values(chain, r, t, theta)[:, 0]
            tr.see(np.max(np.abs(est - direct)), k, chain, f"t={t} r={r:.4g} theta={theta:.4g}")
    return tr.done()


def prop_neumann_resolvent(cfg: ValidateConfig) -> Outcome:
    tr = _Tracker("oracles.neumann_resolvent", 0.0)
    for k in range(min(cfg.cases, 40)):
        _, gen, _, theta = _random_chain_case(cfg, k)
        chain = Chain(gen)
        norm = linalg.inf_norm(chain.q - theta * np.diag(chain.x))
        mu = 1.5 * norm * np.exp(1j * 0.3 * k) + 1e-3
        exact = oracles.resolvent_ones(chain, theta, mu)
        sums = oracles.neumann_partial_sums(chain, theta, mu, 120)
        res = np.max(np.abs(sums - exact[None, :]), axis=1)
        rises = float(max(0.0, np.max(np.diff(res)) - 1e-13)) if res.size > 1 else 0.0
        tr.see(rises + (res[-1] if res[-1] > 1e-10 else 0.0), k, chain)
    return tr.done("(rise in residual, plus final residual above 1e-10)")


def prop_enumeration(cfg: ValidateConfig) -> Outcome:
    """Pipeline vs exhaustive path sums on 4-state chains with n = 4.

    General random chains are not risk-neutral, so they are priced with the
    mean correction; martingale chains (G x = 0, r = 0) use the plain formula.
    """
    tr = _Tracker("oracles.enumeration", 1e-6)
    inv = InversionConfig(series_terms=ENUMERATION_SERIES_TERMS)
    for k in range(cfg.enumeration_cases):
        rng = np.random.default_rng([cfg.seed, 9, k])
        martingale = bool(k % 2)
        if martingale:
            gen, r = oracles.random_martingale_generator(rng, 4), 0.0
        else:
            gen, r = oracles.random_generator(rng, 4), float(rng.uniform(-0.05, 0.1))
        start = int(rng.integers(1, 3))
        T = float(rng.uniform(0.25, 2))
        K = float(gen.x[start] * rng.uniform(0.7, 1.3))
        exact = oracles.enumerate_discrete_price(Chain(gen), r, T, 4, K, start)
        got = price_on_chain(gen, start, r, T, K, 4, inv, mean_correction=not martingale).price
        tr.see(abs(got - exact), k, Chain(gen, T / 4), f"K={K:.4g} start={start} T={T:.4g} r={r:.4g}")
    return tr.done(f"(series_terms={ENUMERATION_SERIES_TERMS})")


def mc_check(label, model, market, paths: int, seed: int, strike_ratio: float = 1.0):
    """(pipeline price, MC price, MC standard error) for a benchmark chain."""
    gen = _bench_gen(model, market)
    req = PricingRequest(model, market, strike_ratio * market.spot, None)
    price = price_asian(req).price
    i0 = gen.grid.index_of(1.0)
    mc, se = oracles.mc_continuous_price(Chain(gen), market.r, market.T, strike_ratio, i0,
                                         oracles.McConfig(paths=paths, seed=seed))
    return price, market.spot * mc, market.spot * se


def prop_monte_carlo(cfg: ValidateConfig) -> Outcome:
    tr = _Tracker("oracles.monte_carlo_3se", 3.0)
    parts = []
    for j, (label, model, market) in enumerate(benchmark_cases()):
        price, mc, se = mc_check(label, model, market, cfg.mc_paths, cfg.seed + j)
        z = abs(price - mc) / se if se > 0 else (0.0 if price == mc else math.inf)
        parts.append(f"{label}={z:.2f}")
        tr.see(z, cfg.seed + j, Chain(_bench_gen(model, market)), f"{label}: {price:.6g} vs {mc:.6g} +- {se:.2g}")
    return tr.done(f"(|z| per chain: {' '.join(parts)}; {cfg.mc_paths} paths)")


# --- pricing ---------------------------------------------------------------------------------

def prop_strike_monotone(cfg: ValidateConfig) -> Outcome:
    tr = _Tracker("pricing.strike_monotone", 0.0)
    ladder = np.linspace(0.8, 1.2, 9)
    for label, model, market in benchmark_cases():
        for n in (12, None):
            prices = [price_asian(PricingRequest(model, market, m * market.spot, n)).price for m in ladder]
            rise = max(0.0, float(np.max(np.diff(prices))) - 1e-9 * market.spot)
            tr.see(rise, label, None, f"{label} n={n}")
    return tr.done()


def prop_zero_strike(cfg: ValidateConfig) -> Outcome:
    tr = _Tracker("pricing.zero_strike_identity", 1e-10)
    for label, model, market in benchmark_cases():
        gen = _bench_gen(model, market)
        i0 = gen.grid.index_of(1.0)
        for n in (1, 12, 250):
            p = transition_matrix(gen, market.T / n)
            v, total = gen.x.copy(), gen.x[i0]
            for _ in range(n):
                v = p @ v
                total += v[i0]
            direct = math.exp(-market.r * market.T) / (n + 1) * total * market.spot
            got = price_asian(PricingRequest(model, market, 0.0, n)).price
            tr.see(abs(got - direct) / direct, label, None, f"{label} n={n}")
    return tr.done()


def prop_payoff_bounds(cfg: ValidateConfig) -> Outcome:
    """e^{-rT}(E[avg] - K)+ <= price <= e^{-rT} max state, within the inversion cap."""
    tr = _Tracker("pricing.payoff_bounds", 0.0)
    for label, model, market in benchmark_cases():
        gen = _bench_gen(model, market)
        i0 = gen.grid.index_of(1.0)
        disc = math.exp(-market.r * market.T)
        for n in (12, 250):
            chain = Chain(gen, market.T / n)
            avg = expected_sum_discrete(chain, n)[i0] / (n + 1) * market.spot
            for m in (0.8, 1.0, 1.2):
                K = m * market.spot
                res = price_asian(PricingRequest(model, market, K, n))
                slack = max(res.error, 1e-4 * max(1.0, res.price))
                lo = disc * max(avg - K, 0.0)
                hi = disc * gen.x.max() * market.spot
                tr.see(max(0.0, lo - res.price - slack) + max(0.0, res.price - hi - slack), label, None,
                       f"{label} n={n} K={K:g}")
    return tr.done()


# --- runner ----------------------------------------------------------------------------------

PROPERTIES: tuple[tuple[str, Callable[[ValidateConfig], Outcome]], ...] = (
    ("linalg.chapman_kolmogorov", prop_chapman_kolmogorov),
    ("linalg.row_sums_preserved", prop_stochastic),
    ("linalg.expm_action_vs_expm", prop_expm_action),
    ("linalg.neumann_monotone", prop_neumann_inverse),
    ("chain.transition_semigroup", prop_semigroup),
    ("models.generators_valid", prop_generators_valid),
    ("models.diffusion_moments", prop_diffusion_identities),
    ("models.dejd_zero_intensity_is_gbm", prop_dejd_no_jumps),
    ("models.grid_refinement_atm", prop_jump_convergence),
    ("models.cell_mass_vs_quadrature", prop_cell_mass),
    ("transforms.backward_vs_forward", prop_backward_forward),
    ("transforms.expm_vs_expm_action", prop_expm_strategies),
    ("transforms.first_term_bounds", prop_row_bounds),
    ("transforms.geometric_factor", prop_geometric_factor),
    ("inversion.closed_form_pairs", prop_closed_form_pairs),
    ("inversion.series_terms_15_vs_30", prop_series_stability),
    ("inversion.a_param_18.4_vs_23", prop_aliasing_stability),
    ("oracles.z_coefficient", prop_z_coefficient),
    ("oracles.mu_invert", prop_mu_inversion),
    ("oracles.neumann_resolvent", prop_neumann_resolvent),
    ("oracles.enumeration", prop_enumeration),
    ("oracles.monte_carlo_3se", prop_monte_carlo),
    ("pricing.strike_monotone", prop_strike_monotone),
    ("pricing.zero_strike_identity", prop_zero_strike),
    ("pricing.payoff_bounds", prop_payoff_bounds),
)


def run(cfg: ValidateConfig = ValidateConfig(), only=None, progress: Optional[Callable[[Outcome], None]] = None):
    """Run the suite (or the properties whose names start with an entry of
    ``only``). Exceptions inside a property count as a failure of it."""
    results = []
    for name, fn in PROPERTIES:
        if only and not any(name.startswith(o) for o in only):
            continue
        t0 = time.perf_counter()
        try:
            out = fn(cfg)
        except (ArgumentError, ConstructionError, DomainError, NumericError, ValueError, ArithmeticError) as exc:
            out = Outcome(name, False, math.inf, 0.0, f"raised {type(exc).__name__}: {exc}")
        out.seconds = time.perf_counter() - t0
        results.append(out)
        if progress is not None:
            progress(out)
    return results


def report_csv(results) -> str:
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["property", "status", "worst", "tolerance", "seed", "detail"])
    for o in results:
        w.writerow([o.name, "pass" if o.passed else "fail", f"{o.worst:.6g}", f"{o.tolerance:.3g}",
                    "" if o.seed is None else o.seed, o.detail])
    return buf.getvalue()
