"""End-to-end acceptance checks, one test per criterion.

Each test records a single PASS/FAIL line (collected in the terminal summary)
before asserting, so a failing criterion still reports its measured numbers.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from asianctmc import oracles, reference
from asianctmc.chain import Chain
from asianctmc.inversion import euler_nodes
from asianctmc.models import GridSpec
from asianctmc.pricing import PricingRequest, clear_caches, price_asian, timing_profile
from asianctmc.reference import run_table
from asianctmc.transforms import g_discrete_values
from asianctmc.validation import (
    DEFAULT_SEED, ValidateConfig, benchmark_cases, mc_check, prop_backward_forward,
    prop_closed_form_pairs, prop_enumeration, prop_mu_inversion, prop_z_coefficient, run,
)

pytestmark = pytest.mark.slow
CFG = ValidateConfig()


def test_criterion_1_formula_equivalence(acceptance_report):
    t0 = time.perf_counter()
    z = prop_z_coefficient(CFG)
    mu = prop_mu_inversion(CFG)
    secs = time.perf_counter() - t0
    ok = z.passed and mu.passed and secs < 60
    acceptance_report(1, ok, f"z worst={z.worst:.2e} (tol 1e-9), mu worst={mu.worst:.2e} (tol 1e-6), "
                             f"{CFG.cases} chains in {secs:.1f}s (limit 60s)")
    assert ok


def _slope(xs, ts):
    return float(np.polyfit(np.log(xs), np.log(ts), 1)[0])


def _backward_cost(n_states, n, reps=7):
    rng = np.random.default_rng([DEFAULT_SEED, n_states, n])
    chain = Chain(oracles.random_generator(rng, n_states), 1.0 / n)
    nodes = euler_nodes(n + 1.0)
    g_discrete_values(chain, 0.03, n, nodes)
    best = math.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        g_discrete_values(chain, 0.03, n, nodes)
        best = min(best, time.perf_counter() - t0)
    return best


def test_criterion_2_strategy_equivalence(acceptance_report):
    bf = prop_backward_forward(CFG)
    sizes = [25, 50, 100, 200]
    steps = [50, 100, 200, 400, 800]
    slope_n_states = _slope(sizes, [_backward_cost(s, 250) for s in sizes])
    slope_steps = _slope(steps, [_backward_cost(50, n) for n in steps])
    ok_n_states = abs(slope_n_states - 2.0) <= 0.3
    ok_steps = abs(slope_steps - 1.0) <= 0.3
    ok = bf.passed and ok_n_states and ok_steps
    acceptance_report(2, ok, f"backward/forward worst={bf.worst:.2e} (tol 1e-12); "
                             f"cost slope in N={slope_n_states:.2f} (want 2+-0.3, n=250, N in {sizes}), "
                             f"in n={slope_steps:.2f} (want 1+-0.3, N=50)")
    assert bf.passed
    assert ok_steps
    assert ok_n_states


def test_criterion_3_closed_form_pairs(acceptance_report):
    out = prop_closed_form_pairs(CFG)
    acceptance_report(3, out.passed, f"worst abs error={out.worst:.2e} (tol 1e-8) {out.detail}")
    assert out.passed


def test_criterion_4_enumeration(acceptance_report):
    out = prop_enumeration(CFG)
    acceptance_report(4, out.passed, f"worst abs error={out.worst:.2e} over {CFG.enumeration_cases} seeds "
                                     f"(tol 1e-6) {out.detail}")
    assert out.passed


def test_criterion_5_monte_carlo(acceptance_report):
    paths = 10**6
    parts, worst = [], 0.0
    for j, (label, model, market) in enumerate(benchmark_cases()):
        price, mc, se = mc_check(label, model, market, paths, DEFAULT_SEED + j)
        z = abs(price - mc) / se
        worst = max(worst, z)
        parts.append(f"{label} z={z:.2f}")
    ok = worst <= 3.0
    acceptance_report(5, ok, f"{paths} paths, {', '.join(parts)} (limit 3)")
    assert ok


def _atm_doubling(model, market, n):
    req = PricingRequest(model, market, market.spot, n, GridSpec(n_states=50))
    a = price_asian(req).price
    b = price_asian(replace(req, grid=GridSpec(n_states=100))).price
    return abs(b - a) / a


def test_criterion_6_tables(acceptance_report):
    worst, where = 0.0, ""
    for number in (2, 3, 4, 5):
        for row in run_table(number, transcribed_only=True):
            if row.reference is None:
                continue
            dev = abs(row.ref_dev_pct)
            if dev > worst:
                worst, where = dev, f"table {number} {row.label} K={row.strike:g}"
    ok_tables = worst <= 1.0

    # stand-in blocks fall back to the grid doubling check at the money
    doubling = 0.0
    for block in reference.TABLE1.blocks + tuple(b for b in reference.TABLE3.blocks if not b.transcribed):
        n = block.rows[0].n
        doubling = max(doubling, _atm_doubling(block.model, block.market, n))
    ok_doubling = doubling < 2e-3

    sig05 = next(b for b in reference.TABLE3.blocks if b.label.startswith("sigma=0.05"))
    atm = next(r for r in sig05.rows if r.strike == 100)
    p = price_asian(PricingRequest(sig05.model, sig05.market, 100.0, None)).price
    note = f"(report only: sigma=0.05 stand-in ATM {p:.5f} vs published {atm.ctmc:.5f})"

    ok = ok_tables and ok_doubling
    acceptance_report(6, ok, f"tables 2-5 transcribed max |dev|={worst:.2f}% at {where} (limit 1%); "
                             f"stand-in blocks N 50->100 ATM change max={100 * doubling:.3f}% (limit 0.2%) {note}")
    assert ok


def test_criterion_7_timing(acceptance_report):
    cir, market = reference.CIR_STANDIN, reference.CIR_MARKET
    disc = timing_profile(PricingRequest(cir, market, 1.0, 250))
    cont = timing_profile(PricingRequest(cir, market, 1.0, None))
    clear_caches()
    t0 = time.perf_counter()
    rows = run_table(1, threads=1)
    table_secs = time.perf_counter() - t0
    ok = disc.median <= 0.1 and cont.median <= 0.15 and table_secs <= 5.0 and len(rows) == 30
    acceptance_report(7, ok, f"n=250 warm {disc.median:.4f}s (cold {disc.median_cold:.4f}s, limit 0.1s); "
                             f"continuous CIR warm {cont.median:.4f}s (cold {cont.median_cold:.4f}s, limit 0.15s); "
                             f"table of {len(rows)} from cold caches {table_secs:.2f}s (limit 5s)")
    assert ok


def test_criterion_8_validate(acceptance_report):
    results = run(ValidateConfig())
    failed = [o for o in results if not o.passed]
    builds = next(o for o in results if o.name == "models.generators_valid")
    text = f"{len(results) - len(failed)}/{len(results)} properties pass (seed {DEFAULT_SEED}); " \
           f"generator builds {'all valid' if builds.passed else 'INVALID'}"
    if failed:
        text += "; failing: " + ", ".join(f"{o.name} worst={o.worst:.3g} tol={o.tolerance:.3g}" for o in failed)
    acceptance_report(8, not failed, text)
    assert not failed
