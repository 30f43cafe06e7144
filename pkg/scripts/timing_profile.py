"""Warm/cold timings and stage breakdown, plus the backward-kernel cost slopes.

    python scripts/timing_profile.py [--reps 7]
"""
import argparse
import math
import time
import warnings

import numpy as np

from asianctmc import oracles
from asianctmc.chain import Chain
from asianctmc.inversion import euler_nodes
from asianctmc.pricing import PricingRequest, timing_profile
from asianctmc.reference import CIR_MARKET, CIR_STANDIN, DEJD_MODEL, JUMP_MARKET
from asianctmc.transforms import g_discrete_values


def kernel_cost(n_states, n, reps):
    rng = np.random.default_rng([n_states, n])
    chain = Chain(oracles.random_generator(rng, n_states), 1.0 / n)
    nodes = euler_nodes(n + 1.0)
    best = math.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        g_discrete_values(chain, 0.03, n, nodes)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=7)
    args = ap.parse_args()
    warnings.simplefilter("ignore")
    cases = [("cir n=250", PricingRequest(CIR_STANDIN, CIR_MARKET, 1.0, 250)),
             ("cir continuous", PricingRequest(CIR_STANDIN, CIR_MARKET, 1.0, None)),
             ("dejd n=250", PricingRequest(DEJD_MODEL, JUMP_MARKET, 100.0, 250)),
             ("dejd continuous", PricingRequest(DEJD_MODEL, JUMP_MARKET, 100.0, None))]
    for label, req in cases:
        prof = timing_profile(req, args.reps)
        stages = " ".join(f"{k}={v * 1e3:.1f}ms" for k, v in prof.breakdown.items())
        print(f"{label:16s} warm {prof.median:.4f}s cold {prof.median_cold:.4f}s  {stages}")

    sizes, steps = [25, 50, 100, 200], [50, 100, 200, 400, 800]
    ts = [kernel_cost(s, 250, args.reps) for s in sizes]
    print("N   :", sizes, "seconds:", [f"{t:.4f}" for t in ts],
          f"slope {np.polyfit(np.log(sizes), np.log(ts), 1)[0]:.2f}")
    ts = [kernel_cost(50, n, args.reps) for n in steps]
    print("n   :", steps, "seconds:", [f"{t:.4f}" for t in ts],
          f"slope {np.polyfit(np.log(steps), np.log(ts), 1)[0]:.2f}")


if __name__ == "__main__":
    main()
