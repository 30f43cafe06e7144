"""How published-table deviations move with the grid (size, span, concentration).

    python scripts/grid_sensitivity.py [--table 5]
"""
import argparse
import itertools
import warnings

from asianctmc.models import GridSpec
from asianctmc.reference import run_table


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--table", type=int, default=5)
    ap.add_argument("--n-states", type=int, nargs="*", default=[40, 50, 75, 100])
    ap.add_argument("--concentration", type=float, nargs="*", default=[0.01, 0.03, 0.1])
    args = ap.parse_args()
    warnings.simplefilter("ignore")
    print("n_states,concentration,max_abs_dev_pct,mean_dev_pct,worst_row")
    for n_states, conc in itertools.product(args.n_states, args.concentration):
        rows = run_table(args.table, grid=GridSpec(n_states=n_states, concentration=conc), transcribed_only=True)
        devs = [(r.ref_dev_pct, f"{r.label} K={r.strike:g}") for r in rows if r.ref_dev_pct is not None]
        worst = max(devs, key=lambda d: abs(d[0]))
        mean = sum(d for d, _ in devs) / len(devs)
        print(f"{n_states},{conc},{abs(worst[0]):.3f},{mean:.3f},{worst[1]}")


if __name__ == "__main__":
    main()
