"""Command-line front end.

    asianctmc price    --config FILE [--set section.key=value ...]
    asianctmc table    (--paper-table N | --config FILE) [--output CSV] [--no-timing]
    asianctmc sweep    --config FILE [--n-values 12,25,50]
    asianctmc validate [--seed S] [--cases C] [--mc-paths P] [--generator CHAIN.json]

Exit status: 0 success, 1 bad input (config, domain, construction),
2 numerical failure (including a failed validation property or table row).
``--config`` also accepts the name of a bundled config, e.g. ``cir_n12_k090.ini``.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from . import config as cfgmod
from .errors import ArgumentError, ConstructionError, DomainError, NumericError

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


def _resolve(path: str) -> Path:
    p = Path(path)
    if p.is_file():
        return p
    try:
        return cfgmod.bundled(p.name)
    except ArgumentError:
        raise cfgmod.ConfigError(f"config file {path} not found") from None


def _load(args) -> cfgmod.RunConfig:
    if args.config is None:
        raise cfgmod.ConfigError("--config is required")
    return cfgmod.load(_resolve(args.config), args.set or ())


def _write(text: str, output) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def cmd_price(args) -> int:
    from .pricing import price_asian

    run = _load(args)
    req = run.single()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = price_asian(req)
    n = "inf" if req.n is None else str(req.n)
    print(f"price       {res.price:.5f}")
    print(f"error_proxy {res.error:.2e}")
    print(f"model       {type(req.model).__name__}  K={req.strike:g}  n={n}  T={req.market.T:g}")
    print(f"strategy    {res.strategy}  N={res.n_states}  seconds={res.seconds:.4f}")
    if res.flagged:
        print("flagged     yes (inversion proxy above cap or clamped negative)")
    return EXIT_OK


def cmd_table(args) -> int:
    from .pricing import price_table, table_csv
    from .reference import run_table

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if args.paper_table is not None:
            if args.config is not None:
                raise cfgmod.ConfigError("give --paper-table or --config, not both")
            rows = run_table(args.paper_table, transcribed_only=args.transcribed_only)
        else:
            run = _load(args)
            reqs = run.requests()
            if not reqs:
                raise cfgmod.ConfigError("config yields no pricing requests")
            rows = price_table(reqs)
    _write(table_csv(rows, timing=not args.no_timing), args.output)
    bad = [r for r in rows if r.status.startswith("error")]
    for r in bad:
        print(f"row K={r.strike:g} n={r.n}: {r.status}", file=sys.stderr)
    return EXIT_NUMERIC if bad else EXIT_OK


def cmd_sweep(args) -> int:
    from dataclasses import replace

    from .pricing import convergence_sweep

    run = _load(args)
    ns = [int(v) for v in args.n_values.split(",")] if args.n_values else run.sweep_n
    if not ns:
        raise cfgmod.ConfigError("no n values: set sweep.n_values or pass --n-values")
    req = replace(run.single() if len(run.strikes) == 1 else run.requests()[0], n=None)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = convergence_sweep(req, ns)
    print("n,price,gap_to_continuous")
    for n, p, g in zip(res.n_values, res.prices, res.gaps):
        print(f"{n},{p:.5f},{g:.5f}")
    print(f"inf,{res.continuous:.5f},0.00000")
    print(f"# monotone={res.monotone} last_step={res.cauchy[-1]:.2e}", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    from .chain import Chain
    from .validation import ValidateConfig, report_csv, run

    extra = []
    for path in args.generator or ():
        extra.append((Path(path).name, Chain.from_json(Path(path).read_text()).gen))
    cfg = ValidateConfig(seed=args.seed, cases=args.cases, mc_paths=args.mc_paths,
                         enumeration_cases=args.enumeration_cases, extra_generators=tuple(extra))

    def show(o):
        print(o.line(), flush=True)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        results = run(cfg, only=args.only, progress=show)
    failed = [o for o in results if not o.passed]
    print(f"{len(results) - len(failed)}/{len(results)} properties passed (seed {cfg.seed})")
    if args.output:
        Path(args.output).write_text(report_csv(results))
    for o in failed:
        print(f"replay {o.name}: seed={o.seed}", file=sys.stderr)
        if o.instance is not None:
            if args.replay_dir:
                d = Path(args.replay_dir)
                d.mkdir(parents=True, exist_ok=True)
                target = d / f"{o.name}.json"
                target.write_text(o.instance)
                print(f"  instance written to {target}", file=sys.stderr)
            else:
                print(f"  instance {o.instance}", file=sys.stderr)
    return EXIT_NUMERIC if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    from .validation import DEFAULT_SEED

    p = argparse.ArgumentParser(prog="asianctmc", description="Asian option prices on Markov chain models")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp):
        sp.add_argument("--config", help="INI file, or the name of a bundled config")
        sp.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override a config entry")

    sp = sub.add_parser("price", help="price one option")
    with_config(sp)
    sp.set_defaults(func=cmd_price)

    sp = sub.add_parser("table", help="price a strike/n grid and emit CSV")
    with_config(sp)
    sp.add_argument("--paper-table", type=int, choices=range(1, 6), metavar="{1..5}")
    sp.add_argument("--transcribed-only", action="store_true", help="skip stand-in blocks")
    sp.add_argument("--output", "-o", help="CSV path (default stdout)")
    sp.add_argument("--no-timing", action="store_true", help="blank the seconds column")
    sp.set_defaults(func=cmd_table)

    sp = sub.add_parser("sweep", help="prices across monitoring frequencies")
    with_config(sp)
    sp.add_argument("--n-values", help="comma-separated increasing n list")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("validate", help="run the seeded property suite")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--cases", type=int, default=100)
    sp.add_argument("--mc-paths", type=int, default=200_000)
    sp.add_argument("--enumeration-cases", type=int, default=50)
    sp.add_argument("--only", action="append", help="run properties with this name prefix")
    sp.add_argument("--generator", action="append", help="extra chain JSON checked for generator validity")
    sp.add_argument("--output", "-o", help="also write the report as CSV")
    sp.add_argument("--replay-dir", help="write failing instances here instead of stderr")
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ArgumentError, DomainError, ConstructionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
