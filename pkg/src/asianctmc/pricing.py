"""End-to-end Asian call prices and the benchmark-table harness."""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional

import numpy as np

from . import linalg
from .chain import Chain, Generator, validate_generator
from .errors import ArgumentError, ConstructionError, NumericError
from .inversion import InversionConfig, euler_nodes, euler_sum
from .models import CIR, GridSpec, ModelSpec, build_generator, build_grid
from .transforms import g_continuous_values, g_discrete_values, geometric_factor, growth_factor

NEGATIVE_CLAMP = 1e-9


@dataclass(frozen=True)
class Market:
    spot: float
    r: float
    T: float

    def __post_init__(self):
        if not self.spot > 0:
            raise ArgumentError(f"spot must be positive, got {self.spot}")
        if not self.T > 0:
            raise ArgumentError(f"maturity must be positive, got {self.T}")


@dataclass(frozen=True)
class PricingRequest:
    """One fixed-strike Asian call. ``n=None`` means continuous monitoring.

    ``mean_correction`` replaces the risk-neutral first moment built into the
    transforms by the chain's own expected average. ``None`` turns it on only
    for models whose drift is not r x (CIR).
    """

    model: ModelSpec
    market: Market
    strike: float
    n: Optional[int] = None
    grid: GridSpec = field(default_factory=GridSpec)
    inversion: InversionConfig = field(default_factory=InversionConfig)
    mean_correction: Optional[bool] = None

    def __post_init__(self):
        if self.strike < 0:
            raise ArgumentError(f"strike must be >= 0, got {self.strike}")
        if self.n is not None and self.n < 1:
            raise ArgumentError(f"discrete monitoring needs n >= 1, got {self.n}")
        if not math.isclose(self.model.r, self.market.r, rel_tol=0, abs_tol=1e-15):
            raise ArgumentError(f"model rate {self.model.r} differs from market rate {self.market.r}")

    @property
    def monitoring(self) -> str:
        return "continuous" if self.n is None else f"n={self.n}"

    @property
    def corrects_mean(self) -> bool:
        if self.mean_correction is None:
            return isinstance(self.model, CIR)
        return self.mean_correction


@dataclass
class PriceResult:
    price: float
    error: float = 0.0
    seconds: float = 0.0
    strategy: str = ""
    n_states: int = 0
    flagged: bool = False
    clamped: bool = False
    mean_defect: float = 0.0
    stages: dict = field(default_factory=dict)


@lru_cache(maxsize=64)
def normalized_generator(model: ModelSpec, grid: GridSpec, spot: float, T: float) -> Generator:
    """Generator on the grid for ``model``, with states divided by ``spot``.

    Rates are unit-free in price, so rescaling the states is the whole change
    of units; the spot becomes the state 1.0.
    """
    states = build_grid(model, grid, spot, T)
    gen = build_generator(model, states, grid.boundary, grid.mass_tol, spot)
    problems = validate_generator(gen)
    if problems:
        raise ConstructionError("built generator is invalid: " + "; ".join(problems[:3]))
    return gen.rescaled(spot)


@lru_cache(maxsize=256)
def _chain(gen: Generator, delta: float) -> Chain:
    return Chain(gen, delta)


def expected_sum_discrete(chain: Chain, n: int) -> np.ndarray:
    """E^x[B_n] = sum_{i=0}^{n} P(delta)^i x for every starting state."""
    v = chain.x.astype(float)
    total = v.copy()
    for _ in range(n):
        v = chain.p_delta @ v
        total += v
    return total


def expected_integral(gen: Generator, t: float) -> np.ndarray:
    """E^x[A_t] = int_0^t e^{G s} x ds via one augmented exponential."""
    n = gen.n_states
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = gen.q
    aug[:n, n] = gen.x
    return linalg.expm(aug, t)[:n, n]


def price_asian(req: PricingRequest) -> PriceResult:
    t0 = time.perf_counter()
    mk = req.market
    gen = normalized_generator(req.model, req.grid, mk.spot, mk.T)
    res = _price_normalized(gen, gen.grid.index_of(1.0), mk.spot, mk.r, mk.T, req.strike, req.n,
                            req.inversion, req.corrects_mean)
    res.stages["build"] = time.perf_counter() - t0 - res.seconds
    res.seconds = time.perf_counter() - t0
    return res


def price_on_chain(gen: Generator, start: int, r: float, T: float, strike: float, n: Optional[int] = None,
                   inversion: InversionConfig = InversionConfig(), mean_correction: bool = False) -> PriceResult:
    """The same pipeline on a ready-made generator, started in state ``start``."""
    if not 0 <= start < gen.n_states:
        raise ArgumentError(f"start state {start} out of range for {gen.n_states} states")
    spot = float(gen.x[start])
    if not spot > 0:
        raise ArgumentError("start state must have a positive price")
    if not T > 0:
        raise ArgumentError(f"maturity must be positive, got {T}")
    if strike < 0:
        raise ArgumentError(f"strike must be >= 0, got {strike}")
    if n is not None and n < 1:
        raise ArgumentError(f"discrete monitoring needs n >= 1, got {n}")
    return _price_normalized(gen.rescaled(spot), start, spot, r, T, strike, n, inversion, mean_correction)


def _price_normalized(gen: Generator, i0: int, S: float, r: float, T: float, strike: float,
                      n: Optional[int], cfg: InversionConfig, correct: bool) -> PriceResult:
    t0 = time.perf_counter()
    disc = math.exp(-r * T)
    if n is not None:
        chain = _chain(gen, T / n)
        scale = disc / (n + 1)
        k_star = (n + 1) * strike / S
        mean = expected_sum_discrete(chain, n)[i0]
        assumed = geometric_factor(n, r * chain.delta) * chain.x[i0]
        strategy = "backward"

        def transform(th):
            return g_discrete_values(chain, r, n, th)[i0]
    else:
        scale = disc / T
        k_star = T * strike / S
        mean = expected_integral(gen, T)[i0]
        assumed = growth_factor(r, T) * gen.x[i0]
        strategy = "expm"
        cont = Chain(gen)

        def transform(th):
            return g_continuous_values(cont, r, T, th)[i0]
    t_chain = time.perf_counter()

    defect = mean - assumed
    if k_star == 0:
        value, err = mean, 0.0
        strategy = "zero-strike"
    else:
        est, err = euler_sum(transform(euler_nodes(k_star, cfg)), k_star, cfg)
        value = float(est)
        err = float(err)
        if correct:
            value += defect
    t_inv = time.perf_counter()

    price = scale * S * value
    err_price = scale * S * err
    flagged = err_price > cfg.error_cap * max(1.0, abs(price))
    clamped = False
    if price < 0:
        # negatives inside the inversion tolerance are noise around a zero price
        if price < -max(NEGATIVE_CLAMP, cfg.error_cap) * max(1.0, S):
            raise NumericError(f"negative price {price:.3g} beyond clamp tolerance", residual=-price)
        price, clamped = 0.0, True
    return PriceResult(
        price=price,
        error=err_price,
        seconds=t_inv - t0,
        strategy=strategy,
        n_states=gen.n_states,
        flagged=flagged or clamped,
        clamped=clamped,
        mean_defect=scale * S * defect,
        stages={"chain": t_chain - t0, "inversion": t_inv - t_chain},
    )


# --- harness ------------------------------------------------------------------

THREADS_ENV = "ASIANCTMC_THREADS"
CSV_COLUMNS = ("K", "n", "benchmark", "price", "rel_err_pct", "seconds",
               "label", "reference", "ref_dev_pct", "error_proxy", "status")


@dataclass
class TableRow:
    strike: float
    n: Optional[int]
    benchmark: Optional[float]
    price: Optional[float]
    seconds: float
    label: str = ""
    reference: Optional[float] = None
    error_proxy: Optional[float] = None
    status: str = "ok"

    @property
    def rel_err_pct(self) -> Optional[float]:
        return _pct(self.price, self.benchmark)

    @property
    def ref_dev_pct(self) -> Optional[float]:
        return _pct(self.price, self.reference)

    def as_record(self) -> dict:
        fmt = lambda v, spec: "n/a" if v is None else format(v, spec)  # noqa: E731
        return {
            "K": format(self.strike, "g"),
            "n": "inf" if self.n is None else str(self.n),
            "benchmark": fmt(self.benchmark, ".5f"),
            "price": fmt(self.price, ".5f"),
            "rel_err_pct": fmt(self.rel_err_pct, ".3f"),
            "seconds": format(self.seconds, ".4f"),
            "label": self.label,
            "reference": fmt(self.reference, ".5f"),
            "ref_dev_pct": fmt(self.ref_dev_pct, ".3f"),
            "error_proxy": fmt(self.error_proxy, ".2e"),
            "status": self.status,
        }


def _pct(value, ref):
    if value is None or ref is None or ref == 0:
        return None
    return 100.0 * (value - ref) / ref


def thread_count() -> int:
    import os

    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ArgumentError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ArgumentError(f"{THREADS_ENV} must be >= 1, got {n}")
    return n


def price_table(requests, benchmarks=None, references=None, labels=None, threads: Optional[int] = None):
    """Price every request; a failing row is recorded, never raised.

    ``benchmarks``/``references``/``labels`` are optional per-row sequences
    aligned with ``requests``. Rows come back in input order.
    """
    requests = list(requests)
    if not requests:
        raise ArgumentError("price_table needs at least one request")
    n = len(requests)
    benchmarks = list(benchmarks) if benchmarks is not None else [None] * n
    references = list(references) if references is not None else [None] * n
    labels = list(labels) if labels is not None else [""] * n
    if not (len(benchmarks) == len(references) == len(labels) == n):
        raise ArgumentError("benchmarks, references and labels must align with requests")

    def one(i):
        req = requests[i]
        t0 = time.perf_counter()
        try:
            res = price_asian(req)
        except (ArgumentError, ConstructionError, NumericError, ValueError, ArithmeticError) as exc:
            return TableRow(req.strike, req.n, benchmarks[i], None, time.perf_counter() - t0, labels[i],
                            references[i], None, f"error: {exc}")
        status = "flagged" if res.flagged else "ok"
        return TableRow(req.strike, req.n, benchmarks[i], res.price, time.perf_counter() - t0, labels[i],
                        references[i], res.error, status)

    workers = threads if threads is not None else thread_count()
    if workers == 1:
        return [one(i) for i in range(n)]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(n)))


def table_csv(rows, timing: bool = True) -> str:
    """CSV text in the fixed column order. ``timing=False`` blanks seconds
    so that repeated runs are byte-identical."""
    import csv
    import io

    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        rec = row.as_record()
        if not timing:
            rec["seconds"] = ""
        w.writerow(rec)
    return buf.getvalue()


@dataclass
class TimingProfile:
    median: float
    median_cold: float
    breakdown: dict
    samples: list


def timing_profile(req: PricingRequest, repetitions: int = 5) -> TimingProfile:
    """Median wall-clock of ``price_asian``.

    ``median`` is the warm figure (generator and P(delta) cached, as in a
    table run); ``median_cold`` clears the caches before every repetition.
    """
    if repetitions < 3:
        raise ArgumentError(f"timing needs at least 3 repetitions, got {repetitions}")
    cold = []
    for _ in range(repetitions):
        clear_caches()
        t0 = time.perf_counter()
        price_asian(req)
        cold.append(time.perf_counter() - t0)
    warm, stages = [], []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        res = price_asian(req)
        warm.append(time.perf_counter() - t0)
        stages.append(res.stages)
    breakdown = {k: statistics.median(s[k] for s in stages) for k in stages[0]}
    return TimingProfile(statistics.median(warm), statistics.median(cold), breakdown, warm)


def clear_caches() -> None:
    normalized_generator.cache_clear()
    _chain.cache_clear()


@dataclass
class SweepResult:
    n_values: list
    prices: list
    continuous: float
    gaps: list = field(default_factory=list)
    monotone: bool = True
    cauchy: list = field(default_factory=list)


def convergence_sweep(req: PricingRequest, n_values) -> SweepResult:
    """Prices across monitoring frequencies plus the continuous limit.

    ``gaps`` are distances to the continuous price, ``cauchy`` the changes
    between consecutive entries; ``monotone`` says whether the discrete prices
    move towards the continuous one without overshooting.
    """
    ns = list(n_values)
    if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ArgumentError("n_values must be a non-empty increasing list")
    prices = [price_asian(replace(req, n=n)).price for n in ns]
    cont = price_asian(replace(req, n=None)).price
    seq = prices + [cont]
    gaps = [abs(p - cont) for p in prices]
    steps = [b - a for a, b in zip(seq, seq[1:])]
    tol = 1e-9 * max(1.0, abs(cont))
    monotone = all(s >= -tol for s in steps) or all(s <= tol for s in steps)
    return SweepResult(ns, prices, cont, gaps, monotone, [abs(s) for s in steps])
