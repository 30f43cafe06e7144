"""Independent reference computations for the single-transform pipeline.

* double transforms in (z, theta) and (mu, theta), whose z^n coefficient and
  mu-inverse must reproduce the single transforms;
* exhaustive enumeration of all state paths on tiny chains;
* exact-in-law Monte Carlo of the continuous average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from . import linalg
from .chain import Chain, Generator, StateGrid
from .errors import ArgumentError, DomainError, NumericError
from .inversion import InversionConfig, euler_nodes, euler_sum

CONTOUR_TOL = 1e-11
MAX_CONTOUR_NODES = 1 << 14
ENUMERATION_CAP = 10**7


@dataclass(frozen=True)
class DoubleTransformQuery:
    """A point (theta, z) or (theta, mu) inside the region where the
    series expansions behind the double transforms converge."""

    theta: complex
    z: Optional[complex] = None
    mu: Optional[complex] = None

    def __post_init__(self):
        if not complex(self.theta).real > 0:
            raise DomainError(f"need Re(theta) > 0, got {self.theta}")
        if (self.z is None) == (self.mu is None):
            raise ArgumentError("give exactly one of z (discrete) or mu (continuous)")

    def check(self, chain: Chain, r: float) -> "DoubleTransformQuery":
        th = complex(self.theta)
        if self.z is not None:
            if chain.p_delta is None:
                raise ArgumentError("discrete query needs a chain with a monitoring interval")
            bound = z_radius(chain, r, th)
            if not abs(self.z) < bound:
                raise DomainError(f"|z| = {abs(self.z):.6g} outside the admissible radius {bound:.6g}")
        else:
            norm = linalg.inf_norm(chain.q - th * np.diag(chain.x))
            if not abs(self.mu) > max(norm, 0.0):
                raise DomainError(f"|mu| = {abs(self.mu):.6g} must exceed ||G - theta D|| = {norm:.6g}")
        return self


@dataclass(frozen=True)
class McConfig:
    paths: int = 10**6
    seed: int = 20240501
    batch: int = 50

    def __post_init__(self):
        if self.paths < 1:
            raise ArgumentError(f"paths must be >= 1, got {self.paths}")
        if self.batch < 1:
            raise ArgumentError(f"batch must be >= 1, got {self.batch}")


# --- discrete double transform ---------------------------------------------------

def z_radius(chain: Chain, r: float, theta: complex) -> float:
    """min(1, e^{-r delta}, 1 / ||e^{-theta D} P(delta)||)."""
    m = np.exp(-theta * chain.x)[:, None] * chain.p_delta
    norm = linalg.inf_norm(m)
    return min(1.0, math.exp(-r * chain.delta), 1.0 / norm if norm > 0 else math.inf)


def _dominant(a: np.ndarray) -> bool:
    diag = np.abs(np.diag(a))
    off = np.abs(a).sum(axis=1) - diag
    return bool(np.all(diag > off))


def L_discrete(chain: Chain, r: float, theta: complex, z: complex) -> np.ndarray:
    """Generating function sum_n z^n g_d(n, theta) in closed form."""
    if chain.p_delta is None:
        raise ArgumentError("chain has no monitoring interval")
    th = complex(theta)
    if not th.real > 0:
        raise DomainError(f"need Re(theta) > 0, got {theta}")
    x = chain.x
    a = np.diag(np.exp(th * x)) - z * chain.p_delta
    if not _dominant(a):
        raise DomainError("e^{theta D} - z P is not strictly diagonally dominant")
    first = linalg.mat_inverse(a) @ np.ones(x.size)
    erd = math.exp(r * chain.delta)
    return first / th**2 - 1.0 / (th**2 * (1 - z)) + x / (th * (1 - z) * (1 - z * erd))


def z_coefficient(chain: Chain, r: float, theta: complex, n: int) -> np.ndarray:
    """n-th Taylor coefficient of z -> L_discrete by the trapezoid rule on a circle.

    The radius is half the admissible one. Node counts start at 4(n+1) and
    double until two successive estimates agree to CONTOUR_TOL.
    """
    if n < 0:
        raise ArgumentError(f"n must be >= 0, got {n}")
    rho = 0.5 * z_radius(chain, r, complex(theta))

    def estimate(m):
        w = np.exp(2j * np.pi * np.arange(m) / m)
        vals = np.array([L_discrete(chain, r, theta, rho * wk) for wk in w])
        return (vals * (w ** (-n))[:, None]).mean(axis=0) / rho**n

    m = 4 * (n + 1)
    prev = estimate(m)
    while m < MAX_CONTOUR_NODES:
        m *= 2
        cur = estimate(m)
        if np.max(np.abs(cur - prev)) < CONTOUR_TOL:
            return cur
        prev = cur
    raise NumericError(f"contour quadrature did not settle by {m} nodes", residual=float(np.max(np.abs(cur - prev))))


# --- continuous double transform -------------------------------------------------

def resolvent_ones(chain: Chain, theta: complex, mu) -> np.ndarray:
    """m(mu, theta) = (theta D + mu I - G)^{-1} 1, batched over an array of mu.

    Returns shape (N,) for scalar mu, else (N, J).
    """
    mus = np.atleast_1d(np.asarray(mu, dtype=complex))
    x = chain.x
    n = x.size
    base = complex(theta) * np.diag(x) - chain.q
    stack = base[None, :, :] + mus[:, None, None] * np.eye(n)[None, :, :]
    for a in stack:
        if not _dominant(a):
            raise DomainError("theta D + mu I - G is not strictly diagonally dominant")
    sol = np.linalg.solve(stack, np.ones((mus.size, n, 1)))[..., 0].T
    return sol[:, 0] if np.ndim(mu) == 0 else sol


def L_continuous(chain: Chain, r: float, theta: complex, mu) -> np.ndarray:
    """Laplace transform in t of g_c(t, theta). Batched over an array of mu."""
    th = complex(theta)
    if not th.real > 0:
        raise DomainError(f"need Re(theta) > 0, got {theta}")
    mus = np.asarray(mu, dtype=complex)
    if np.any(mus == 0) or np.any(mus == r):
        raise DomainError("mu must differ from 0 and from r")
    m = resolvent_ones(chain, th, mus)
    x = chain.x if m.ndim == 1 else chain.x[:, None]
    return m / th**2 - 1.0 / (th**2 * mus) + x / (th * mus * (mus - r))


def neumann_partial_sums(chain: Chain, theta: complex, mu: complex, terms: int) -> np.ndarray:
    """sum_{i<=m} (G - theta D)^i 1 / mu^{i+1} for m = 0 .. terms-1, as rows."""
    a = chain.q - complex(theta) * np.diag(chain.x)
    v = np.ones(chain.n_states, dtype=complex) / mu
    total = np.zeros_like(v)
    out = []
    for _ in range(terms):
        total = total + v
        out.append(total.copy())
        v = a @ v / mu
    return np.array(out)


def mu_invert(chain: Chain, r: float, theta: complex, t: float,
              cfg: InversionConfig = InversionConfig()) -> np.ndarray:
    """g_c(t, theta) recovered by numerically inverting L_continuous in mu.

    t -> g_c(t, theta) is complex for complex theta, so its real and
    imaginary parts are inverted separately using L(mu) and L(conj mu).
    """
    if not t > 0:
        raise ArgumentError(f"t must be positive, got {t}")
    nodes = euler_nodes(t, cfg)
    a = L_continuous(chain, r, theta, nodes)
    b = L_continuous(chain, r, theta, np.conj(nodes))
    re_part, _ = euler_sum(0.5 * (a.real + b.real), t, cfg)
    im_part, _ = euler_sum(0.5 * (a.imag + b.imag), t, cfg)
    return re_part + 1j * im_part


# --- enumeration -------------------------------------------------------------------

def enumerate_discrete_price(chain: Chain, r: float, T: float, n: int, K: float, start_state: int) -> float:
    """Exact discretely monitored price by summing over every state path."""
    N = chain.n_states
    if n < 0:
        raise ArgumentError(f"n must be >= 0, got {n}")
    if float(N) ** (n + 1) > ENUMERATION_CAP:
        raise ArgumentError(f"{N}^{n + 1} paths exceed the enumeration cap {ENUMERATION_CAP}")
    if not 0 <= start_state < N:
        raise ArgumentError(f"start state {start_state} out of range")
    x = chain.x
    if n == 0:
        return math.exp(-r * T) * max(x[start_state] - K, 0.0)
    p = chain.with_delta(T / n).p_delta
    state = np.array([start_state])
    total = np.array([x[start_state]])
    prob = np.array([1.0])
    for _ in range(n):
        state = np.repeat(state, N)
        nxt = np.tile(np.arange(N), prob.size)
        prob = np.repeat(prob, N) * p[state, nxt]
        total = np.repeat(total, N) + x[nxt]
        state = nxt
    payoff = np.maximum(total - (n + 1) * K, 0.0)
    return math.exp(-r * T) / (n + 1) * float(np.sum(prob * payoff))


# --- Monte Carlo ---------------------------------------------------------------------

def _jump_tables(q: np.ndarray):
    rates = -np.diag(q).copy()
    jump = np.where(np.eye(q.shape[0], dtype=bool), 0.0, q)
    with np.errstate(invalid="ignore", divide="ignore"):
        probs = np.where(rates[:, None] > 0, jump / rates[:, None], 0.0)
    cum = np.cumsum(probs, axis=1)
    cum[:, -1] = np.where(rates > 0, 1.0, cum[:, -1])
    return rates, cum


@numba.njit(cache=True)
def _integral_paths(rng, rates, cum, x, T, start, out):
    n = x.size
    for p in range(out.size):
        s = start
        t = 0.0
        a = 0.0
        while True:
            lam = rates[s]
            if lam <= 0.0:
                a += x[s] * (T - t)
                break
            h = rng.exponential(1.0) / lam
            if t + h >= T:
                a += x[s] * (T - t)
                break
            a += x[s] * h
            t += h
            u = rng.random()
            lo, hi = 0, n - 1
            while lo < hi:
                mid = (lo + hi) // 2
                if cum[s, mid] < u:
                    lo = mid + 1
                else:
                    hi = mid
            s = lo
        out[p] = a


def simulate_integral(gen: Generator, T: float, start_state: int, paths: int, rng: np.random.Generator) -> np.ndarray:
    """A_T = int_0^T X_u du for ``paths`` independent chain paths.

    Holding times are exponential with rate -q_ii and the next state is drawn
    from q_ij / (-q_ii), so the law of A_T is exact.
    """
    rates, cum = _jump_tables(gen.q)
    out = np.empty(paths)
    _integral_paths(rng, rates, cum, np.asarray(gen.x, dtype=float), float(T), int(start_state), out)
    return out


def mc_continuous_price(chain: Chain, r: float, T: float, K: float, start_state: int,
                        cfg: McConfig = McConfig()) -> tuple[float, float]:
    """Continuously monitored price and its standard error from batch means."""
    if cfg.paths < 100:
        raise ArgumentError(f"Monte Carlo needs at least 100 paths, got {cfg.paths}")
    if not 0 <= start_state < chain.n_states:
        raise ArgumentError(f"start state {start_state} out of range")
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    batches = min(cfg.batch, cfg.paths)
    sizes = np.full(batches, cfg.paths // batches)
    sizes[: cfg.paths % batches] += 1
    scale = math.exp(-r * T) / T
    means = np.empty(batches)
    for b, size in enumerate(sizes):
        area = simulate_integral(chain.gen, T, start_state, int(size), rng)
        means[b] = scale * np.maximum(area - T * K, 0.0).mean()
    price = float(np.average(means, weights=sizes))
    if batches < 2 or np.all(means == means[0]):
        return price, 0.0
    se = float(np.std(means, ddof=1) / math.sqrt(batches))
    return price, se


# --- random tiny chains ----------------------------------------------------------------

def random_generator(rng: np.random.Generator, n_states: int, rate_scale: float = 1.0,
                     low: float = 0.5, high: float = 1.5) -> Generator:
    """A dense random generator on sorted positive states (test fixtures)."""
    if n_states < 1:
        raise ArgumentError("need at least one state")
    gaps = rng.uniform(0.2, 1.0, n_states)
    x = low + (high - low) * np.cumsum(gaps) / gaps.sum()
    q = rng.exponential(rate_scale, (n_states, n_states))
    np.fill_diagonal(q, 0.0)
    np.fill_diagonal(q, -q.sum(axis=1))
    return Generator(StateGrid(x), q)


def random_martingale_generator(rng: np.random.Generator, n_states: int, rate_scale: float = 1.0,
                                low: float = 0.5, high: float = 1.5) -> Generator:
    """Random generator with G x = 0: absorbing end states, and every interior
    row rescaled on one side so that its expected move is zero."""
    gen = random_generator(rng, n_states, rate_scale, low, high)
    x = gen.x
    q = np.array(gen.q)
    q[[0, -1], :] = 0.0
    for i in range(1, n_states - 1):
        d = x - x[i]
        up = q[i, i + 1:] @ d[i + 1:]
        down = -(q[i, :i] @ d[:i])
        q[i, i + 1:] *= down / up
    np.fill_diagonal(q, 0.0)
    np.fill_diagonal(q, -q.sum(axis=1))
    return Generator(gen.grid, q)
