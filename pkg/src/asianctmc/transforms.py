"""Single Laplace transforms (in the strike variable) of Asian call payoffs on a CTMC.

For a chain with states x, transition matrix P(delta) and generator G,

    g_d(n, theta) = (e^{-theta D} P)^n e^{-theta D} 1 / theta^2 - 1 / theta^2
                    + x / theta * sum_{j=0}^{n} e^{j r delta}
    g_c(t, theta) = e^{(G - theta D) t} 1 / theta^2 - 1 / theta^2
                    + x / (r theta) * (e^{r t} - 1)

are the transforms k -> E^x[(B_n - k)^+] and k -> E^x[(A_t - k)^+] for
Re(theta) > 0, with D = diag(x). Each function has a scalar-theta entry
point returning a ``TransformResult`` and a batched ``*_values`` routine
returning an N x J block for J transform points at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import linalg
from .chain import Chain
from .errors import ArgumentError, DomainError

R_LIMIT_TOL = 1e-8


@dataclass(frozen=True)
class Discrete:
    n: int
    delta: float

    def __post_init__(self):
        if self.n < 0:
            raise ArgumentError(f"number of monitoring steps must be >= 0, got {self.n}")
        if not self.delta > 0:
            raise ArgumentError(f"monitoring interval must be positive, got {self.delta}")


@dataclass(frozen=True)
class Continuous:
    t: float

    def __post_init__(self):
        if self.t < 0:
            raise ArgumentError(f"averaging horizon must be >= 0, got {self.t}")


@dataclass(frozen=True)
class TransformQuery:
    theta: complex
    monitoring: Union[Discrete, Continuous]

    def __post_init__(self):
        if not complex(self.theta).real > 0:
            raise DomainError(f"transform needs Re(theta) > 0, got {self.theta}")


@dataclass(frozen=True, eq=False)
class TransformResult:
    values: np.ndarray
    strategy: str


def _thetas(theta) -> np.ndarray:
    th = np.atleast_1d(np.asarray(theta, dtype=complex))
    if th.ndim != 1:
        raise ArgumentError("theta must be a scalar or 1-D array")
    if np.any(th.real <= 0):
        raise DomainError("transform needs Re(theta) > 0")
    return th


def geometric_factor(n: int, r_delta: float) -> float:
    """sum_{j=0}^{n} e^{j r delta} = (1 - e^{(n+1) r delta}) / (1 - e^{r delta})."""
    if abs(r_delta) < R_LIMIT_TOL:
        return (n + 1) * (1.0 + 0.5 * n * r_delta + n * (2 * n + 1) * r_delta**2 / 12.0)
    return float(np.expm1((n + 1) * r_delta) / np.expm1(r_delta))


def growth_factor(r: float, t: float) -> float:
    """(e^{r t} - 1) / r, with its r -> 0 limit t."""
    if abs(r) * t < R_LIMIT_TOL:
        return t * (1.0 + 0.5 * r * t + (r * t) ** 2 / 6.0)
    return float(np.expm1(r * t) / r)


def _discrete_power_term(p: np.ndarray, x: np.ndarray, n: int, th: np.ndarray, strategy: str) -> np.ndarray:
    e = np.exp(-np.outer(x, th))
    if strategy == "backward":
        v = e
        for _ in range(n):
            v = e * (p @ v)
        return v
    if strategy == "forward":
        out = np.empty_like(e)
        for j in range(th.size):
            m = e[:, j, None] * p
            power = np.eye(x.size, dtype=complex)
            for _ in range(n):
                power = power @ m
            out[:, j] = power @ e[:, j]
        return out
    raise ArgumentError(f"unknown strategy {strategy!r}")


def g_discrete_values(chain: Chain, r: float, n: int, theta, strategy: str = "backward") -> np.ndarray:
    """Batched g_d: returns an N x J array, column j for theta[j]."""
    if chain.delta is None or chain.p_delta is None:
        raise ArgumentError("chain has no monitoring interval")
    if n < 0:
        raise ArgumentError(f"n must be >= 0, got {n}")
    th = _thetas(theta)
    x = chain.x
    first = _discrete_power_term(chain.p_delta, x, n, th, strategy) / th**2
    third = np.outer(x, geometric_factor(n, r * chain.delta) / th)
    return first - 1.0 / th**2 + third


def _check_delta(chain: Chain, query: TransformQuery) -> Discrete:
    mon = query.monitoring
    if not isinstance(mon, Discrete):
        raise ArgumentError("discrete transform needs a Discrete monitoring query")
    if chain.delta is None or not np.isclose(chain.delta, mon.delta, rtol=1e-12, atol=0.0):
        raise ArgumentError(f"query interval {mon.delta} does not match chain interval {chain.delta}")
    return mon


def g_discrete(chain: Chain, r: float, query: TransformQuery) -> TransformResult:
    """g_d(n, theta; x), evaluated right-to-left in O(N^2 n)."""
    mon = _check_delta(chain, query)
    vals = g_discrete_values(chain, r, mon.n, query.theta, "backward")[:, 0]
    return TransformResult(vals, "backward")


def g_discrete_forward(chain: Chain, r: float, query: TransformQuery) -> TransformResult:
    """Same transform via the explicit matrix power, O(N^3 n). Reference path only."""
    mon = _check_delta(chain, query)
    vals = g_discrete_values(chain, r, mon.n, query.theta, "forward")[:, 0]
    return TransformResult(vals, "forward")


def continuous_exp_term(chain: Chain, t: float, theta, strategy: str = "expm") -> np.ndarray:
    """e^{(G - theta D) t} 1 for each theta, as an N x J block.

    "expm" exponentiates the whole stack of J shifted generators with Padé
    scaling and squaring; "expm-action" runs one batched Taylor sweep on the
    vector. Both agree to round-off; the former is several times faster on
    the stiff generators jump models produce.
    """
    th = _thetas(theta)
    x = chain.x
    n = x.size
    if strategy == "expm-action":
        return linalg.expm_action_diag_batch(chain.q, -np.outer(x, th), t, np.ones(n))
    if strategy == "expm":
        stack = chain.q[None, :, :] - th[:, None, None] * np.diag(x)[None, :, :]
        return linalg.expm_stack(stack, t).sum(axis=2).T
    raise ArgumentError(f"unknown strategy {strategy!r}")


def g_continuous_values(chain: Chain, r: float, t: float, theta, strategy: str = "expm") -> np.ndarray:
    """Batched g_c: returns an N x J array."""
    if t < 0:
        raise ArgumentError(f"t must be >= 0, got {t}")
    th = _thetas(theta)
    x = chain.x
    first = continuous_exp_term(chain, t, th, strategy) / th**2
    third = np.outer(x, growth_factor(r, t) / th)
    return first - 1.0 / th**2 + third


def g_continuous(chain: Chain, r: float, query: TransformQuery, strategy: str = "expm") -> TransformResult:
    mon = query.monitoring
    if not isinstance(mon, Continuous):
        raise ArgumentError("continuous transform needs a Continuous monitoring query")
    vals = g_continuous_values(chain, r, mon.t, query.theta, strategy)[:, 0]
    return TransformResult(vals, strategy)
