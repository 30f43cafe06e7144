"""Euler-algorithm Laplace inversion (Abate & Whitt, 1992).

f(k) is recovered from its transform g(theta) = int_0^inf e^{-theta k} f(k) dk
by the trapezoidal Bromwich sum

    s_j = e^{A/2}/(2k) Re g(A/(2k)) + e^{A/2}/k sum_{l=1}^{j} (-1)^l Re g((A + 2 pi i l)/(2k))

accelerated by binomial (Euler) averaging of the partial sums s_n .. s_{n+m}.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .errors import ArgumentError, NumericError


@dataclass(frozen=True)
class InversionConfig:
    a_param: float = 23.0
    series_terms: int = 30
    euler_terms: int = 30
    error_cap: float = 1e-4

    def __post_init__(self):
        if not self.a_param > 0:
            raise ArgumentError(f"a_param must be positive, got {self.a_param}")
        if self.series_terms < 1 or self.euler_terms < 1:
            raise ArgumentError("series_terms and euler_terms must be >= 1")

    @property
    def n_points(self) -> int:
        return self.series_terms + self.euler_terms + 1


@dataclass(frozen=True)
class InversionResult:
    value: float
    error: float
    flagged: bool = False

    def __float__(self):
        return self.value


def euler_nodes(k: float, cfg: InversionConfig = InversionConfig()) -> np.ndarray:
    """Transform points (A + 2 pi i j) / (2k), j = 0 .. n + m."""
    if not k > 0:
        raise ArgumentError(f"inversion point must be positive, got {k}")
    j = np.arange(cfg.n_points)
    return (cfg.a_param + 2j * np.pi * j) / (2.0 * k)


def _weights(cfg: InversionConfig) -> np.ndarray:
    m = cfg.euler_terms
    return comb(m, np.arange(m + 1)) / 2.0**m


def euler_sum(values: np.ndarray, k: float, cfg: InversionConfig = InversionConfig()):
    """Combine transform values at ``euler_nodes`` into f(k).

    ``values`` has the node index on the last axis. Returns the estimate and
    the magnitude of the last Euler increment (E(n) - E(n-1)) as an error
    proxy, both with the leading axes of ``values``.
    """
    vals = np.asarray(values)
    if vals.shape[-1] != cfg.n_points:
        raise ArgumentError(f"expected {cfg.n_points} transform values, got {vals.shape[-1]}")
    if not np.all(np.isfinite(vals)):
        raise NumericError("non-finite transform value in Euler inversion")
    scale = np.exp(cfg.a_param / 2.0) / k
    terms = vals.real * scale
    terms[..., 0] *= 0.5
    signs = (-1.0) ** np.arange(cfg.n_points)
    partial = np.cumsum(terms * signs, axis=-1)
    w = _weights(cfg)
    n, m = cfg.series_terms, cfg.euler_terms
    est = partial[..., n : n + m + 1] @ w
    prev = partial[..., n - 1 : n + m] @ w
    return est, np.abs(est - prev)


def invert_laplace(g, k: float, cfg: InversionConfig = InversionConfig()) -> InversionResult:
    """Invert a scalar transform ``g`` (callable on complex theta) at ``k``."""
    nodes = euler_nodes(k, cfg)
    vals = np.array([complex(g(z)) for z in nodes])
    est, err = euler_sum(vals, k, cfg)
    return _result(float(est), float(err), cfg)


def invert_vector(g_vec, k: float, cfg: InversionConfig = InversionConfig(), state_index: int | None = None):
    """Invert a vector-valued transform componentwise.

    ``g_vec`` maps a 1-D array of J transform points to an N x J array (all
    points evaluated in one call). With ``state_index`` the chosen component
    is returned as an ``InversionResult``; otherwise arrays of estimates and
    error proxies for all N components.
    """
    nodes = euler_nodes(k, cfg)
    vals = np.asarray(g_vec(nodes))
    if vals.ndim == 1:
        vals = vals[None, :]
    if state_index is None:
        return euler_sum(vals, k, cfg)
    if not 0 <= state_index < vals.shape[0]:
        raise ArgumentError(f"state index {state_index} out of range for {vals.shape[0]} states")
    est, err = euler_sum(vals[state_index], k, cfg)
    return _result(float(est), float(err), cfg)


def _result(value: float, err: float, cfg: InversionConfig) -> InversionResult:
    flagged = err > cfg.error_cap * max(1.0, abs(value))
    if flagged:
        warnings.warn(f"Euler inversion error proxy {err:.3g} above cap", RuntimeWarning, stacklevel=3)
    return InversionResult(value, err, flagged)
