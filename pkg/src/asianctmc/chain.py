"""Finite-state continuous-time Markov chains on a price grid."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import ArgumentError, ConstructionError, NumericError

ROW_SUM_TOL = 1e-12
STOCHASTIC_TOL = 1e-10
CLAMP_TOL = 1e-12

CHAIN_FORMAT = "asianctmc.chain/1"


@dataclass(frozen=True, eq=False)
class StateGrid:
    """Strictly increasing, non-negative price levels x_1 < ... < x_N."""

    states: np.ndarray

    def __post_init__(self):
        x = np.array(self.states, dtype=float)
        if x.ndim != 1 or x.size < 1:
            raise ArgumentError("state grid must be a non-empty 1-D array")
        if not np.all(np.isfinite(x)):
            raise ArgumentError("state grid has non-finite entries")
        if np.any(x < 0):
            raise ArgumentError("state grid must be non-negative")
        if np.any(np.diff(x) <= 0):
            raise ArgumentError("state grid must be strictly increasing")
        x.setflags(write=False)
        object.__setattr__(self, "states", x)

    def __len__(self):
        return self.states.size

    def index_of(self, value: float, rtol: float = 1e-12) -> int:
        i = int(np.argmin(np.abs(self.states - value)))
        if abs(self.states[i] - value) > rtol * max(1.0, abs(value)):
            raise ConstructionError(f"{value} is not a grid state")
        return i


@dataclass(frozen=True, eq=False)
class Generator:
    grid: StateGrid
    q: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        n = len(self.grid)
        if q.shape != (n, n):
            raise ArgumentError(f"rate matrix shape {q.shape} does not match grid size {n}")
        if not np.all(np.isfinite(q)):
            raise ArgumentError("rate matrix has non-finite entries")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def x(self) -> np.ndarray:
        return self.grid.states

    @property
    def n_states(self) -> int:
        return len(self.grid)

    def rescaled(self, factor: float) -> "Generator":
        """Same rates on states divided by ``factor`` (price-unit change)."""
        return Generator(StateGrid(self.grid.states / factor), self.q)


def validate_generator(g: Generator, tol: float = ROW_SUM_TOL) -> list[str]:
    """List every violated generator invariant; empty means valid."""
    problems = []
    q = g.q
    n = q.shape[0]
    scale = max(1.0, float(np.max(np.abs(q)))) if q.size else 1.0
    for i in range(n):
        for j in range(n):
            if i != j and q[i, j] < 0:
                problems.append(f"negative off-diagonal rate q[{i},{j}] = {q[i, j]:.6g}")
        if q[i, i] > 0:
            problems.append(f"positive diagonal rate q[{i},{i}] = {q[i, i]:.6g}")
        s = float(q[i].sum())
        if abs(s) > tol * scale:
            problems.append(f"row {i} sums to {s:.6g}, not 0")
    return problems


def transition_matrix(g: Generator, dt: float) -> np.ndarray:
    """P(dt) = exp(G dt), cleaned of Padé round-off.

    Negatives down to -1e-12 are clamped to zero and the row renormalised;
    anything more negative is an error.
    """
    if dt < 0:
        raise ArgumentError(f"dt must be non-negative, got {dt}")
    p = linalg.expm(g.q, dt)
    worst = float(p.min())
    if worst < -CLAMP_TOL:
        raise NumericError(f"transition matrix has entry {worst:.3g} below -{CLAMP_TOL:g}", residual=-worst)
    if worst < 0:
        p = np.where(p < 0, 0.0, p)
        p /= p.sum(axis=1, keepdims=True)
    rows = np.abs(p.sum(axis=1) - 1.0).max()
    if rows > STOCHASTIC_TOL:
        raise NumericError(f"transition matrix rows deviate from 1 by {rows:.3g}", residual=rows)
    return p


@dataclass(frozen=True, eq=False)
class Chain:
    """A generator plus the transition matrix over one monitoring interval."""

    gen: Generator
    delta: float | None = None
    p_delta: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.delta is not None:
            if self.delta <= 0:
                raise ArgumentError(f"monitoring interval must be positive, got {self.delta}")
            if self.p_delta is None:
                p = transition_matrix(self.gen, self.delta)
                p.setflags(write=False)
                object.__setattr__(self, "p_delta", p)

    @property
    def x(self) -> np.ndarray:
        return self.gen.x

    @property
    def q(self) -> np.ndarray:
        return self.gen.q

    @property
    def n_states(self) -> int:
        return self.gen.n_states

    def with_delta(self, delta: float) -> "Chain":
        if self.delta is not None and delta == self.delta:
            return self
        return Chain(self.gen, delta)

    def to_dict(self) -> dict:
        return {
            "format": CHAIN_FORMAT,
            "states": self.x.tolist(),
            "rates": self.q.tolist(),
            "delta": self.delta,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "Chain":
        if d.get("format") != CHAIN_FORMAT:
            raise ArgumentError(f"unsupported chain format {d.get('format')!r}")
        gen = Generator(StateGrid(np.asarray(d["states"], dtype=float)), np.asarray(d["rates"], dtype=float))
        return cls(gen, d.get("delta"))

    @classmethod
    def from_json(cls, text: str) -> "Chain":
        return cls.from_dict(json.loads(text))
