"""CTMC generators approximating the benchmark price models.

Diffusions are discretised by local moment matching on a sinh-stretched grid
that carries the spot as an exact node. Jump models add the Lévy measure of
log-returns integrated over each target cell, and the diffusion drift is set
so the chain's drift is exactly ``r x`` at interior nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy import integrate, special

from .chain import Generator, StateGrid
from .errors import ArgumentError, ConstructionError

VAR_FLOOR = 0.2
JUMP_LOW_FRACTION = 0.01
JUMP_MASS_TOL = 1e-8


@dataclass(frozen=True)
class CIR:
    """dX = kappa (theta_bar - X) dt + sigma sqrt(X) dW."""

    kappa: float
    theta_bar: float
    sigma: float
    r: float

    def __post_init__(self):
        _positive(self, "kappa", "theta_bar", "sigma")


@dataclass(frozen=True)
class CEV:
    """dX = r X dt + sigma X^{beta + 1} dW."""

    sigma: float
    beta: float
    r: float

    def __post_init__(self):
        _positive(self, "sigma")


@dataclass(frozen=True)
class DEJD:
    """Kou double-exponential jump diffusion."""

    sigma: float
    lam: float
    p_up: float
    eta1: float
    eta2: float
    r: float

    def __post_init__(self):
        _positive(self, "sigma", "eta2")
        if self.lam < 0:
            raise ArgumentError("DEJD jump intensity must be non-negative")
        if not 0 <= self.p_up <= 1:
            raise ArgumentError(f"DEJD p_up must lie in [0, 1], got {self.p_up}")
        if not self.eta1 > 1:
            raise ArgumentError(f"DEJD eta1 must exceed 1, got {self.eta1}")

    def cell_mass(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        p, q = self.p_up, 1.0 - self.p_up
        up = p * (np.exp(-self.eta1 * np.maximum(a, 0.0)) - np.exp(-self.eta1 * np.maximum(b, 0.0)))
        down = q * (np.exp(self.eta2 * np.minimum(b, 0.0)) - np.exp(self.eta2 * np.minimum(a, 0.0)))
        return self.lam * (up + down)

    def near_second_moment(self, a: float, b: float) -> float:
        """int_a^b (e^y - 1)^2 nu(dy) for a <= 0 <= b, in closed form.

        Infinite when b = inf and eta1 <= 2.
        """
        if self.lam == 0:
            return 0.0
        if math.isinf(b) and self.eta1 <= 2 and self.p_up > 0:
            return math.inf

        def seg(rate, lo, hi):
            # int_lo^hi e^{rate y} dy
            if rate == 0:
                return hi - lo
            return (math.exp(rate * hi) - math.exp(rate * lo)) / rate

        up = sum(w * seg(c - self.eta1, 0.0, b) for c, w in ((2, 1.0), (1, -2.0), (0, 1.0)))
        down = sum(w * seg(c + self.eta2, a, 0.0) for c, w in ((2, 1.0), (1, -2.0), (0, 1.0)))
        return self.lam * (self.p_up * self.eta1 * up + (1 - self.p_up) * self.eta2 * down)

    def density(self, y):
        y = np.asarray(y, dtype=float)
        return self.lam * np.where(
            y >= 0,
            self.p_up * self.eta1 * np.exp(-self.eta1 * np.abs(y)),
            (1 - self.p_up) * self.eta2 * np.exp(-self.eta2 * np.abs(y)),
        )


@dataclass(frozen=True)
class MJD:
    """Merton jump diffusion with normal log-jumps N(mu_j, sigma_j^2)."""

    sigma: float
    lam: float
    mu_j: float
    sigma_j: float
    r: float

    def __post_init__(self):
        _positive(self, "sigma", "sigma_j")
        if self.lam < 0:
            raise ArgumentError("MJD jump intensity must be non-negative")

    def cell_mass(self, a, b):
        za = (np.asarray(a, dtype=float) - self.mu_j) / self.sigma_j
        zb = (np.asarray(b, dtype=float) - self.mu_j) / self.sigma_j
        # upper-tail differences keep relative accuracy right of the mean
        right = special.ndtr(-za) - special.ndtr(-zb)
        left = special.ndtr(zb) - special.ndtr(za)
        return self.lam * np.where(za > 0, right, left)

    def near_second_moment(self, a: float, b: float) -> float:
        """int_a^b (e^y - 1)^2 nu(dy), via shifted normal CDFs."""
        m, s = self.mu_j, self.sigma_j
        total = 0.0
        for c, w in ((2, 1.0), (1, -2.0), (0, 1.0)):
            shift = m + c * s * s
            mass = special.ndtr((b - shift) / s) - special.ndtr((a - shift) / s)
            total += w * math.exp(c * m + 0.5 * c * c * s * s) * mass
        return self.lam * total

    def density(self, y):
        z = (np.asarray(y, dtype=float) - self.mu_j) / self.sigma_j
        return self.lam * np.exp(-0.5 * z * z) / (self.sigma_j * math.sqrt(2 * math.pi))


@dataclass(frozen=True)
class CGMY:
    """Pure-jump CGMY: nu(y) = C e^{-G|y|}/|y|^{1+Y} (y<0), C e^{-M y}/y^{1+Y} (y>0)."""

    C: float
    G: float
    M: float
    Y: float
    r: float

    def __post_init__(self):
        _positive(self, "C", "G", "M")
        if not self.Y < 2:
            raise ArgumentError(f"CGMY Y must be < 2, got {self.Y}")
        if not self.M > 1:
            raise ArgumentError(f"CGMY M must exceed 1 for a finite forward, got {self.M}")

    def _tail(self, rate, u):
        # int_u^inf C e^{-rate y} y^{-1-Y} dy for u > 0
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        finite = np.isfinite(u)
        out[finite] = self.C * rate**self.Y * upper_gamma(-self.Y, rate * u[finite])
        return out

    def cell_mass(self, a, b):
        """Lévy mass of [a, b]; the cell must not straddle 0."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if np.any((a < 0) & (b > 0)):
            raise ArgumentError("CGMY cell mass is infinite on a cell containing 0")
        pos = a >= 0
        out = np.empty(np.broadcast(a, b).shape)
        ap, bp = np.broadcast_to(a, out.shape)[pos], np.broadcast_to(b, out.shape)[pos]
        out[pos] = self._tail(self.M, ap) - self._tail(self.M, bp)
        an, bn = np.broadcast_to(a, out.shape)[~pos], np.broadcast_to(b, out.shape)[~pos]
        out[~pos] = self._tail(self.G, -bn) - self._tail(self.G, -an)
        return out

    def near_second_moment(self, a: float, b: float) -> float:
        """int_a^b (e^y - 1)^2 nu(dy) for a <= 0 <= b.

        The integrand behaves like y^{1-Y} at 0, so each side is integrated
        with an algebraic end-point weight.
        """

        def side(rate, sign, upper):
            if math.isinf(upper) and sign > 0 and rate <= 2:
                return math.inf

            def smooth(u):
                ratio = np.expm1(sign * u) / u if u > 0 else 1.0
                return ratio**2 * self.C * np.exp(-rate * u)

            lim = min(upper, 1.0)
            val, _ = integrate.quad(smooth, 0.0, lim, weight="alg", wvar=(1.0 - self.Y, 0.0))
            if upper > 1.0:
                tail, _ = integrate.quad(
                    lambda u: np.expm1(sign * u) ** 2 * self.C * np.exp(-rate * u) * u ** (-1.0 - self.Y),
                    1.0, upper, epsrel=1e-12, limit=200,
                )
                val += tail
            return val

        return side(self.M, 1.0, b) + side(self.G, -1.0, -a)

    def density(self, y):
        y = np.asarray(y, dtype=float)
        ay = np.abs(y)
        rate = np.where(y > 0, self.M, self.G)
        return self.C * np.exp(-rate * ay) / ay ** (1 + self.Y)


ModelSpec = Union[CIR, CEV, DEJD, MJD, CGMY]
JumpModel = Union[DEJD, MJD, CGMY]


def _positive(obj, *names):
    for name in names:
        v = getattr(obj, name)
        if not v > 0:
            raise ArgumentError(f"{type(obj).__name__}.{name} must be positive, got {v}")


def upper_gamma(s: float, x):
    """Upper incomplete gamma Gamma(s, x) for any real s and x > 0.

    Negative non-integer orders are lifted to s > 0 with
    Gamma(s, x) = (Gamma(s + 1, x) - x^s e^{-x}) / s.
    """
    x = np.asarray(x, dtype=float)
    if s > 0:
        return special.gammaincc(s, x) * special.gamma(s)
    if float(s).is_integer():
        n = int(-s)
        return x ** (-n) * special.expn(n + 1, x)
    return (upper_gamma(s + 1, x) - x**s * np.exp(-x)) / s


@dataclass(frozen=True)
class GridSpec:
    """Grid construction settings.

    ``low``/``high`` default to a span derived from the model (see
    ``default_span``); ``concentration`` is the sinh stretch scale as a
    fraction of spot (smaller packs more nodes near spot).
    """

    n_states: int = 50
    low: float | None = None
    high: float | None = None
    concentration: float = 0.03
    boundary: str = "reflecting"
    mass_tol: float = JUMP_MASS_TOL

    def __post_init__(self):
        if self.n_states < 3:
            raise ArgumentError(f"grid needs at least 3 states, got {self.n_states}")
        if self.boundary not in ("reflecting", "absorbing"):
            raise ArgumentError(f"unknown boundary {self.boundary!r}")
        if not self.concentration > 0:
            raise ArgumentError("concentration must be positive")
        if self.low is not None and self.low < 0:
            raise ArgumentError("grid low bound must be >= 0")


def make_grid(spot: float, low: float, high: float, n_states: int, concentration: float) -> StateGrid:
    """sinh-stretched grid on [low, high] with ``spot`` as an exact node."""
    if not (0 <= low < spot < high):
        raise ConstructionError(f"need 0 <= low < spot < high, got low={low}, spot={spot}, high={high}")
    alpha = concentration * spot
    c_lo = math.asinh((low - spot) / alpha)
    c_hi = math.asinh((high - spot) / alpha)
    u_spot = -c_lo / (c_hi - c_lo)
    n_lo = min(max(int(round(u_spot * (n_states - 1))), 1), n_states - 2)
    c = np.concatenate([np.linspace(c_lo, 0.0, n_lo + 1)[:-1], np.linspace(0.0, c_hi, n_states - n_lo)])
    x = spot + alpha * np.sinh(c)
    x[n_lo] = spot
    x[0] = low
    x[-1] = high
    return StateGrid(x)


def _total_log_vol(spec: ModelSpec, spot: float) -> float:
    if isinstance(spec, CIR):
        return spec.sigma / math.sqrt(max(spot, spec.theta_bar))
    if isinstance(spec, CEV):
        return spec.sigma * spot**spec.beta
    if isinstance(spec, DEJD):
        q = 1 - spec.p_up
        return math.sqrt(spec.sigma**2 + spec.lam * (2 * spec.p_up / spec.eta1**2 + 2 * q / spec.eta2**2))
    if isinstance(spec, MJD):
        return math.sqrt(spec.sigma**2 + spec.lam * (spec.mu_j**2 + spec.sigma_j**2))
    if isinstance(spec, CGMY):
        return math.sqrt(spec.C * special.gamma(2 - spec.Y) * (spec.M ** (spec.Y - 2) + spec.G ** (spec.Y - 2)))
    raise ArgumentError(f"unknown model {spec!r}")


def default_span(spec: ModelSpec, spot: float, T: float, z: float = 5.5) -> tuple[float, float]:
    """Span leaving < ~1e-6 of a lognormal proxy's mass outside by time T.

    Jump models instead start at 1% of spot, and the top is pushed out until
    the spot row's jump mass beyond the grid is a tenth of the truncation
    tolerance.
    """
    vol = _total_log_vol(spec, spot)
    width = z * vol * math.sqrt(T)
    r = getattr(spec, "r", 0.0)
    low = spot * math.exp(min(0.0, r * T) - width)
    high = spot * math.exp(max(0.0, r * T) + width)
    if isinstance(spec, CIR):
        low = 0.0
        high = max(high, 2 * spec.theta_bar)
    if isinstance(spec, (DEJD, MJD, CGMY)):
        # heavy down-jumps: a lognormal proxy span cuts the left tail far too early
        low = JUMP_LOW_FRACTION * spot
        intensity = _row_intensity(spec)
        if intensity > 0:
            while spec.cell_mass(math.log(high / spot), np.inf) > 0.1 * JUMP_MASS_TOL * intensity:
                high *= 1.25
    return low, high


def _row_intensity(spec: JumpModel, eps: float = 0.01) -> float:
    if isinstance(spec, CGMY):
        return float(spec.cell_mass(eps, np.inf) + spec.cell_mass(-np.inf, -eps))
    return spec.lam


def build_grid(spec: ModelSpec, grid: GridSpec, spot: float, T: float) -> StateGrid:
    low, high = default_span(spec, spot, T)
    if grid.low is not None:
        low = grid.low
    if grid.high is not None:
        high = grid.high
    return make_grid(spot, low, high, grid.n_states, grid.concentration)


def repaired_nodes(x: np.ndarray, mu: np.ndarray, var: np.ndarray) -> np.ndarray:
    """Interior nodes (as a mask over all nodes) where central moment matching
    would give a negative rate, so only the first moment is matched there."""
    mask = np.zeros(x.size, dtype=bool)
    if x.size >= 3:
        mask[1:-1] = _central_rates(x, mu, var)[2]
    return mask


def _central_rates(x, mu, var):
    h = np.diff(x)
    hm, hp = h[:-1], h[1:]
    mi, vi = mu[1:-1], var[1:-1]
    up = (vi + mi * hm) / (hp * (hp + hm))
    dn = (vi - mi * hp) / (hm * (hp + hm))
    return up, dn, (up < 0) | (dn < 0)


def _tridiagonal(x: np.ndarray, mu: np.ndarray, var: np.ndarray, boundary: str) -> np.ndarray:
    n = x.size
    q = np.zeros((n, n))
    if n == 1:
        return q
    h = np.diff(x)
    hm, hp = h[:-1], h[1:]
    mi, vi = mu[1:-1], var[1:-1]
    up, dn, bad = _central_rates(x, mu, var)
    if np.any(bad):
        # first-moment upwind matching where central rates go negative
        up_w = vi / (hp * (hp + hm)) + np.maximum(mi, 0.0) / hp
        dn_w = vi / (hm * (hp + hm)) + np.maximum(-mi, 0.0) / hm
        up = np.where(bad, up_w, up)
        dn = np.where(bad, dn_w, dn)
    idx = np.arange(1, n - 1)
    q[idx, idx + 1] = up
    q[idx, idx - 1] = dn
    if boundary == "reflecting":
        q[0, 1] = max(mu[0], 0.0) / h[0] + 0.5 * var[0] / h[0] ** 2
        q[-1, -2] = max(-mu[-1], 0.0) / h[-1] + 0.5 * var[-1] / h[-1] ** 2
    return q


def _finish(x: np.ndarray, q: np.ndarray) -> Generator:
    np.fill_diagonal(q, 0.0)
    np.fill_diagonal(q, -q.sum(axis=1))
    return Generator(StateGrid(x), q)


def build_diffusion_generator(
    drift: Callable[[np.ndarray], np.ndarray],
    vol: Callable[[np.ndarray], np.ndarray],
    grid: StateGrid,
    boundary: str = "reflecting",
) -> Generator:
    """Birth-death generator matching drift and vol^2 at every interior node."""
    x = grid.states
    mu = np.asarray(drift(x), dtype=float) * np.ones_like(x)
    var = np.asarray(vol(x), dtype=float) ** 2 * np.ones_like(x)
    interior = var[1:-1]
    if np.any(interior <= 0):
        i = int(np.argmax(interior <= 0)) + 1
        raise ConstructionError(f"volatility must be positive at interior node {i} (x={x[i]:.6g})")
    return _finish(x, _tridiagonal(x, mu, var, boundary))


def _cell_edges(x: np.ndarray) -> np.ndarray:
    mids = 0.5 * (x[1:] + x[:-1])
    top = x[-1] + 0.5 * (x[-1] - x[-2])
    return np.concatenate([[0.0], mids, [top]])


def jump_rates(spec: JumpModel, grid: StateGrid, mass_tol: float = JUMP_MASS_TOL, spot_index: int | None = None):
    """Explicit jump rates and the near-jump variance left to the diffusion part.

    Jumps landing two or more cells away from node i become rates q_ij equal
    to the Lévy mass of the target cell (log-space, relative to x_i). Jumps
    landing in cells i-1, i, i+1 are folded into the birth-death part through
    their second moment int (e^y - 1)^2 nu(dy). Returns
    ``(rates, near_var, overflow)``; ``overflow`` is each row's mass beyond
    the top cell edge, which is lumped into the top state.
    """
    x = grid.states
    n = x.size
    edges = _cell_edges(x)
    rates = np.zeros((n, n))
    near_var = np.zeros(n)
    overflow = np.zeros(n)
    idx = np.arange(n)
    with np.errstate(divide="ignore"):
        for i in range(n):
            if x[i] <= 0:
                continue
            le = np.log(edges / x[i])
            a, b = le[:-1], le[1:]
            lo, hi = max(i - 1, 0), min(i + 1, n - 1)
            near_var[i] = spec.near_second_moment(a[lo], b[hi])
            far = np.abs(idx - i) >= 2
            row = np.zeros(n)
            row[far] = spec.cell_mass(a[far], b[far])
            beyond = float(spec.cell_mass(le[-1], np.inf))
            if hi < n - 1:
                row[-1] += beyond
            else:
                near_var[i] += float(np.sum(_beyond_second_moment(spec, le[-1])))
            overflow[i] = beyond
            rates[i] = row
    if spot_index is not None:
        intensity = rates[spot_index].sum()
        if intensity > 0 and overflow[spot_index] > mass_tol * intensity:
            raise ConstructionError(
                f"jump mass {overflow[spot_index]:.3g} beyond grid top exceeds {mass_tol:g} of row intensity; widen the grid"
            )
    return rates, near_var, overflow


def _beyond_second_moment(spec: JumpModel, u: float) -> float:
    # mass beyond the top edge from the top two rows, counted as a move to the edge
    return float(spec.cell_mass(u, np.inf)) * math.expm1(u) ** 2


def build_jump_generator(spec: JumpModel, grid: StateGrid, boundary: str = "reflecting",
                         mass_tol: float = JUMP_MASS_TOL, spot: float | None = None) -> Generator:
    """Jump-diffusion generator with exact risk-neutral drift at interior nodes."""
    x = grid.states
    spot_index = grid.index_of(spot) if spot is not None else None
    rates, near_var, _ = jump_rates(spec, grid, mass_tol, spot_index)
    jump_drift = rates @ x - rates.sum(axis=1) * x
    sigma = getattr(spec, "sigma", 0.0)
    mu = spec.r * x - jump_drift
    # diffusion carries whatever jump variance the explicit rates miss,
    # floored at a fraction of the near-cell variance
    explicit = rates @ x**2 - 2 * x * (rates @ x) + rates.sum(axis=1) * x**2
    total = spec.near_second_moment(-np.inf, np.inf)
    # with an infinite price-jump variance there is nothing finite to match
    missing = total * x**2 - explicit if math.isfinite(total) else near_var * x**2
    var = sigma**2 * x**2 + np.maximum(missing, VAR_FLOOR * near_var * x**2)
    if np.any(var[1:-1] <= 0):
        raise ConstructionError("diffusion part has zero variance at an interior node; refine the grid or add sigma")
    q = _tridiagonal(x, mu, var, boundary) + rates
    return _finish(x, q)


def build_generator(spec: ModelSpec, grid: StateGrid, boundary: str = "reflecting",
                    mass_tol: float = JUMP_MASS_TOL, spot: float | None = None) -> Generator:
    if isinstance(spec, CIR):
        return build_diffusion_generator(
            lambda x: spec.kappa * (spec.theta_bar - x), lambda x: spec.sigma * np.sqrt(x), grid, boundary
        )
    if isinstance(spec, CEV):
        return build_diffusion_generator(
            lambda x: spec.r * x, lambda x: spec.sigma * x ** (spec.beta + 1.0), grid, boundary
        )
    if isinstance(spec, (DEJD, MJD, CGMY)):
        return build_jump_generator(spec, grid, boundary, mass_tol, spot)
    raise ArgumentError(f"unknown model {spec!r}")


def risk_neutral_drift_check(g: Generator, r: float) -> float:
    """max over interior nodes of |(G x)_i - r x_i|."""
    x = g.x
    if x.size < 3:
        return float(np.max(np.abs(g.q @ x - r * x)))
    defect = g.q @ x - r * x
    return float(np.max(np.abs(defect[1:-1])))


def cell_mass_quadrature(spec: JumpModel, a: float, b: float) -> float:
    """Adaptive-quadrature cross-check of ``spec.cell_mass`` on one cell."""
    val, _ = integrate.quad(spec.density, a, b, epsabs=0.0, epsrel=1e-12, limit=200)
    return val
