"""Dense complex linear-algebra kernels.

Matrices and vectors are plain numpy arrays (``complex128`` or ``float64``).
Every public function validates shapes and finiteness and raises the
package's error types instead of returning NaNs.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from .errors import ArgumentError, NumericError

RESIDUAL_TOL = 1e-10
CONDITION_CAP = 1e13
ACTION_TOL = 2.0**-53
_MAX_TAYLOR_TERMS = 80
_MAX_ACTION_STEPS = 1_000_000
# ||A/s||_1 is kept below this per Taylor step; ~30 terms then reach unit roundoff.
_STEP_NORM = 4.0


def as_matrix(m, name="matrix") -> np.ndarray:
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ArgumentError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ArgumentError(f"{name} has non-finite entries")
    return a


def as_vector(v, name="vector") -> np.ndarray:
    a = np.asarray(v)
    if a.ndim != 1 or a.shape[0] < 1:
        raise ArgumentError(f"{name} must be a non-empty 1-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ArgumentError(f"{name} has non-finite entries")
    return a


def _square(m, name="matrix") -> np.ndarray:
    a = as_matrix(m, name)
    if a.shape[0] != a.shape[1]:
        raise ArgumentError(f"{name} must be square, got shape {a.shape}")
    return a


def max_norm(a) -> float:
    """Largest entry modulus, max |a_ij|."""
    return float(np.max(np.abs(a)))


def inf_norm(a) -> float:
    """Induced infinity norm (max absolute row sum)."""
    return float(np.max(np.sum(np.abs(a), axis=1)))


def mat_vec(m, v) -> np.ndarray:
    a = as_matrix(m)
    x = as_vector(v)
    if a.shape[1] != x.shape[0]:
        raise ArgumentError(f"cannot multiply {a.shape} matrix by length-{x.shape[0]} vector")
    return a @ x


def mat_mul(a, b) -> np.ndarray:
    a = as_matrix(a, "left")
    b = as_matrix(b, "right")
    if a.shape[1] != b.shape[0]:
        raise ArgumentError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def mat_inverse(m, residual_tol: float = RESIDUAL_TOL, condition_cap: float = CONDITION_CAP) -> np.ndarray:
    """Inverse of a square matrix, with a max-norm residual check on ``m @ inv - I``."""
    a = _square(m)
    n = a.shape[0]
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > condition_cap:
        raise NumericError(f"matrix is singular or ill-conditioned (cond={cond:.3g})", residual=math.inf)
    inv = np.linalg.inv(a)
    residual = max_norm(a @ inv - np.eye(n))
    if residual > residual_tol:
        raise NumericError(f"inverse residual {residual:.3g} exceeds {residual_tol:.1g}", residual=residual)
    return inv


def expm(m, t: float = 1.0) -> np.ndarray:
    """Matrix exponential e^{m t}.

    Scaling-and-squaring with a degree-13 Padé approximant (scipy's
    implementation of Al-Mohy & Higham 2009).
    """
    a = _square(m)
    if not np.isscalar(t) or not np.isfinite(t):
        raise ArgumentError(f"time must be a finite scalar, got {t!r}")
    if np.isrealobj(a) and np.isrealobj(t) and t < 0:
        raise ArgumentError(f"time must be non-negative, got {t}")
    with np.errstate(over="raise", invalid="raise"):
        try:
            out = scipy.linalg.expm(a * t)
        except FloatingPointError as exc:
            raise NumericError(f"overflow in matrix exponential: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise NumericError("overflow in matrix exponential")
    return out


def expm_stack(ms: np.ndarray, t: float = 1.0) -> np.ndarray:
    """e^{m t} for a stack of square matrices with shape (J, N, N)."""
    a = np.asarray(ms)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ArgumentError(f"expected a (J, N, N) stack, got shape {a.shape}")
    if np.isrealobj(t) and t < 0:
        raise ArgumentError(f"time must be non-negative, got {t}")
    with np.errstate(over="raise", invalid="raise"):
        try:
            out = scipy.linalg.expm(a * t)
        except FloatingPointError as exc:
            raise NumericError(f"overflow in matrix exponential: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise NumericError("overflow in matrix exponential")
    return out


def _taylor_action(apply, norm1: float, shift: np.ndarray, t: float, v: np.ndarray, tol: float) -> np.ndarray:
    """Truncated-Taylor evaluation of exp(t (A - shift)) v, then rescaled by exp(t shift).

    ``apply(w)`` returns ``(A - shift) w`` for a block ``w`` (columns may
    carry different shifts). ``norm1`` bounds the 1-norm of every shifted
    operator.
    """
    tn = norm1 * abs(t)
    steps = max(1, math.ceil(tn / _STEP_NORM))
    if steps > _MAX_ACTION_STEPS:
        raise NumericError(f"expm_action needs {steps} steps; requested accuracy unreachable")
    h = t / steps
    eta = np.exp(shift * h)
    f = v.astype(complex, copy=True)
    for _ in range(steps):
        b = f
        c1 = np.max(np.abs(b), axis=0)
        for j in range(1, _MAX_TAYLOR_TERMS + 1):
            b = apply(b) * (h / j)
            f = f + b
            c2 = np.max(np.abs(b), axis=0)
            if np.all(c1 + c2 <= tol * np.max(np.abs(f), axis=0)):
                break
            c1 = c2
        else:
            raise NumericError("Taylor series failed to converge in expm_action")
        f = f * eta
    return f


def expm_action(m, t: float, v, tol: float = ACTION_TOL) -> np.ndarray:
    """Compute e^{m t} v without forming e^{m t}.

    The matrix is shifted by its mean diagonal, then e^{t m} v is built from
    ``s`` truncated Taylor steps with ``||t m / s||_1`` at most 4.
    """
    a = _square(m)
    x = as_vector(v)
    if a.shape[1] != x.shape[0]:
        raise ArgumentError(f"cannot apply {a.shape} matrix to length-{x.shape[0]} vector")
    n = a.shape[0]
    mu = np.trace(a) / n
    shifted = a - mu * np.eye(n)
    norm1 = float(np.max(np.sum(np.abs(shifted), axis=0)))
    out = _taylor_action(lambda w: shifted @ w, norm1, np.asarray([mu]), t, x[:, None], tol)
    return out[:, 0]


def expm_action_diag_batch(base, diag_shifts, t: float, v, tol: float = ACTION_TOL) -> np.ndarray:
    """Column-wise e^{(base + diag(d_j)) t} v_j for a block of diagonal shifts.

    ``diag_shifts`` is N x J: column j holds the diagonal added to ``base``
    for the j-th system. ``v`` is either a length-N vector (shared) or N x J.
    Used to evaluate e^{(G - theta D) t} 1 for many theta in one sweep.
    """
    a = _square(base, "base")
    d = np.asarray(diag_shifts)
    if d.ndim == 1:
        d = d[:, None]
    n = a.shape[0]
    if d.shape[0] != n:
        raise ArgumentError(f"diagonal block has {d.shape[0]} rows, matrix has {n}")
    vv = np.asarray(v)
    if vv.ndim == 1:
        vv = np.repeat(vv[:, None], d.shape[1], axis=1)
    if vv.shape != d.shape:
        raise ArgumentError(f"vector block shape {vv.shape} does not match {d.shape}")
    diag = np.diag(a)[:, None] + d
    mu = diag.mean(axis=0)
    off = a - np.diag(np.diag(a))
    shifted_diag = diag - mu
    col_off = np.sum(np.abs(off), axis=0)
    norm1 = float(np.max(col_off[:, None] + np.abs(shifted_diag)))

    def apply(w):
        return off @ w + shifted_diag * w

    return _taylor_action(apply, norm1, mu, t, vv, tol)


def neumann_inverse_check(a, terms: int) -> np.ndarray:
    """Partial Neumann sum sum_{k=0}^{terms} (I - a)^k.

    Requires ``||I - a|| < 1`` in the induced infinity norm, which makes the
    series converge to ``a^{-1}`` with monotonically decreasing residual.
    """
    m = _square(a)
    if terms < 0:
        raise ArgumentError("terms must be non-negative")
    n = m.shape[0]
    e = np.eye(n) - m
    if inf_norm(e) >= 1.0:
        raise ArgumentError(f"||I - a|| = {inf_norm(e):.4g} >= 1; Neumann series not guaranteed")
    total = np.eye(n, dtype=np.result_type(m, float))
    power = np.eye(n, dtype=total.dtype)
    for _ in range(terms):
        power = power @ e
        total = total + power
    return total
