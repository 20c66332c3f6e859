"""Dense real-matrix numerics.

Matrix exponentials, zero-order-hold integrals, and the rank-revealing
operations (kernel bases, range inclusion, minimum-norm solves) that turn the
exact-arithmetic feasibility conditions into decidable floating-point tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InconsistentSystem, NegativeDuration


@dataclass(frozen=True)
class Tolerances:
    """Numerical cutoffs.

    rank_rtol
        Singular values below ``rank_rtol * sigma_max`` count as zero.
    residual_atol
        Bound on solve and containment residuals.
    """

    rank_rtol: float = 1e-9
    residual_atol: float = 1e-8

    def __post_init__(self):
        if not (0.0 < self.rank_rtol < 1.0):
            raise ValueError(f"rank_rtol must lie in (0, 1), got {self.rank_rtol}")
        if not self.residual_atol > 0.0:
            raise ValueError(f"residual_atol must be positive, got {self.residual_atol}")


DEFAULT_TOL = Tolerances()


def as_matrix(M, name="matrix"):
    """Return ``M`` as a finite 2-D float array (vectors become columns)."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def mat_exp(A, t=1.0):
    """Matrix exponential ``e^{A t}``.

    Uses scaling-and-squaring with a diagonal Pade approximant (degree picked
    from the 3/5/7/9/13 ladder by the 1-norm). ``t`` may be negative.
    """
    A = as_matrix(A, "A")
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got {A.shape}")
    t = float(t)
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    if t == 0.0:
        return np.eye(A.shape[0])
    return scipy.linalg.expm(A * t)


def zoh_pair(A, B, t):
    """Return ``(e^{At}, (int_0^t e^{As} ds) B)``.

    Both blocks come from one exponential of the augmented matrix
    ``[[A, B], [0, 0]] * t``.
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    n = A.shape[0]
    if A.shape != (n, n) or B.shape[0] != n:
        raise ValueError(f"dimension mismatch: A {A.shape}, B {B.shape}")
    t = float(t)
    if t < 0.0:
        raise NegativeDuration(f"zero-order-hold span must be >= 0, got {t}")
    p = B.shape[1]
    if t == 0.0:
        return np.eye(n), np.zeros((n, p))
    aug = np.zeros((n + p, n + p))
    aug[:n, :n] = A
    aug[:n, n:] = B
    E = scipy.linalg.expm(aug * t)
    return E[:n, :n], E[:n, n:]


def _singular_values(M):
    if M.size == 0:
        return np.zeros(0)
    return np.linalg.svd(M, compute_uv=False)


def rank(M, tol=DEFAULT_TOL):
    """Numerical rank with relative cutoff ``tol.rank_rtol``."""
    M = as_matrix(M)
    s = _singular_values(M)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol.rank_rtol * s[0]))


def _normalize_signs(V, eps=1e-12):
    # first component that is clearly nonzero is made positive
    V = V.copy()
    for j in range(V.shape[1]):
        col = V[:, j]
        big = np.flatnonzero(np.abs(col) > eps * max(np.abs(col).max(), 1.0))
        if big.size and col[big[0]] < 0:
            V[:, j] = -col
    return V


def kernel_basis(M, tol=DEFAULT_TOL):
    """Orthonormal basis of the numerical null space of ``M`` as columns.

    Returns an ``(ncols, 0)`` array when the kernel is trivial. Each column is
    sign-normalized so its first clearly nonzero entry is positive.
    """
    M = as_matrix(M)
    m, k = M.shape
    if m == 0 or not np.any(M):
        return np.eye(k)
    _, s, vt = np.linalg.svd(M, full_matrices=True)
    r = int(np.sum(s > tol.rank_rtol * s[0]))
    return _normalize_signs(vt[r:].T)


def range_contained(M, V, tol=DEFAULT_TOL):
    """True iff ``im V`` lies inside ``im M``, i.e. ``rank([M | V]) == rank(M)``."""
    M = as_matrix(M, "M")
    V = as_matrix(V, "V")
    if M.shape[0] != V.shape[0]:
        raise ValueError(f"row-count mismatch: {M.shape[0]} vs {V.shape[0]}")
    norm_m = np.linalg.norm(M, 2) if M.size else 0.0
    norm_v = np.linalg.norm(V, 2) if V.size else 0.0
    if norm_v == 0.0:
        return True
    if norm_m == 0.0:
        return norm_v <= tol.residual_atol
    # rescaling V leaves its range unchanged but keeps the rank cutoff fair
    V = V * (norm_m / norm_v)
    return rank(np.hstack([M, V]), tol) == rank(M, tol)


def min_norm_solve(M, b, tol=DEFAULT_TOL):
    """Minimum-norm ``x`` with ``M x = b``.

    Raises InconsistentSystem when ``||Mx - b||`` exceeds
    ``residual_atol * max(1, ||b||)``.
    """
    M = as_matrix(M, "M")
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.shape[0] != M.shape[0]:
        raise ValueError(f"b has length {b.shape[0]}, expected {M.shape[0]}")
    if not np.any(b):
        return np.zeros(M.shape[1])
    x = np.linalg.lstsq(M, b, rcond=tol.rank_rtol)[0]
    resid = np.linalg.norm(M @ x - b)
    bound = tol.residual_atol * max(1.0, np.linalg.norm(b))
    if resid > bound:
        raise InconsistentSystem(
            f"residual {resid:.3e} exceeds {bound:.3e}; right-hand side is not in the range"
        )
    return x
