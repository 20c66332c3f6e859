"""Continuous-time plant, multirate timing geometry, and generalized ZOH blocks.

All instants are carried internally as exact rationals in units of the hold
period ``T_a``; seconds are derived views. With ``R = T_s / T_a = beta / alpha``
a sensing index ``j`` sits at ``j_delta * R`` hold units, and a cluster spans
``beta`` hold units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import IrrationalRatio, NegativeDuration
from .numlin import as_matrix, mat_exp, zoh_pair


@dataclass(frozen=True, eq=False)
class LtiSystem:
    """Continuous-time triple ``x' = A x + B u``, ``y = C x``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        B = as_matrix(self.B, "B")
        C = as_matrix(np.atleast_2d(np.asarray(self.C, dtype=float)), "C")
        n = A.shape[0]
        if A.shape != (n, n) or n < 1:
            raise ValueError(f"A must be square and non-empty, got {A.shape}")
        if B.shape[0] != n or B.shape[1] < 1:
            raise ValueError(f"B must be {n}xp with p >= 1, got {B.shape}")
        if C.shape[1] != n or C.shape[0] < 1:
            raise ValueError(f"C must be qx{n} with q >= 1, got {C.shape}")
        for name, M in (("A", A), ("B", B), ("C", C)):
            M = M.copy()
            M.setflags(write=False)
            object.__setattr__(self, name, M)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def p(self):
        return self.B.shape[1]

    @property
    def q(self):
        return self.C.shape[0]

    def transfer(self, s):
        """Evaluate ``C (sI - A)^{-1} B`` at a complex frequency ``s``."""
        return self.C @ np.linalg.solve(s * np.eye(self.n) - self.A, self.B)

    def __eq__(self, other):
        if not isinstance(other, LtiSystem):
            return NotImplemented
        return all(np.array_equal(getattr(self, k), getattr(other, k)) for k in "ABC")

    __hash__ = None


def _rational(x, max_denominator, rtol, what):
    approx = Fraction(x).limit_denominator(max_denominator)
    if abs(float(approx) - x) > rtol * max(abs(x), 1.0):
        raise IrrationalRatio(
            f"{what} = {x!r} has no rational approximation with denominator "
            f"<= {max_denominator} (best {approx}, error {abs(float(approx) - x):.2e})"
        )
    return approx


def rationalize(T_a, T_s, max_denominator=1000, rtol=1e-9):
    """Coprime ``(alpha, beta)`` with ``T_s / T_a ~= beta / alpha``.

    >>> rationalize(1.0, 0.4)
    (5, 2)
    """
    if not (T_a > 0 and T_s > 0):
        raise ValueError("periods must be positive")
    r = _rational(T_s / T_a, max_denominator, rtol, "T_s/T_a")
    return r.denominator, r.numerator


def shifted_index(j, delta):
    """Sensing index ``j_delta = delta + floor(j - delta)``.

    Equals ``(j - 1) + delta`` for ``delta > 0`` and ``j`` for ``delta == 0``.
    """
    if int(j) != j or j < 1:
        raise ValueError(f"sensing index must be a natural number >= 1, got {j}")
    if not 0 <= delta < 1:
        raise ValueError(f"normalized offset must lie in [0, 1), got {delta}")
    return delta + math.floor(j - delta)


@dataclass(frozen=True)
class Schedule:
    """Instants of one cluster, in seconds and in exact hold units."""

    k: int
    actuation_units: tuple
    sensing_units: tuple
    T_a: float

    @property
    def actuation_times(self):
        return tuple(float(u) * self.T_a for u in self.actuation_units)

    @property
    def sensing_times(self):
        return tuple(float(u) * self.T_a for u in self.sensing_units)


@dataclass(frozen=True)
class TimingGrid:
    """Hold period ``T_a``, sampling period ``T_s`` and sensing offset (seconds).

    ``T_s / T_a`` and ``offset / T_s`` are rationalized on construction; every
    derived quantity uses the rationalized values.
    """

    T_a: float
    T_s: float
    offset: float = 0.0
    max_denominator: int = 1000
    rtol: float = 1e-9
    alpha: int = field(init=False)
    beta: int = field(init=False)
    ratio: Fraction = field(init=False)
    delta: Fraction = field(init=False)

    def __post_init__(self):
        alpha, beta = rationalize(self.T_a, self.T_s, self.max_denominator, self.rtol)
        if not 0.0 <= self.offset < self.T_s:
            raise ValueError(f"offset must lie in [0, T_s), got {self.offset}")
        delta = _rational(self.offset / self.T_s, self.max_denominator, self.rtol, "offset/T_s")
        if delta >= 1:
            raise ValueError("normalized offset rounds to 1; use a smaller offset")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "ratio", Fraction(beta, alpha))
        object.__setattr__(self, "delta", delta)

    @property
    def R(self):
        return float(self.ratio)

    @property
    def cluster_len(self):
        return self.beta * self.T_a

    def seconds(self, units):
        """Convert exact hold units to seconds."""
        return float(units) * self.T_a

    def sensing_units(self, j):
        """Hold-unit position of the ``j``-th analyzed sample (``j >= 1``)."""
        return shifted_index(j, self.delta) * self.ratio

    def schedule(self, k):
        if k < 1:
            raise ValueError("cluster index starts at 1")
        start = (k - 1) * self.beta
        act = tuple(Fraction(start + i) for i in range(self.beta))
        sens = tuple(self.sensing_units((k - 1) * self.alpha + l) for l in range(1, self.alpha + 1))
        return Schedule(k, act, sens, self.T_a)


def _units(grid, l, m):
    return Fraction(l) * grid.ratio - Fraction(m)


def discretize(sys, grid):
    """Single-rate pair ``(A_d, B_d)`` over one hold period."""
    return zoh_pair(sys.A, sys.B, grid.T_a)


def ad_block(sys, grid, l, m):
    """``e^{A (l T_s - m T_a)}``; the exponent may have either sign."""
    return mat_exp(sys.A, grid.seconds(_units(grid, l, m)))


def bd_block(sys, grid, l, m):
    """``(int_0^{l T_s - m T_a} e^{A s} ds) B``; the span must be non-negative."""
    u = _units(grid, l, m)
    if u < 0:
        raise NegativeDuration(f"span l*T_s - m*T_a = {grid.seconds(u)} s is negative")
    return zoh_pair(sys.A, sys.B, grid.seconds(u))[1]
