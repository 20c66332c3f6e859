"""Cluster-lifted description of the multirate error dynamics.

One cluster holds ``beta`` attack holds and ``alpha`` output samples. Stacking
them turns the multirate loop into a time-invariant recursion on the terminal
state ``xc[k] = x(k * beta * T_a)``::

    x_stack<k> = Abar_alpha xc[k-1] + Pi    a<k>
    xc[k]      = Ad^beta    xc[k-1] + Phi_c a<k>
    x(t_k)     = Abar_star  xc[k-1] + Phi_star a<k>
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .plant import LtiSystem, TimingGrid, ad_block, bd_block, discretize, shifted_index
from .numlin import mat_exp


def _frozen(M):
    M = np.ascontiguousarray(M, dtype=float)
    M.setflags(write=False)
    return M


def parse_fraction(value, max_denominator=1000):
    """Accept ``Fraction``, int, float or a ``"p/q"`` string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(float(value)).limit_denominator(max_denominator)


@dataclass(frozen=True, eq=False)
class LiftedCluster:
    sys: LtiSystem
    grid: TimingGrid
    Ad: np.ndarray
    Bd: np.ndarray
    Pi: np.ndarray
    Phi_c: np.ndarray
    Abar_alpha: np.ndarray
    Ad_beta: np.ndarray

    @property
    def Cstack(self):
        """Block-diagonal output map ``I_alpha (x) C``."""
        return np.kron(np.eye(self.grid.alpha), self.sys.C)

    @property
    def CPi(self):
        return self.Cstack @ self.Pi

    @property
    def CAbar(self):
        return self.Cstack @ self.Abar_alpha


@dataclass(frozen=True, eq=False)
class DisruptionSpec:
    """Normalized disruption time ``t_star`` in (0, 1] and its lifted maps."""

    t_star: Fraction
    Phi_star: np.ndarray
    Abar_star: np.ndarray
    grid: TimingGrid

    def offset_units(self):
        """Position of the disruption instant inside a cluster, in hold units."""
        return self.t_star * self.grid.beta

    def time(self, k):
        """Absolute disruption instant ``t_k`` (seconds) of cluster ``k``."""
        return self.grid.seconds((k - 1) * self.grid.beta + self.offset_units())


def build_pi(sys, grid):
    """Stacked input-to-sampled-state map, shape ``(alpha n, beta p)``.

    Column block ``m`` multiplies the hold ``a[(k-1) beta + m - 1]``. Block
    ``(l, m)`` vanishes for ``m >= floor(l_delta R) + 2``: holds that start
    after a sample cannot reach it.
    """
    n, p = sys.n, sys.p
    _, Bd = discretize(sys, grid)
    Pi = np.zeros((grid.alpha * n, grid.beta * p))
    for l in range(1, grid.alpha + 1):
        ld = shifted_index(l, grid.delta)
        f = math.floor(ld * grid.ratio)
        rows = slice((l - 1) * n, l * n)
        for m in range(1, min(f, grid.beta) + 1):
            Pi[rows, (m - 1) * p : m * p] = ad_block(sys, grid, ld, m) @ Bd
        if f + 1 <= grid.beta:
            Pi[rows, f * p : (f + 1) * p] = bd_block(sys, grid, ld, f)
    return Pi


def build_abar_alpha(sys, grid):
    """Free response to the sampled instants: stack of ``e^{A l_delta T_s}``."""
    blocks = [
        mat_exp(sys.A, grid.seconds(shifted_index(l, grid.delta) * grid.ratio))
        for l in range(1, grid.alpha + 1)
    ]
    return np.vstack(blocks)


def build_phi_c(sys, grid):
    Ad, Bd = discretize(sys, grid)
    blocks = []
    M = Bd
    for _ in range(grid.beta):
        blocks.append(M)
        M = Ad @ M
    return np.hstack(blocks[::-1])


def build_phi_star(sys, grid, t_star):
    """Lifted map to the state at the disruption instant ``t_star * beta * T_a``."""
    t_star = parse_fraction(t_star, grid.max_denominator)
    if not 0 < t_star <= 1:
        raise ValueError(f"normalized disruption time must lie in (0, 1], got {t_star}")
    n, p, beta = sys.n, sys.p, grid.beta
    _, Bd = discretize(sys, grid)
    bt = beta * t_star
    f = math.floor(bt)
    Phi = np.zeros((n, beta * p))
    for m in range(1, min(f, beta) + 1):
        Phi[:, (m - 1) * p : m * p] = mat_exp(sys.A, grid.seconds(bt - m)) @ Bd
    if f + 1 <= beta:
        # zero block when beta * t_star is an integer
        Phi[:, f * p : (f + 1) * p] = bd_block(sys, grid, 0, f - bt)
    Abar = mat_exp(sys.A, grid.seconds(bt))
    return DisruptionSpec(t_star, _frozen(Phi), _frozen(Abar), grid)


def lift(sys, grid):
    """Build every per-cluster matrix for ``(sys, grid)``."""
    Ad, Bd = discretize(sys, grid)
    return LiftedCluster(
        sys=sys,
        grid=grid,
        Ad=_frozen(Ad),
        Bd=_frozen(Bd),
        Pi=_frozen(build_pi(sys, grid)),
        Phi_c=_frozen(build_phi_c(sys, grid)),
        Abar_alpha=_frozen(build_abar_alpha(sys, grid)),
        Ad_beta=_frozen(np.linalg.matrix_power(Ad, grid.beta)),
    )


def _check_dims(lifted, x_prev, a_k):
    x_prev = np.asarray(x_prev, dtype=float).reshape(-1)
    a_k = np.asarray(a_k, dtype=float).reshape(-1)
    if x_prev.shape[0] != lifted.sys.n:
        raise ValueError(f"state has length {x_prev.shape[0]}, expected {lifted.sys.n}")
    if a_k.shape[0] != lifted.grid.beta * lifted.sys.p:
        raise ValueError(f"stacked attack has length {a_k.shape[0]}, expected {lifted.grid.beta * lifted.sys.p}")
    return x_prev, a_k


def predict_cluster(lifted, x_prev, a_k):
    """Return ``(x_stack, y_stack, x_next)`` for one cluster."""
    x_prev, a_k = _check_dims(lifted, x_prev, a_k)
    x_stack = lifted.Abar_alpha @ x_prev + lifted.Pi @ a_k
    y_stack = lifted.Cstack @ x_stack
    x_next = lifted.Ad_beta @ x_prev + lifted.Phi_c @ a_k
    return x_stack, y_stack, x_next


def predict_disruption(lifted, spec, x_prev, a_k):
    """State at the disruption instant of the cluster started from ``x_prev``."""
    x_prev, a_k = _check_dims(lifted, x_prev, a_k)
    return spec.Abar_star @ x_prev + spec.Phi_star @ a_k
