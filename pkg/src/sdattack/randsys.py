"""Seeded random plants and clocks for property checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .plant import LtiSystem, TimingGrid


@dataclass
class RandomCase:
    sys: LtiSystem
    grid: TimingGrid
    seed: int


def random_coprime(rng, max_alpha=6, max_beta=6):
    while True:
        a = int(rng.integers(1, max_alpha + 1))
        b = int(rng.integers(1, max_beta + 1))
        if math.gcd(a, b) == 1:
            return a, b


def random_system(rng, n=None, p=None, q=None, max_n=6, max_p=3, max_q=2, abscissa=(-1.0, 0.3)):
    """Random ``(A, B, C)`` whose spectral abscissa is drawn from ``abscissa`` (1/s)."""
    n = n or int(rng.integers(1, max_n + 1))
    p = p or int(rng.integers(1, max_p + 1))
    q = q or int(rng.integers(1, max_q + 1))
    A = rng.standard_normal((n, n)) / math.sqrt(n)
    shift = np.max(np.linalg.eigvals(A).real) - rng.uniform(*abscissa)
    A -= shift * np.eye(n)
    B = rng.standard_normal((n, p))
    C = rng.standard_normal((q, n))
    return LtiSystem(A, B, C)


def random_grid(rng, max_alpha=6, max_beta=6, offset_denominator=16):
    """Random clock with coprime ``(alpha, beta)``, cluster length in [0.5, 1.5] s
    and an offset on a ``1/offset_denominator`` lattice."""
    alpha, beta = random_coprime(rng, max_alpha, max_beta)
    T_a = rng.uniform(0.5, 1.5) / beta
    T_s = T_a * beta / alpha
    delta = int(rng.integers(0, offset_denominator)) / offset_denominator
    return TimingGrid(T_a, T_s, delta * T_s)


def random_case(seed, **kwargs):
    rng = np.random.default_rng(seed)
    sys = random_system(rng, **kwargs)
    grid = random_grid(rng)
    return RandomCase(sys, grid, seed)
