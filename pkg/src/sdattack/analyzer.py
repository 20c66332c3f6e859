"""Feasibility of a zero-stealthy disruptive attack.

Three conditions on the lifted matrices decide feasibility:

(a) ``ker CPi != {0}``: a stealthy attack direction exists;
(b) ``ker CPi`` is not inside ``ker Phi_star``: that direction moves the state
    at the disruption instant;
(c) ``im CAbar`` lies inside ``im CPi``: the carried-over state of the previous
    cluster can be hidden from the samples.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .errors import NoRedundancy, RankDeficientBd
from .lifting import build_phi_star, parse_fraction
from .numlin import DEFAULT_TOL, kernel_basis, range_contained, rank


@dataclass
class DisruptionChoice:
    t_star: Fraction
    i_star: int
    witness: np.ndarray


@dataclass
class RedundancyReport:
    cond_a: bool
    kernel_dim: int
    cond_b: bool
    cond_c: bool
    rank_CPi: int
    rank_CPi_aug: int
    t_star: Fraction | None
    i_star: int | None
    t_star_source: str
    cond_b_by_candidate: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def feasible(self):
        return self.cond_a and self.cond_b and self.cond_c

    def failing_items(self):
        return [name for name, ok in (("a", self.cond_a), ("b", self.cond_b), ("c", self.cond_c)) if not ok]

    def to_dict(self):
        d = asdict(self)
        d["t_star"] = None if self.t_star is None else str(self.t_star)
        d["cond_b_by_candidate"] = {str(k): v for k, v in self.cond_b_by_candidate.items()}
        d["feasible"] = self.feasible
        d["failing_items"] = self.failing_items()
        return d


def kernel_not_contained(M, N, tol=DEFAULT_TOL):
    """True iff ``ker M`` is not a subset of ``ker N`` (same column count)."""
    return rank(np.vstack([M, N]), tol) > rank(M, tol)


def _nonzero_blocks(z, p, tol):
    scale = np.linalg.norm(z)
    return [i for i in range(len(z) // p) if np.linalg.norm(z[i * p : (i + 1) * p]) > tol.rank_rtol * scale]


def select_disruption_time(lifted, tol=DEFAULT_TOL):
    """Pick ``t_star = i_star / beta`` from a kernel witness of ``CPi``.

    The witness search scans the kernel basis for the smallest leading nonzero
    block ``i_star``; ties go to the largest block norm. Requires full column
    rank of ``Bd`` so that ``Phi_star z = Bd z_{i_star}`` cannot vanish.
    """
    sys, grid = lifted.sys, lifted.grid
    p, beta = sys.p, grid.beta
    V = kernel_basis(lifted.CPi, tol)
    if V.shape[1] == 0:
        raise NoRedundancy("ker CPi is trivial")
    if rank(lifted.Bd, tol) < p:
        raise RankDeficientBd(f"rank(Bd) = {rank(lifted.Bd, tol)} < p = {p}")
    best = None
    for col in V.T:
        blocks = _nonzero_blocks(col, p, tol)
        if not blocks:
            continue
        i = blocks[0]
        size = np.linalg.norm(col[i * p : (i + 1) * p])
        if best is None or i < best[0] or (i == best[0] and size > best[1]):
            best = (i, size, col)
    i_star = best[0] + 1
    return DisruptionChoice(Fraction(i_star, beta), i_star, best[2].copy())


def candidate_times(beta):
    return [Fraction(j, beta) for j in range(1, beta + 1)]


def auto_disruption_time(lifted, tol=DEFAULT_TOL):
    """Witness-based choice, falling back to scanning ``{1/beta, ..., 1}``.

    Returns ``(t_star, i_star, source)`` or ``(None, None, reason)``.
    """
    try:
        choice = select_disruption_time(lifted, tol)
        return choice.t_star, choice.i_star, "witness"
    except NoRedundancy:
        return None, None, "no-redundancy"
    except RankDeficientBd:
        pass
    CPi = lifted.CPi
    for t in candidate_times(lifted.grid.beta):
        spec = build_phi_star(lifted.sys, lifted.grid, t)
        if kernel_not_contained(CPi, spec.Phi_star, tol):
            return t, None, "candidate-scan"
    return None, None, "no-candidate"


def check_assumption1(lifted, t_star_candidates="auto", tol=DEFAULT_TOL):
    """Evaluate conditions (a), (b), (c) and the cheap sufficient tests.

    ``t_star_candidates`` is ``"auto"``, a single disruption time, or a list of
    them; with a list, (b) must hold for every entry (one per cluster).
    """
    sys, grid = lifted.sys, lifted.grid
    CPi, CAbar = lifted.CPi, lifted.CAbar
    V = kernel_basis(CPi, tol)
    r = rank(CPi, tol)
    cond_a = V.shape[1] > 0
    cond_c = range_contained(CPi, CAbar, tol)
    r_aug = rank(np.hstack([CPi, CAbar]), tol)

    i_star = None
    by_candidate = {}
    if isinstance(t_star_candidates, str) and t_star_candidates == "auto":
        t_star, i_star, source = auto_disruption_time(lifted, tol)
        candidates = [t_star] if t_star is not None else []
    else:
        if isinstance(t_star_candidates, (list, tuple)):
            candidates = [parse_fraction(t) for t in t_star_candidates]
        else:
            candidates = [parse_fraction(t_star_candidates)]
        t_star, source = (candidates[0] if candidates else None), "given"
    for t in candidates:
        spec = build_phi_star(sys, grid, t)
        by_candidate[t] = bool(cond_a and kernel_not_contained(CPi, spec.Phi_star, tol))
    cond_b = bool(by_candidate) and all(by_candidate.values())

    diagnostics = {
        "dims_sufficient": sys.q * grid.alpha < sys.p * grid.beta,
        "CPi_full_row_rank": r == CPi.shape[0],
        "Pi_full_row_rank": rank(lifted.Pi, tol) == lifted.Pi.shape[0],
        "Bd_full_column_rank": rank(lifted.Bd, tol) == sys.p,
        "CPi_shape": list(CPi.shape),
        "alpha": grid.alpha,
        "beta": grid.beta,
        "delta": str(grid.delta),
    }
    diagnostics.update(check_remark1_sufficient(lifted, tol))
    return RedundancyReport(
        cond_a=bool(cond_a),
        kernel_dim=int(V.shape[1]),
        cond_b=bool(cond_b),
        cond_c=bool(cond_c),
        rank_CPi=int(r),
        rank_CPi_aug=int(r_aug),
        t_star=t_star,
        i_star=i_star,
        t_star_source=source,
        cond_b_by_candidate=by_candidate,
        diagnostics=diagnostics,
    )


def toeplitz_phi(lifted):
    """Stack of the disruption maps for ``t_star = 1/N, ..., 1`` (integer ratio, no offset)."""
    Ad, Bd = lifted.Ad, lifted.Bd
    n, p = Bd.shape
    N = lifted.grid.beta
    powers = [Bd]
    for _ in range(N - 1):
        powers.append(Ad @ powers[-1])
    T = np.zeros((N * n, N * p))
    for r in range(N):
        for c in range(r + 1):
            T[r * n : (r + 1) * n, c * p : (c + 1) * p] = powers[r - c]
    return T


def check_remark1_sufficient(lifted, tol=DEFAULT_TOL):
    """Conditions (b') and (b'') for an integer ratio with zero offset.

    (b'): ``ker C Pi`` is not inside the kernel of the block lower-triangular
    stack of disruption maps. (b''): ``ker C`` meets ``im Pi`` nontrivially,
    i.e. ``rank(C Pi) < rank(Pi)``.
    """
    grid = lifted.grid
    if grid.alpha != 1 or grid.delta != 0:
        return {"integer_ratio_case": False, "b_prime": None, "b_double_prime": None}
    CPi, Pi = lifted.CPi, lifted.Pi
    b_prime = kernel_not_contained(CPi, toeplitz_phi(lifted), tol)
    b_dprime = rank(CPi, tol) < rank(Pi, tol)
    return {"integer_ratio_case": True, "b_prime": bool(b_prime), "b_double_prime": bool(b_dprime)}
