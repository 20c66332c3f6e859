"""Off-line synthesis of the zero-stealthy disruptive attack.

Each stacked cluster attack is ``a<k> = kappa_k * eta + zeta<k>``: ``eta`` is a
fixed stealthy direction that reaches the disruption instant, ``zeta<k>``
cancels the previous cluster's terminal state on the samples, and ``kappa_k``
scales the disruption up to the threshold ``H_k``. Nothing here consumes
measurements; the plan is a deterministic function of the model and timing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleEta, NoRedundancy
from .lifting import DisruptionSpec, build_phi_star, parse_fraction, predict_cluster, predict_disruption
from .numlin import DEFAULT_TOL, kernel_basis, min_norm_solve

ETA_RULE = "unit vector in ker CPi maximizing ||Phi_star eta||"
# the bound is met with equality up to this relative factor, so rounding in the
# propagated state cannot leave ||x~(t_k)|| a few ulps below H_k
KAPPA_SAFETY = 1e-12


@dataclass(frozen=True)
class ThresholdSpec:
    """Disruption thresholds ``H_k``: ``linear`` (c*k), ``constant`` or ``list``."""

    kind: str = "linear"
    value: float = 1.0
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("linear", "constant", "list"):
            raise ValueError(f"unknown threshold kind {self.kind!r}")
        if self.kind == "list":
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
            if any(v <= 0 for v in self.values):
                raise ValueError("thresholds must be positive")
        elif self.value <= 0:
            raise ValueError("thresholds must be positive")

    def __call__(self, k):
        if self.kind == "linear":
            return self.value * k
        if self.kind == "constant":
            return self.value
        if k > len(self.values):
            raise ValueError(f"threshold list has {len(self.values)} entries, cluster {k} requested")
        return self.values[k - 1]

    def to_dict(self):
        if self.kind == "list":
            return {"kind": "list", "values": list(self.values)}
        return {"kind": self.kind, "value": self.value}

    @classmethod
    def from_dict(cls, d):
        if d.get("kind") == "list":
            return cls(kind="list", values=tuple(d["values"]))
        return cls(kind=d.get("kind", "linear"), value=float(d.get("value", 1.0)))


@dataclass
class AttackPlan:
    """Synthesized holds plus every intermediate of the construction.

    Arrays are indexed by cluster ``k - 1``; ``a_bar`` has one row per hold.
    """

    eta: np.ndarray
    zeta: np.ndarray
    kappa: np.ndarray
    H: np.ndarray
    x_c: np.ndarray
    x_a: np.ndarray
    stealth_residual: np.ndarray
    a_bar: np.ndarray
    t_star: list
    disruption_times: np.ndarray
    disruption_units: list
    T_a: float
    T_s: float
    offset: float
    alpha: int
    beta: int
    metadata: dict = field(default_factory=dict)

    @property
    def K(self):
        return len(self.kappa)

    @property
    def p(self):
        return self.a_bar.shape[1]

    def stacked(self, k):
        return self.a_bar[(k - 1) * self.beta : k * self.beta].reshape(-1)

    def hold_times(self):
        return np.arange(len(self.a_bar)) * self.T_a


def choose_eta(lifted, spec, tol=DEFAULT_TOL):
    """Unit ``eta`` in ``ker CPi`` maximizing ``||Phi_star eta||``.

    The maximizer is the top right singular vector of ``Phi_star`` restricted
    to the kernel basis. Sign: first clearly nonzero entry positive.
    """
    V = kernel_basis(lifted.CPi, tol)
    if V.shape[1] == 0:
        raise NoRedundancy("ker CPi is trivial; no stealthy direction exists")
    M = spec.Phi_star @ V
    _, s, vt = np.linalg.svd(M)
    scale = max(np.linalg.norm(spec.Phi_star, 2), np.finfo(float).tiny)
    if s.size == 0 or s[0] <= tol.rank_rtol * scale:
        raise InfeasibleEta("Phi_star annihilates ker CPi at this disruption time")
    eta = V @ vt[0]
    eta /= np.linalg.norm(eta)
    lead = np.flatnonzero(np.abs(eta) > 1e-12)
    if eta[lead[0]] < 0:
        eta = -eta
    return eta


def solve_zeta(lifted, x_prev, tol=DEFAULT_TOL):
    """Minimum-norm ``zeta`` with ``CPi zeta = -CAbar x_prev``."""
    x_prev = np.asarray(x_prev, dtype=float).reshape(-1)
    return min_norm_solve(lifted.CPi, -(lifted.CAbar @ x_prev), tol)


def choose_kappa(spec, x_prev, zeta, eta, H_k):
    """Smallest admissible gain ``(H_k + ||Abar* x + Phi* zeta||) / ||Phi* eta||``,
    inflated by ``KAPPA_SAFETY``."""
    if not H_k > 0:
        raise ValueError(f"threshold must be positive, got {H_k}")
    gain = np.linalg.norm(spec.Phi_star @ eta)
    if gain <= np.finfo(float).eps * max(np.linalg.norm(spec.Phi_star), 1.0):
        raise ZeroDivisionError("||Phi_star eta|| is numerically zero")
    drift = np.linalg.norm(spec.Abar_star @ x_prev + spec.Phi_star @ zeta)
    return (H_k + drift) / gain * (1.0 + KAPPA_SAFETY)


def _specs_for(lifted, t_star, K):
    sys, grid = lifted.sys, lifted.grid
    if isinstance(t_star, DisruptionSpec):
        return [t_star] * K
    if isinstance(t_star, (list, tuple)):
        if len(t_star) < K:
            raise ValueError(f"{len(t_star)} disruption times given for {K} clusters")
        cache = {}
        out = []
        for t in t_star[:K]:
            if isinstance(t, DisruptionSpec):
                out.append(t)
                continue
            t = parse_fraction(t)
            if t not in cache:
                cache[t] = build_phi_star(sys, grid, t)
            out.append(cache[t])
        return out
    spec = build_phi_star(sys, grid, t_star)
    return [spec] * K


def synthesize(lifted, t_star, thresholds, K, tol=DEFAULT_TOL):
    """Run the cluster-by-cluster construction for ``K`` clusters.

    ``t_star`` is one disruption time (``Fraction``, ``"p/q"``, float or a
    ``DisruptionSpec``) or a per-cluster list of them. ``eta`` is recomputed
    only when the disruption time changes.
    """
    if K < 0:
        raise ValueError("cluster count must be non-negative")
    sys, grid = lifted.sys, lifted.grid
    n, p, beta = sys.n, sys.p, grid.beta
    specs = _specs_for(lifted, t_star, K)

    zeta = np.zeros((K, beta * p))
    kappa = np.zeros(K)
    H = np.zeros(K)
    x_c = np.zeros((K, n))
    x_a = np.zeros((K, n))
    resid = np.zeros(K)
    holds = np.zeros((K * beta, p))
    etas = {}
    x_prev = np.zeros(n)
    eta = None
    for k in range(1, K + 1):
        spec = specs[k - 1]
        key = id(spec)
        if key not in etas:
            etas[key] = choose_eta(lifted, spec, tol)
        eta = etas[key]
        z = solve_zeta(lifted, x_prev, tol)
        h = float(thresholds(k))
        kap = choose_kappa(spec, x_prev, z, eta, h)
        a_k = kap * eta + z
        _, y_stack, x_next = predict_cluster(lifted, x_prev, a_k)
        x_a[k - 1] = predict_disruption(lifted, spec, x_prev, a_k)
        zeta[k - 1], kappa[k - 1], H[k - 1] = z, kap, h
        resid[k - 1] = np.linalg.norm(y_stack)
        holds[(k - 1) * beta : k * beta] = a_k.reshape(beta, p)
        x_c[k - 1] = x_next
        x_prev = x_next

    if eta is None:
        eta = np.zeros(beta * p)
    t_stars = [s.t_star for s in specs]
    return AttackPlan(
        eta=eta,
        zeta=zeta,
        kappa=kappa,
        H=H,
        x_c=x_c,
        x_a=x_a,
        stealth_residual=resid,
        a_bar=holds,
        t_star=t_stars,
        disruption_times=np.array([s.time(k) for k, s in enumerate(specs, start=1)]),
        disruption_units=[(k - 1) * beta + s.offset_units() for k, s in enumerate(specs, start=1)],
        T_a=grid.T_a,
        T_s=grid.seconds(grid.ratio),
        offset=grid.seconds(grid.delta * grid.ratio),
        alpha=grid.alpha,
        beta=beta,
        metadata={"eta_rule": ETA_RULE, "distinct_eta": len(etas)},
    )
