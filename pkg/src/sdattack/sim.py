"""Exact continuous-time simulation of the attack-induced error dynamics.

The error ``x~ = x - x_nominal`` obeys ``x~' = A x~ + B a`` with ``x~(0) = 0``
regardless of the controller, so only the attack holds are needed. The input
is constant between consecutive events (hold starts, samples, disruption
instants), and each such span is propagated in closed form with the ZOH pair.
Plot points inside a hold branch off the last event state and never feed back
into the event chain, so event states do not depend on the plot resolution.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .numlin import zoh_pair


@dataclass(eq=False)
class SimTrace:
    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    is_sensing: np.ndarray
    is_actuation: np.ndarray
    is_disruption: np.ndarray
    sys: object = None
    holds: np.ndarray | None = None
    T_a: float | None = None

    @property
    def sampled(self):
        """``[(j, t, y~(t))]`` for the analyzed samples ``j = 1, 2, ...``."""
        idx = np.flatnonzero(self.is_sensing)
        return [(j, float(self.times[i]), self.y[i]) for j, i in enumerate(idx, start=1)]

    @property
    def disruption_samples(self):
        """``[(k, t_k, ||x~(t_k)||)]``."""
        idx = np.flatnonzero(self.is_disruption)
        return [(k, float(self.times[i]), float(np.linalg.norm(self.x[i]))) for k, i in enumerate(idx, start=1)]

    def state_at_event(self, t, atol=1e-9):
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > atol * max(1.0, abs(t)):
            raise KeyError(f"no trace point at t = {t}")
        return self.x[i]


@dataclass
class VerificationReport:
    max_sampled_residual: float
    max_scaled_residual: float
    stealthy: bool
    stealth_tol: float
    scaled: bool
    residuals: list
    margins: list
    disruptive: bool
    first_detection_sample: int | None = None
    first_detection_time: float | None = None
    n_samples: int = 0
    n_clusters: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.stealthy and self.disruptive

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _to_units(seconds_units, T_a_from, T_a_to):
    if T_a_from == T_a_to:
        return Fraction(seconds_units)
    return Fraction(seconds_units) * Fraction(T_a_from) / Fraction(T_a_to)


def simulate_error(sys, grid, plan, fine_steps_per_hold=20):
    """Simulate ``plan`` on the clock ``grid`` (which may differ from the design grid).

    Holds start at ``grid``'s actuation instants and samples are taken on
    ``grid``'s own shifted-index schedule. Disruption instants come from the
    plan and are mapped onto the same time axis.
    """
    holds = np.asarray(plan.a_bar, dtype=float)
    if holds.ndim != 2 or (holds.size and holds.shape[1] != sys.p):
        raise ValueError(f"plan holds have shape {holds.shape}, plant has p = {sys.p}")
    if fine_steps_per_hold < 1:
        raise ValueError("fine_steps_per_hold must be >= 1")
    N = holds.shape[0]
    end = Fraction(N)

    actuation = {Fraction(i) for i in range(N + 1)}
    sensing = set()
    j = 1
    while N > 0:
        u = grid.sensing_units(j)
        if u > end:
            break
        if u > 0:
            sensing.add(u)
        j += 1
    disruption = set()
    for u in getattr(plan, "disruption_units", []):
        u = _to_units(u, plan.T_a, grid.T_a)
        if 0 < u <= end:
            disruption.add(u)

    skeleton = sorted(actuation | sensing | disruption)
    cache = {}

    def pair(du):
        if du not in cache:
            cache[du] = zoh_pair(sys.A, sys.B, grid.seconds(du))
        return cache[du]

    def hold(i):
        return holds[i] if i < N else np.zeros(sys.p)

    states = {skeleton[0]: np.zeros(sys.n)}
    for u0, u1 in zip(skeleton[:-1], skeleton[1:]):
        E, G = pair(u1 - u0)
        states[u1] = E @ states[u0] + G @ hold(math.floor(u0))

    points = dict(states)
    if N > 0:
        for i in range(N):
            base_idx = np.searchsorted(skeleton, Fraction(i), side="left")
            b = base_idx
            for s in range(1, fine_steps_per_hold):
                u = Fraction(i) + Fraction(s, fine_steps_per_hold)
                if u in points:
                    continue
                while b + 1 < len(skeleton) and skeleton[b + 1] <= u:
                    b += 1
                ub = skeleton[b]
                E, G = pair(u - ub)
                points[u] = E @ states[ub] + G @ hold(i)

    order = sorted(points)
    x = np.array([points[u] for u in order])
    return SimTrace(
        times=np.array([grid.seconds(u) for u in order]),
        x=x,
        y=x @ sys.C.T,
        is_sensing=np.array([u in sensing for u in order]),
        is_actuation=np.array([u in actuation for u in order]),
        is_disruption=np.array([u in disruption for u in order]),
        sys=sys,
        holds=holds,
        T_a=grid.T_a,
    )


def sample_scales(trace):
    """Causal magnitude ``max(1, ||C|| max ||x~(s)||)`` over events ``s <= t_j``.

    Rounding in the propagated state is proportional to the largest state seen
    so far, so residuals are judged against this scale.
    """
    idx = np.flatnonzero(trace.is_sensing)
    if trace.sys is None:
        return np.ones(len(idx))
    c_norm = np.linalg.norm(trace.sys.C, 2)
    # event rows only, so the verdict does not depend on the plot resolution
    events = trace.is_sensing | trace.is_actuation | trace.is_disruption
    norms = np.where(events, np.linalg.norm(trace.x, axis=1), 0.0)
    running = np.maximum.accumulate(norms) if len(norms) else np.zeros(0)
    return np.maximum(1.0, c_norm * running[idx])


def verify(trace, plan, stealth_tol=1e-8, disrupt_rtol=0.0, scaled=True):
    """Check zero-stealth on the samples and the thresholds at the disruption instants.

    With ``scaled`` (default) a sample is stealthy when its residual is at most
    ``stealth_tol * sample_scales(trace)``; this equals the absolute test while
    the trace stays below unit magnitude. A cluster counts as disrupted when
    ``||x~(t_k)|| >= H_k (1 - disrupt_rtol)``; the default is the strict test.
    """
    residuals = [float(np.linalg.norm(y)) for _, _, y in trace.sampled]
    scales = sample_scales(trace) if scaled else np.ones(len(residuals))
    rel = [r / sc for r, sc in zip(residuals, scales)]
    max_res = max(residuals, default=0.0)
    max_rel = max(rel, default=0.0)
    first = next((j for j, r in enumerate(rel, start=1) if r > stealth_tol), None)
    first_t = trace.sampled[first - 1][1] if first is not None else None

    samples = trace.disruption_samples
    H = np.asarray(plan.H, dtype=float)
    margins = [norm - H[k - 1] for k, _, norm in samples if k <= len(H)]
    disruptive = (
        len(H) > 0
        and len(margins) == len(H)
        and all(m >= -disrupt_rtol * h for m, h in zip(margins, H))
    )
    return VerificationReport(
        max_sampled_residual=max_res,
        max_scaled_residual=max_rel,
        stealthy=max_rel <= stealth_tol,
        stealth_tol=stealth_tol,
        scaled=scaled,
        residuals=residuals,
        margins=[float(m) for m in margins],
        disruptive=bool(disruptive),
        first_detection_sample=first,
        first_detection_time=first_t,
        n_samples=len(residuals),
        n_clusters=len(H),
    )


def intermittent_probe(trace, probe_times):
    """Output error at arbitrary instants, propagated exactly from the trace."""
    if trace.sys is None or trace.holds is None or trace.T_a is None:
        raise ValueError("trace lacks the plant/holds needed for probing")
    sys, holds, T_a = trace.sys, trace.holds, trace.T_a
    t_lo, t_hi = trace.times[0], trace.times[-1]
    out = []
    for t in np.atleast_1d(np.asarray(probe_times, dtype=float)):
        if t < t_lo - 1e-12 or t > t_hi + 1e-12 * max(1.0, t_hi):
            raise ValueError(f"probe time {t} outside [{t_lo}, {t_hi}]")
        i = int(np.searchsorted(trace.times, t, side="right")) - 1
        i = max(i, 0)
        dt = t - trace.times[i]
        if dt <= 1e-12 * max(1.0, t):
            out.append(trace.y[i].copy())
            continue
        h = int(math.floor(trace.times[i] / T_a + 1e-9))
        a = holds[h] if h < len(holds) else np.zeros(sys.p)
        E, G = zoh_pair(sys.A, sys.B, dt)
        out.append(sys.C @ (E @ trace.x[i] + G @ a))
    return np.array(out)
