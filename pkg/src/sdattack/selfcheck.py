"""Seeded randomized self-checks shared by ``sdattack check`` and the test suite.

Each check compares two independent routes: the lifted cluster maps against
the event-by-event simulation, and the synthesized plan against ``verify``.
"""

from __future__ import annotations

from fractions import Fraction
from types import SimpleNamespace

import numpy as np

from .analyzer import check_assumption1, select_disruption_time
from .attack import ThresholdSpec, synthesize
from .errors import NoRedundancy, RankDeficientBd
from .lifting import build_phi_star, lift, predict_cluster, predict_disruption
from .numlin import rank
from .randsys import random_case
from .sim import simulate_error, verify


def _rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


def oracle_error(case, clusters=3, seed=0):
    """Worst relative gap between lifted predictions and exact simulation.

    Random holds and a random disruption time are fed through both routes;
    every sensing, terminal and disruption state is compared.
    """
    sys, grid = case.sys, case.grid
    rng = np.random.default_rng(seed)
    lifted = lift(sys, grid)
    spec = build_phi_star(sys, grid, Fraction(int(rng.integers(1, 97)), 97))
    holds = rng.standard_normal((clusters * grid.beta, sys.p))
    stub = SimpleNamespace(
        a_bar=holds,
        T_a=grid.T_a,
        disruption_units=[(k - 1) * grid.beta + spec.offset_units() for k in range(1, clusters + 1)],
    )
    trace = simulate_error(sys, grid, stub, fine_steps_per_hold=2)
    worst = 0.0
    x = np.zeros(sys.n)
    for k in range(1, clusters + 1):
        a = holds[(k - 1) * grid.beta : k * grid.beta].ravel()
        xs, _, xn = predict_cluster(lifted, x, a)
        xa = predict_disruption(lifted, spec, x, a)
        sim_xs = np.concatenate([trace.state_at_event(grid.seconds(u)) for u in grid.schedule(k).sensing_units])
        worst = max(
            worst,
            _rel(sim_xs, xs),
            _rel(trace.state_at_event(spec.time(k)), xa),
            _rel(trace.state_at_event(grid.seconds(k * grid.beta)), xn),
        )
        x = xn
    return worst


def closure(case, clusters=10, tol=None):
    """``(feasible, report)``; the report is None when the case is infeasible."""
    lifted = lift(case.sys, case.grid)
    kw = {} if tol is None else {"tol": tol}
    analysis = check_assumption1(lifted, "auto", **kw)
    if not analysis.feasible:
        return False, None
    plan = synthesize(lifted, analysis.t_star, ThresholdSpec("linear", 1.0), clusters, **kw)
    return True, verify(simulate_error(case.sys, case.grid, plan, 2), plan)


def witness(case):
    """``(||C Pi z||, ||Phi* z||)`` for the chosen witness, or None if not applicable."""
    lifted = lift(case.sys, case.grid)
    if rank(lifted.Bd) < case.sys.p:
        return None
    try:
        choice = select_disruption_time(lifted)
    except (NoRedundancy, RankDeficientBd):
        return None
    z = choice.witness
    spec = build_phi_star(case.sys, case.grid, choice.t_star)
    return float(np.linalg.norm(lifted.CPi @ z)), float(np.linalg.norm(spec.Phi_star @ z))


def run_checks(seed=0, count=50, clusters=10, out=print):
    ok = True
    worst = 0.0
    n_feasible = n_closed = n_witness = 0
    bad_witness = []
    for s in range(seed, seed + count):
        case = random_case(s)
        worst = max(worst, oracle_error(case, seed=10_000 + s))
        feasible, rep = closure(case, clusters)
        if feasible:
            n_feasible += 1
            n_closed += rep.passed
        w = witness(case)
        if w is not None:
            n_witness += 1
            if not (w[0] <= 1e-8 and w[1] > 1e-6):
                bad_witness.append(s)
    lines = [
        (worst <= 1e-8, f"oracle equivalence: worst relative gap {worst:.2e} over {count} cases"),
        (n_closed == n_feasible, f"closure: {n_closed}/{n_feasible} feasible cases stealthy and disruptive"),
        (not bad_witness, f"witness: {n_witness - len(bad_witness)}/{n_witness} valid"),
    ]
    for good, text in lines:
        out(f"{'PASS' if good else 'FAIL'} {text}")
        ok &= good
    return ok
