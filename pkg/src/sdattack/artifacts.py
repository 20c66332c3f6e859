"""File formats for plans, traces and reports.

Numbers are written with ``repr`` (shortest round-trip decimal), so reloading
a file reproduces the in-memory floats bit for bit and reruns produce
identical files.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .attack import AttackPlan
from .sim import SimTrace


def _num(x):
    return repr(float(x))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def write_json(path, obj):
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=False)
    Path(path).write_text(text + "\n")


def plan_to_dict(plan):
    return {
        "format": "sdattack-plan/1",
        "clusters": plan.K,
        "n": plan.x_c.shape[1],
        "p": plan.p,
        "alpha": plan.alpha,
        "beta": plan.beta,
        "T_a": plan.T_a,
        "T_s": plan.T_s,
        "offset": plan.offset,
        "t_star": [str(t) for t in plan.t_star],
        "disruption_units": [str(u) for u in plan.disruption_units],
        "disruption_times": plan.disruption_times.tolist(),
        "eta": plan.eta.tolist(),
        "kappa": plan.kappa.tolist(),
        "H": plan.H.tolist(),
        "zeta": plan.zeta.tolist(),
        "x_c": plan.x_c.tolist(),
        "x_a": plan.x_a.tolist(),
        "stealth_residual": plan.stealth_residual.tolist(),
        "a_bar": plan.a_bar.tolist(),
        "metadata": plan.metadata,
    }


def plan_from_dict(d):
    K, n, p, beta = int(d["clusters"]), int(d["n"]), int(d["p"]), int(d["beta"])

    def arr(key, cols):
        return np.array(d[key], dtype=float).reshape(-1, cols) if K else np.zeros((0, cols))

    return AttackPlan(
        eta=np.array(d["eta"], dtype=float),
        zeta=arr("zeta", beta * p),
        kappa=np.array(d["kappa"], dtype=float),
        H=np.array(d["H"], dtype=float),
        x_c=arr("x_c", n),
        x_a=arr("x_a", n),
        stealth_residual=np.array(d["stealth_residual"], dtype=float),
        a_bar=np.array(d["a_bar"], dtype=float).reshape(-1, p) if K else np.zeros((0, p)),
        t_star=[Fraction(t) for t in d["t_star"]],
        disruption_times=np.array(d["disruption_times"], dtype=float),
        disruption_units=[Fraction(u) for u in d["disruption_units"]],
        T_a=float(d["T_a"]),
        T_s=float(d["T_s"]),
        offset=float(d["offset"]),
        alpha=int(d["alpha"]),
        beta=beta,
        metadata=dict(d.get("metadata", {})),
    )


def write_plan(plan, json_path, csv_path):
    write_json(json_path, plan_to_dict(plan))
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "t"] + [f"a_{c + 1}" for c in range(plan.p)])
        for i, row in enumerate(plan.a_bar):
            w.writerow([i, _num(i * plan.T_a)] + [_num(v) for v in row])


def load_plan(path):
    return plan_from_dict(json.loads(Path(path).read_text()))


def write_trace(trace, path):
    n, q = trace.x.shape[1], trace.y.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(
            ["t"] + [f"x_{i + 1}" for i in range(n)] + [f"y_{i + 1}" for i in range(q)]
            + ["is_sensing", "is_actuation", "is_disruption"]
        )
        for r in range(len(trace.times)):
            w.writerow(
                [_num(trace.times[r])]
                + [_num(v) for v in trace.x[r]]
                + [_num(v) for v in trace.y[r]]
                + [int(trace.is_sensing[r]), int(trace.is_actuation[r]), int(trace.is_disruption[r])]
            )


def load_trace(path, sys=None, holds=None, T_a=None):
    """Read a trace CSV; pass the plant and holds to re-enable probing and scaling."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    xcols = [i for i, h in enumerate(header) if h.startswith("x_")]
    ycols = [i for i, h in enumerate(header) if h.startswith("y_")]
    flag = {h: header.index(h) for h in ("is_sensing", "is_actuation", "is_disruption")}
    data = np.array([[float(v) for v in r] for r in body]) if body else np.zeros((0, len(header)))
    return SimTrace(
        times=data[:, 0],
        x=data[:, xcols],
        y=data[:, ycols],
        is_sensing=data[:, flag["is_sensing"]] > 0.5,
        is_actuation=data[:, flag["is_actuation"]] > 0.5,
        is_disruption=data[:, flag["is_disruption"]] > 0.5,
        sys=sys,
        holds=holds,
        T_a=T_a,
    )
