"""Scenario documents and the built-in demos.

A scenario is one JSON object::

    {
      "name": "sec4a",
      "system": {"A": [[...]], "B": [[...]], "C": [[...]], "n": 3, "p": 2, "q": 1},
      "timing": {"T_a": 1.0, "T_s": 1.0, "offset": 0.0},
      "thresholds": {"kind": "linear", "value": 1.0},
      "t_star": "auto",
      "clusters": 10,
      "tolerances": {"rank_rtol": 1e-9, "residual_atol": 1e-8},
      "stealth_tol": 1e-8,
      "fine_steps": 20,
      "mismatch": {"T_a": 1.0, "T_s": 0.4004, "offset": 0.3}
    }

Only ``system`` and ``timing`` are required; ``n``/``p``/``q`` are checked
when present. ``mismatch`` (optional) is the true clock used for simulation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.linalg import block_diag

from .attack import ThresholdSpec
from .errors import IrrationalRatio, ScenarioError
from .numlin import Tolerances
from .plant import LtiSystem, TimingGrid

MISMATCH_MAX_DENOMINATOR = 10**6


@dataclass(frozen=True)
class Timing:
    T_a: float
    T_s: float
    offset: float = 0.0

    def to_dict(self):
        return {"T_a": self.T_a, "T_s": self.T_s, "offset": self.offset}


@dataclass(frozen=True, eq=False)
class Scenario:
    system: LtiSystem
    timing: Timing
    name: str = "scenario"
    description: str = ""
    thresholds: ThresholdSpec = field(default_factory=ThresholdSpec)
    t_star: object = "auto"
    clusters: int = 10
    tolerances: Tolerances = field(default_factory=Tolerances)
    stealth_tol: float = 1e-8
    fine_steps: int = 20
    max_denominator: int = 1000
    mismatch: Timing | None = None
    reference_data: bool = False

    def design_grid(self):
        t = self.timing
        return TimingGrid(t.T_a, t.T_s, t.offset, max_denominator=self.max_denominator)

    def true_grid(self):
        if self.mismatch is None:
            return self.design_grid()
        t = self.mismatch
        return TimingGrid(t.T_a, t.T_s, t.offset, max_denominator=MISMATCH_MAX_DENOMINATOR)

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def to_dict(self):
        s = self.system
        d = {
            "name": self.name,
            "description": self.description,
            "reference_data": self.reference_data,
            "system": {
                "n": s.n,
                "p": s.p,
                "q": s.q,
                "A": s.A.tolist(),
                "B": s.B.tolist(),
                "C": s.C.tolist(),
            },
            "timing": self.timing.to_dict(),
            "max_denominator": self.max_denominator,
            "thresholds": self.thresholds.to_dict(),
            "t_star": _t_star_to_json(self.t_star),
            "clusters": self.clusters,
            "tolerances": {
                "rank_rtol": self.tolerances.rank_rtol,
                "residual_atol": self.tolerances.residual_atol,
            },
            "stealth_tol": self.stealth_tol,
            "fine_steps": self.fine_steps,
        }
        if self.mismatch is not None:
            d["mismatch"] = self.mismatch.to_dict()
        return d

    def dump(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def _t_star_to_json(t):
    if isinstance(t, str):
        return t
    if isinstance(t, (list, tuple)):
        return [str(Fraction(x)) for x in t]
    return str(Fraction(t))


def _matrix(d, key, where):
    if key not in d:
        raise ScenarioError(f"{where}.{key}", "missing")
    try:
        M = np.array(d[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}.{key}", f"not a numeric matrix ({exc})") from None
    if M.ndim == 1:
        M = M[None, :] if key == "C" else M[:, None]
    if M.ndim != 2 or M.size == 0:
        raise ScenarioError(f"{where}.{key}", f"expected a non-empty 2-D array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ScenarioError(f"{where}.{key}", "non-finite entries")
    return M


def _positive(d, key, where, cast=float, default=None):
    if key not in d:
        if default is None:
            raise ScenarioError(f"{where}{key}", "missing")
        return default
    try:
        v = cast(d[key])
    except (TypeError, ValueError):
        raise ScenarioError(f"{where}{key}", f"not a number: {d[key]!r}") from None
    if not v > 0:
        raise ScenarioError(f"{where}{key}", f"must be positive, got {v}")
    return v


def _timing(d, where):
    if not isinstance(d, dict):
        raise ScenarioError(where, "expected an object")
    T_a = _positive(d, "T_a", where + ".")
    T_s = _positive(d, "T_s", where + ".")
    try:
        offset = float(d.get("offset", 0.0))
    except (TypeError, ValueError):
        raise ScenarioError(f"{where}.offset", "not a number") from None
    if not 0.0 <= offset < T_s:
        raise ScenarioError(f"{where}.offset", f"must lie in [0, T_s), got {offset}")
    return Timing(T_a, T_s, offset)


def scenario_from_dict(d):
    """Validate a scenario document; errors name the offending field."""
    if not isinstance(d, dict):
        raise ScenarioError("<root>", "expected a JSON object")
    if "system" not in d:
        raise ScenarioError("system", "missing")
    if "timing" not in d:
        raise ScenarioError("timing", "missing")
    sd = d["system"]
    if not isinstance(sd, dict):
        raise ScenarioError("system", "expected an object")
    A, B, C = (_matrix(sd, k, "system") for k in "ABC")
    n = A.shape[0]
    if A.shape != (n, n):
        raise ScenarioError("system.A", f"must be square, got {A.shape}")
    if B.shape[0] != n:
        raise ScenarioError("system.B", f"must have {n} rows, got {B.shape[0]}")
    if C.shape[1] != n:
        raise ScenarioError("system.C", f"must have {n} columns, got {C.shape[1]}")
    for key, actual in (("n", n), ("p", B.shape[1]), ("q", C.shape[0])):
        if key in sd and int(sd[key]) != actual:
            raise ScenarioError(f"system.{key}", f"declared {sd[key]} but matrices imply {actual}")
    timing = _timing(d["timing"], "timing")
    mismatch = _timing(d["mismatch"], "mismatch") if d.get("mismatch") else None

    th = d.get("thresholds", {"kind": "linear", "value": 1.0})
    try:
        thresholds = ThresholdSpec.from_dict(th)
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError("thresholds", str(exc)) from None

    t_star = d.get("t_star", "auto")
    try:
        if isinstance(t_star, list):
            t_star = [Fraction(str(t)) for t in t_star]
            bad = [t for t in t_star if not 0 < t <= 1]
        elif t_star != "auto":
            t_star = Fraction(str(t_star))
            bad = [] if 0 < t_star <= 1 else [t_star]
        else:
            bad = []
    except (ValueError, ZeroDivisionError):
        raise ScenarioError("t_star", f"expected 'auto' or a fraction like '1/2', got {d['t_star']!r}") from None
    if bad:
        raise ScenarioError("t_star", f"must lie in (0, 1], got {bad[0]}")

    try:
        clusters = int(d.get("clusters", 10))
    except (TypeError, ValueError):
        raise ScenarioError("clusters", "not an integer") from None
    if clusters < 0:
        raise ScenarioError("clusters", "must be >= 0")
    tol_d = d.get("tolerances", {})
    try:
        tol = Tolerances(
            rank_rtol=float(tol_d.get("rank_rtol", 1e-9)),
            residual_atol=float(tol_d.get("residual_atol", 1e-8)),
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioError("tolerances", str(exc)) from None

    scenario = Scenario(
        system=LtiSystem(A, B, C),
        timing=timing,
        name=str(d.get("name", "scenario")),
        description=str(d.get("description", "")),
        thresholds=thresholds,
        t_star=t_star,
        clusters=clusters,
        tolerances=tol,
        stealth_tol=_positive(d, "stealth_tol", "", default=1e-8),
        fine_steps=_positive(d, "fine_steps", "", cast=int, default=20),
        max_denominator=_positive(d, "max_denominator", "", cast=int, default=1000),
        mismatch=mismatch,
        reference_data=bool(d.get("reference_data", False)),
    )
    try:
        scenario.design_grid()
        scenario.true_grid()
    except IrrationalRatio as exc:
        raise ScenarioError("timing", str(exc)) from None
    return scenario


def load_scenario(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ScenarioError("--scenario", f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError("--scenario", f"invalid JSON in {path}: {exc}") from None
    return scenario_from_dict(doc)


# --- built-in demos ---------------------------------------------------------


def single_rate_system():
    A = [[-1, 0, 0], [0, -5, -3], [0, 2, 0]]
    B = [[1, 0], [0, 1], [0, 0]]
    C = [[1, 0, 1]]
    return LtiSystem(A, B, C)


def multirate_system():
    """Block companion realization of ``[1/(s+1), 2/((s+2)(s+3)), 4/((s+4)(s+5))]``."""
    A = block_diag([[-1.0]], [[0, 1], [-6, -5]], [[0, 1], [-20, -9]])
    B = np.zeros((5, 3))
    B[0, 0] = B[2, 1] = B[4, 2] = 1.0
    C = np.array([[1.0, 2.0, 0.0, 4.0, 0.0]])
    return LtiSystem(A, B, C)


def multirate_transfer(s):
    return np.array([[1 / (s + 1), 2 / ((s + 2) * (s + 3)), 4 / ((s + 4) * (s + 5))]])


def check_realization(sys, transfer, freqs):
    """Largest deviation of ``C (sI - A)^{-1} B`` from ``transfer`` over ``freqs``."""
    return max(np.abs(sys.transfer(s) - transfer(s)).max() for s in freqs)


def x38_placeholder_system(seed=38):
    """Synthetic stand-in with the X-38 dimensions (n=11, p=3, q=9). Not measured vehicle data."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((11, 11)) / np.sqrt(11)
    A -= (np.max(np.linalg.eigvals(A).real) + 0.5) * np.eye(11)
    B = rng.standard_normal((11, 3))
    C = rng.standard_normal((9, 11))
    return LtiSystem(A, B, C)


def _multirate(**kw):
    return Scenario(
        system=multirate_system(),
        timing=Timing(1.0, 0.4, 0.3),
        thresholds=ThresholdSpec("linear", 10.0),
        t_star="auto",
        clusters=20,
        reference_data=True,
        **kw,
    )


def builtin(name):
    """Return the named demo scenario."""
    if name == "sec4a":
        return Scenario(
            system=single_rate_system(),
            timing=Timing(1.0, 1.0, 0.0),
            name="sec4a",
            description="single-rate example, T_a = T_s = 1 s, no offset",
            thresholds=ThresholdSpec("linear", 1.0),
            clusters=10,
            reference_data=True,
        )
    if name == "sec4c":
        return _multirate(name="sec4c", description="R = 2/5 with offset 0.3 s (delta = 0.75)")
    if name == "sec4c-mismatch":
        return _multirate(
            name="sec4c-mismatch",
            description="plan designed for T_s = 0.4, simulated on a true T_s = 0.4004",
            mismatch=Timing(1.0, 0.4004, 0.3),
        )
    if name == "x38-placeholder":
        return Scenario(
            system=x38_placeholder_system(),
            timing=Timing(0.04, 0.16, 0.0),
            name="x38-placeholder",
            description="SYNTHETIC placeholder with X-38 dimensions (n=11, p=3, q=9, R=4); not measured vehicle data",
            thresholds=ThresholdSpec("linear", 0.5),
            clusters=10,
            reference_data=False,
        )
    raise KeyError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}")


DEMOS = ("sec4a", "sec4c", "sec4c-mismatch", "x38-placeholder")
