"""Zero-stealthy, disruptive actuator attacks on multirate sampled-data LTI systems."""

from .analyzer import RedundancyReport, check_assumption1, select_disruption_time
from .attack import AttackPlan, ThresholdSpec, synthesize
from .errors import (
    InconsistentSystem,
    InfeasibleEta,
    IrrationalRatio,
    NegativeDuration,
    NoRedundancy,
    RankDeficientBd,
    ScenarioError,
    SDAttackError,
)
from .lifting import LiftedCluster, build_phi_star, lift
from .numlin import Tolerances
from .plant import LtiSystem, TimingGrid, discretize
from .scenarios import Scenario, Timing, builtin, load_scenario
from .sim import SimTrace, VerificationReport, simulate_error, verify

__version__ = "0.1.0"

__all__ = [
    "AttackPlan",
    "InconsistentSystem",
    "InfeasibleEta",
    "IrrationalRatio",
    "LiftedCluster",
    "LtiSystem",
    "NegativeDuration",
    "NoRedundancy",
    "RankDeficientBd",
    "RedundancyReport",
    "SDAttackError",
    "Scenario",
    "ScenarioError",
    "SimTrace",
    "ThresholdSpec",
    "Timing",
    "TimingGrid",
    "Tolerances",
    "VerificationReport",
    "build_phi_star",
    "builtin",
    "check_assumption1",
    "discretize",
    "lift",
    "load_scenario",
    "select_disruption_time",
    "simulate_error",
    "synthesize",
    "verify",
]
