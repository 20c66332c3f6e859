"""Exception hierarchy shared by all modules."""


class SDAttackError(Exception):
    """Base class for every error raised by this package."""


class InconsistentSystem(SDAttackError):
    """A linear system has no solution within the residual tolerance."""


class IrrationalRatio(SDAttackError):
    """A period ratio (or offset) has no rational approximation of bounded denominator."""


class NegativeDuration(SDAttackError):
    """A zero-order-hold integral was requested over a negative time span."""


class NoRedundancy(SDAttackError):
    """The stacked output map has a trivial kernel, so no stealthy direction exists."""


class RankDeficientBd(SDAttackError):
    """The discretized input matrix does not have full column rank."""


class InfeasibleEta(SDAttackError):
    """Every stealthy direction is annihilated at the disruption time."""


class ScenarioError(SDAttackError):
    """A scenario document is malformed; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
