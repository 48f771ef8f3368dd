"""Exception hierarchy shared by every module.

The CLI maps these onto exit statuses, so each class carries the code it
should produce.
"""


class ResonatorLabError(Exception):
    exit_status = 1


class ConfigError(ResonatorLabError, ValueError):
    """Parameters violate an operation's preconditions."""

    exit_status = 4


class DomainError(ConfigError):
    """Argument outside the mathematical domain of the operation."""


class TableRangeError(ConfigError, IndexError):
    """Query exceeds the range covered by the sieve tables."""


class ResourceError(ConfigError):
    """Requested size exceeds the configured memory or time budget."""


class PropertyFailure(ResonatorLabError):
    """An invariant, identity or inequality check failed."""

    exit_status = 2


class NumericalConsistencyError(PropertyFailure):
    pass


class SearchFailure(PropertyFailure):
    pass


class AccuracyError(ResonatorLabError, ArithmeticError):
    """Quadrature did not reach its tolerance.

    ``best`` holds the most refined estimate and ``error_estimate`` its
    node-doubling error.
    """

    exit_status = 3

    def __init__(self, message, best=None, error_estimate=None):
        super().__init__(message)
        self.best = best
        self.error_estimate = error_estimate
