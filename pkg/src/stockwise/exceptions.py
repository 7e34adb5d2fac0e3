"""Exception hierarchy shared by the library and the command line."""


class StockwiseError(Exception):
    """Base class for every error raised by stockwise."""


class DomainError(StockwiseError, ValueError):
    """An argument lies outside the domain of the operation."""


class UnboundedQuantile(StockwiseError):
    """The requested quantile (or optimal order) is infinite."""


class EmptySample(StockwiseError, ValueError):
    pass


class NegativeDemand(StockwiseError, ValueError):
    pass


class LengthMismatch(StockwiseError, ValueError):
    pass


class QuadratureFailure(StockwiseError):
    """Adaptive quadrature did not reach the requested tolerance."""


class NotContinuous(StockwiseError, TypeError):
    pass


class Infeasible(StockwiseError):
    """The constraint admits no nonnegative plan within the demand supports."""


class InfeasibleWithinBounds(Infeasible):
    pass


class BudgetExceeded(StockwiseError):
    """An exhaustive search would visit more points than allowed."""
