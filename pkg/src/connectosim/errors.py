"""Exception hierarchy shared across the toolkit."""


class ConnectosimError(Exception):
    """Base class for all domain errors raised by this package."""


class GraphValidationError(ConnectosimError):
    """Input matrix or edge data violates the connectome invariants."""


class ContractViolationError(ConnectosimError):
    """A caller broke an operation precondition (bad index, shape, range)."""


class UndefinedMetricError(ConnectosimError):
    """The requested metric is not defined on this graph (e.g. zero degree
    variance for assortativity, or fewer than two nodes for density)."""


class InfeasibleError(ConnectosimError):
    """No admissible solution exists for the requested target.

    Carries the best value that was reached before giving up, when one
    is meaningful.
    """

    def __init__(self, message, best_achieved=None):
        super().__init__(message)
        self.best_achieved = best_achieved


class CapacityError(ConnectosimError):
    """Problem size exceeds the configured exact-solver ceiling."""


class NumericError(ConnectosimError):
    """A numeric computation produced non-finite values."""


class FactSyntaxError(ConnectosimError):
    """Malformed ground-fact text; carries the 1-based line number."""

    def __init__(self, message, line_no):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
