"""Exception hierarchy shared across the package."""


class AllocationError(ValueError):
    """A strategy profile violates the simplex floor or sum constraint."""


class InfeasibleBudget(ArithmeticError):
    """The oracle cannot realize an allocation (budget too tight).

    The solver converts this into an infinite cost instead of failing.
    """


class OracleError(RuntimeError):
    """Base class for failures of an external resource oracle."""


class OracleUnavailable(OracleError):
    """The bridge process died, closed its pipe, or timed out."""


class ProtocolError(OracleError):
    """The bridge sent a line that does not follow the wire protocol."""

    def __init__(self, message: str, raw: str = ""):
        super().__init__(f"{message}: {raw!r}" if raw else message)
        self.raw = raw


class EstimateValidationError(OracleError):
    """The bridge answered with Q < 1 or a non-positive runtime."""


class OracleReportedError(OracleError):
    """The bridge answered a request with an explicit error object."""


class SolveError(RuntimeError):
    """Every restart of the solver failed."""
