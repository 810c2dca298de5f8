"""Exception types shared across the package."""


class LpfixError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(LpfixError):
    pass


class ContractViolation(LpfixError):
    """An argument violated a documented precondition (NaN input, zero vector, ...)."""


class NoCandidateReached(LpfixError):
    """No centerpoint candidate certified the requested quality floor.

    Carries the best certificate found so the caller can decide whether to
    lower the floor or enlarge the slate.
    """

    def __init__(self, rho_min, best):
        self.rho_min = rho_min
        self.best = best
        super().__init__(
            f"no candidate reached rho_min={rho_min:.6g}; best rho={best.rho:.6g}")


class MalformedOracle(LpfixError):
    """The oracle returned a point outside the unit cube."""


class EmptySearchSpace(LpfixError):
    """Every cloud point was discarded before termination.

    For a declared-contracting oracle this is evidence of non-contraction
    (a fine enough cloud always keeps the survival ball alive), or of an
    insufficient cloud size N.
    """


class NonContractionSuspected(LpfixError):
    """The iteration exceeded the residual-decay cap a contraction permits."""


class OffGridQuery(LpfixError):
    def __init__(self, coord_index, value, bits):
        self.coord_index = coord_index
        self.value = value
        self.bits = bits
        super().__init__(
            f"coordinate {coord_index} = {value!r} is not of the form k/2^{bits}")


class ResolutionTooCoarse(LpfixError):
    pass


class GridTooLarge(LpfixError):
    pass


class CertificateIncomplete(LpfixError):
    """Query cap hit with alive grid points left and no fixpoint found."""

    def __init__(self, message, trace=None):
        self.trace = trace
        super().__init__(message)


class QueryBudgetExceeded(LpfixError):
    """Internal signal: the oracle wrapper refused a query past the budget."""
