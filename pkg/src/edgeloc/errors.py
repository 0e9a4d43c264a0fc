"""Exception hierarchy shared by every stage of the pipeline."""


class EdgeLocError(Exception):
    pass


class PreconditionError(EdgeLocError, ValueError):
    """Input violates a documented precondition (CLI exit code 2)."""


class DegenerateGeometryError(PreconditionError):
    """Bearing undefined because two agents coincide."""


class AssumptionViolation(PreconditionError):
    """Measurement set breaks a structural assumption of the method."""


class NumericalError(EdgeLocError, ArithmeticError):
    """Numerical failure during integration or extraction (CLI exit code 3)."""


class InvariantError(EdgeLocError, RuntimeError):
    """An internal invariant did not hold; indicates a bug, not bad input."""
