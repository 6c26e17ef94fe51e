"""Exception types shared across the package.

Every error carries a human-readable message naming the violated
contract and, where applicable, the offending magnitude.
"""


class BackflowError(Exception):
    """Base class for all library errors."""


# --- input / contract violations (CLI exit code 1) ---------------------


class NotHermitian(BackflowError):
    """Matrix deviates from its conjugate transpose beyond tolerance."""


class NotPositive(BackflowError):
    """Matrix has an eigenvalue below the negative tolerance."""


class BadTrace(BackflowError):
    """Trace differs from the required value beyond tolerance."""


class BadDimension(BackflowError):
    """Matrix or vector has an unsupported shape or dimension."""


class DimensionMismatch(BackflowError):
    """Two operands live on Hilbert spaces of different dimension."""


class IdenticalStates(BackflowError):
    """Operation requires two distinct states."""


class OrthogonalPair(BackflowError):
    """Operation requires a non-orthogonal state pair."""


class DomainError(BackflowError):
    """Scalar argument outside its documented domain."""


class IndexOutOfRange(BackflowError, IndexError):
    """Grid index outside the sampled trajectory."""


class ParseError(BackflowError):
    """Configuration file could not be parsed."""


class ValidationError(BackflowError):
    """Configuration value fails validation."""


# --- numerical failures (CLI exit code 2) ------------------------------


class QuadratureFailure(BackflowError):
    """Cumulative quadrature produced non-finite values."""


class CptViolation(BackflowError):
    """Map coefficients violate trace preservation / complete positivity."""


class IntegratorDiverged(BackflowError):
    """Time stepping produced non-finite matrix entries."""


class PositivityLost(BackflowError):
    """Integrated state drifted below the allowed negative-eigenvalue band."""


class PositivityFailure(BackflowError):
    """Translated state failed positivity validation."""
