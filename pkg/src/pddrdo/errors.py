"""Exception types shared across the package."""


class PddRdoError(Exception):
    """Base class for all package errors."""


class DegenerateMeasure(PddRdoError):
    """Orthogonalization broke down; the requested degree exceeds what the
    quadrature can resolve for this measure."""


class DegreeOutOfRange(PddRdoError):
    """Polynomial degree outside the range supported by a basis."""


class InvalidTruncation(PddRdoError):
    """Inconsistent (N, S, m) truncation parameters."""


class DimensionMismatch(PddRdoError):
    """Array shapes inconsistent with the declared problem dimensions."""


class NonFiniteInput(PddRdoError):
    """NaN or infinity found where finite values are required."""


class InsufficientData(PddRdoError):
    """Too few samples for the requested operation."""


class SvdFailure(PddRdoError):
    """Singular value decomposition did not converge."""


class DegenerateActuals(PddRdoError):
    """Reference values have zero variance; R^2 undefined."""


class NonPositiveTemperature(PddRdoError):
    """Temperature must be strictly positive."""


class FractionSumViolation(PddRdoError):
    """Mole fractions must be non-negative and sum to one."""


class InsufficientRecords(PddRdoError):
    """A time series needs at least two records."""


class NonMonotoneTime(PddRdoError):
    """Time stamps of a series must be non-decreasing."""


class OutOfSupport(PddRdoError):
    """Input point outside the support of the input law."""


class OutOfBounds(PddRdoError):
    """Design vector outside the design space."""


class NonPositiveMean(PddRdoError):
    """Surrogate mean is non-positive; objective undefined."""


class ParseError(PddRdoError):
    """Malformed data file; carries the offending line number when known."""


class SchemaError(PddRdoError):
    """File structure does not match the expected schema."""


class ConfigError(PddRdoError):
    """Invalid or unknown configuration entry."""
