"""Exception types raised across the package."""


class PvleadError(Exception):
    """Base class for all pvlead errors."""


class OutOfDomainError(PvleadError):
    """Query point lies outside the hull of grid nodes."""


class DegenerateCellError(PvleadError):
    """A grid cell's temporal mean is below the configured floor."""


class ShapeMismatchError(PvleadError):
    """Two fields do not share grid geometry or variable."""


class ZeroVarianceError(PvleadError):
    """A statistic requiring variance was asked of a constant series."""


class ParseError(PvleadError):
    """Malformed field/fleet/production file; message carries line context."""


class SchemaError(PvleadError):
    """File header does not match the documented schema."""


class OutOfRangeError(PvleadError):
    """Argument outside the supported numeric range."""


class LeadOutOfRangeError(PvleadError):
    """Requested forecast lead outside 1..max_lead."""


class DateMismatchError(PvleadError):
    """Input series do not share the same calendar dates."""


class RankDeficientError(PvleadError):
    """Design matrix is rank deficient."""


class TooFewSamplesError(PvleadError):
    """Not enough samples for the requested fit or fold count."""


class DimensionMismatchError(PvleadError):
    """Vectors of unequal dimension passed to a kernel."""


class DegenerateFeatureError(PvleadError):
    """A feature has zero variance on the training data."""


class NotConvergedError(PvleadError):
    """SVR solver hit its iteration budget before reaching tolerance.

    Carries diagnostics so callers can decide how to proceed.
    """

    def __init__(self, iterations: int, violation: float, tol: float):
        self.iterations = iterations
        self.violation = violation
        self.tol = tol
        super().__init__(
            f"SMO did not converge: KKT violation {violation:.3e} > tol {tol:.3e} "
            f"after {iterations} iterations"
        )


class LengthMismatchError(PvleadError):
    """Prediction and target series have different lengths."""


class ExcludedAllError(PvleadError):
    """Every sample fell below the percentage-error floor."""


class MissingLeadError(PvleadError):
    """A forecast field for a requested lead time is missing."""


class MissingInputError(PvleadError):
    """A required input file is missing; message names the path."""
