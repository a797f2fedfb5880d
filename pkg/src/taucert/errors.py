"""Exception types shared across the package.

Every failure mode that callers are expected to branch on gets its own
class; the CLI maps these onto exit codes.
"""


class TaucertError(Exception):
    """Base class for all package errors."""


class MeasureInvalidError(TaucertError):
    """A measure description violates its invariants (mass, sign, overlap)."""


class NotSymmetricError(MeasureInvalidError):
    """Operation requires a symmetric measure and the input is not."""


class NoDensityError(TaucertError):
    """A density-based functional was requested where no density exists."""


class NotInClassError(TaucertError):
    """A certification routine was handed a measure outside the stated
    tail-ratio class."""


class UnboundedBelowError(TaucertError):
    """The infimum convolution (or a functional of it) is -infinity."""


class SlopeBoundError(TaucertError):
    """A function's slopes exceed the bound a certificate requires."""


class DivergentIntegralError(TaucertError):
    """An exponential-moment integral does not converge."""


class UnsupportedSetError(TaucertError):
    """Set object is not one of the supported convex families."""


class GridMismatchError(TaucertError):
    """Grid inputs are non-uniform or inconsistently sized."""


class DegenerateInputError(TaucertError):
    """Monte Carlo verification cannot proceed (e.g. empty base event)."""


class ConfigError(TaucertError):
    """Malformed or contradictory CLI configuration."""
