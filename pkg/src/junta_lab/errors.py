"""Exception types shared across the package."""


class JuntaLabError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(JuntaLabError):
    """An argument is outside the documented domain."""


class StrictModeViolation(JuntaLabError):
    """A strict-mode parameter constraint does not hold at this scale."""


class IndexOutOfRange(JuntaLabError):
    """A 1-based coordinate or count index is outside its valid range."""


class DimensionMismatch(JuntaLabError):
    """Two objects that must share a dimension or universe do not."""


class TooLarge(JuntaLabError):
    """The request exceeds the exhaustive-computation caps."""


class EpsilonOutOfRange(JuntaLabError):
    """The distance parameter is outside the range a sampler supports."""


class WeightOutOfRange(JuntaLabError):
    """A requested exact ones-count rounds outside [1, 2^n]."""


class InconsistentInput(JuntaLabError):
    """Inputs contradict each other (e.g. a response bit with no backing query)."""


class BadM(JuntaLabError):
    """The addressing set fails to separate some far-apart query pair."""


class MismatchedSupport(JuntaLabError):
    """Two distributions that must share a support do not."""


class DegenerateRate(JuntaLabError):
    """A success rate of exactly 0 or 1 where the formula is undefined."""
