"""Exception hierarchy shared across the package."""


class InvGlmError(Exception):
    """Base class for every error raised by invglm."""


# linear algebra
class NotPositiveDefinite(InvGlmError):
    pass


class InvalidSize(InvGlmError, ValueError):
    pass


# model validation
class ShapeMismatch(InvGlmError, ValueError):
    pass


class IndicatorViolation(InvGlmError, ValueError):
    pass


class RankDeficient(InvGlmError):
    pass


# estimation
class DegenerateVariance(InvGlmError):
    pass


class Diverged(InvGlmError):
    pass


class NonFinite(InvGlmError, ValueError):
    pass


class MaxIterations(InvGlmError):
    pass


class DimensionMismatch(InvGlmError, ValueError):
    pass


class ZeroNorm(InvGlmError):
    pass


class NotBinaryDesign(InvGlmError, ValueError):
    pass


class Degenerate(InvGlmError, ValueError):
    pass


class InvalidSampling(InvGlmError, ValueError):
    pass


# inference
class Unsolvable(InvGlmError):
    pass


class DegenerateMask(InvGlmError):
    pass


class EmptyMask(InvGlmError, ValueError):
    pass


class TooFewScores(InvGlmError, ValueError):
    pass


# volumes
class UnsupportedDatatype(InvGlmError):
    pass


class BadMagic(InvGlmError):
    pass


class UnsupportedByteOrder(InvGlmError):
    pass


class TruncatedFile(InvGlmError):
    pass


class AllVoxelsFailed(InvGlmError):
    pass


class ConfigError(InvGlmError, ValueError):
    """Invalid run configuration; ``field`` holds the dotted path of the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
