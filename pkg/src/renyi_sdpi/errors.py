"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`SdpiError`,
which itself is a ``ValueError`` so callers that only care about bad input can
catch the builtin.
"""


class SdpiError(ValueError):
    pass


class NegativeWeight(SdpiError):
    pass


class NotNormalized(SdpiError):
    pass


class ZeroTotalMass(SdpiError):
    pass


class DimensionMismatch(SdpiError):
    pass


class ZeroMassEvent(SdpiError):
    pass


class ParameterOutOfRange(SdpiError):
    pass


class InvalidOrder(SdpiError):
    pass


class DegenerateMeasure(SdpiError):
    pass


class AlphabetTooLarge(SdpiError):
    pass


class InvalidRadius(SdpiError):
    pass


class NotFullSupport(SdpiError):
    pass


class UnsupportedKind(SdpiError):
    pass


class NotErgodic(SdpiError):
    pass


class NoConvergence(SdpiError):
    pass


class AbsoluteContinuityViolation(SdpiError):
    pass


class RateOutOfRange(SdpiError):
    pass


class ParseError(SdpiError):
    pass
