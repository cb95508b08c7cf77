"""Exception hierarchy for structured rejections and hard failures."""


class IcmGraphError(Exception):
    """Base class for all package errors."""


class NotPrimePower(IcmGraphError):
    pass


class NotWeil(IcmGraphError):
    pass


class NotSquarefree(IcmGraphError):
    pass


class NotOrdinary(IcmGraphError):
    pass


class NonSquarefreeBaseChange(IcmGraphError):
    pass


class ZeroDivisor(IcmGraphError):
    """Inversion of a nonzero non-unit; carries the offending factor of h."""

    def __init__(self, factor):
        self.factor = factor
        super().__init__(f"zero divisor: annihilated by factor {factor}")


class DivisionByZero(IcmGraphError):
    pass


class PrecisionExhausted(IcmGraphError):
    pass


class DegreeTooLarge(IcmGraphError):
    pass


class NotContained(IcmGraphError):
    pass


class UnitRankUnsupported(IcmGraphError):
    pass


class MissingArithmeticData(IcmGraphError):
    pass


class DiscriminantUnfactorable(IcmGraphError):
    pass


class IngestedDataInvalid(IcmGraphError):
    pass


class EnumerationRadiusExceeded(IcmGraphError):
    """A short-vector search hit its hard cap; never a silent negative."""


class IncomparableEnds(IcmGraphError):
    pass


class NoCertificate(IcmGraphError):
    pass


class TooLarge(IcmGraphError):
    pass


class PicTooLarge(IcmGraphError):
    pass


class NotInMonoid(IcmGraphError):
    """Internal invariant breach: an ideal failed to resolve to a vertex."""
