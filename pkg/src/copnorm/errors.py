"""Exception hierarchy shared by every module of the package."""


class CopnormError(ValueError):
    """Base class for all domain errors raised by copnorm."""


# moebius
class DegenerateMap(CopnormError):
    pass


class PoleAtInput(CopnormError):
    pass


class PoleInDisk(CopnormError):
    pass


class NotSelfMap(CopnormError):
    pass


class NotTangent(CopnormError):
    pass


class AffineInput(CopnormError):
    pass


class NotFixingOne(CopnormError):
    pass


class NonrealDerivative(CopnormError):
    pass


class SelfMapViolation(CopnormError):
    pass


# specialfn
class PoleOfGamma(CopnormError):
    pass


class ParameterPole(CopnormError):
    pass


class NoConvergence(CopnormError):
    """A series or iteration hit its cap.

    The best available estimate is attached as ``result`` so callers that
    can live with a flagged value do not have to recompute it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class RealAlphaUnsupported(CopnormError):
    pass


# normcalc
class MissingQdForm(CopnormError):
    pass


class AutomorphismBoundary(CopnormError):
    pass


class SearchExhausted(CopnormError):
    pass


class UnsupportedExactNorm(CopnormError):
    pass


class NonrealD(CopnormError):
    pass


class DegenerateR(CopnormError):
    pass


class OutOfScope(CopnormError):
    pass


# oracle
class ComplexDUnsupported(CopnormError):
    pass


class NoRoot(CopnormError):
    pass
