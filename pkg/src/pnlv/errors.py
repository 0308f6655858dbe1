"""Exception types raised across the package."""


class PainleveError(Exception):
    """Base class for all errors raised by pnlv."""


class DivisionNearZero(PainleveError):
    pass


class OffsetOutsideValidity(PainleveError):
    pass


class FitFailed(PainleveError):
    pass


class UnsupportedFamily(PainleveError):
    pass


class WrongParameters(PainleveError):
    pass


class StepSizeUnderflow(PainleveError):
    pass


class PoleFitFailed(PainleveError):
    pass


class CalibrationInvalid(PainleveError):
    pass


class DegenerateU(PainleveError):
    pass


class NoneKnown(PainleveError):
    pass


class BracketLost(PainleveError):
    pass


class AtZeroOfW(PainleveError):
    pass


class AtZeroOfWTilde(PainleveError):
    pass


class DenominatorVanishes(PainleveError):
    pass


class ParameterExcluded(PainleveError):
    pass


class EvaluationFailed(PainleveError):
    pass


class NoAdmissibleSamples(PainleveError):
    pass


class UnchainedPoles(PainleveError):
    pass


class ContourHitsPole(PainleveError):
    pass


class SectorNotPoleFree(PainleveError):
    pass


class AmbiguousAssignment(PainleveError):
    pass


class ZeroPolishFailed(PainleveError):
    pass
