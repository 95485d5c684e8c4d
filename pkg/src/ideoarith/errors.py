"""Exception types raised across the package."""


class IdeoError(Exception):
    """Base class for every error raised by ideoarith."""


class MalformedSpec(IdeoError):
    pass


class NonSquarefreeD(IdeoError):
    pass


class ReducibleMinpoly(IdeoError):
    pass


class PrecisionExhausted(IdeoError):
    """A certified decision could not be reached below the precision cap."""


class RationalTerminated(IdeoError):
    def __init__(self, length):
        super().__init__(f"expansion terminates after {length} terms")
        self.length = length


class IndexOutOfRange(IdeoError):
    pass


class RExceedsQuotient(IdeoError):
    pass


class NonPositiveTerm(IdeoError):
    pass


class InfinitesimalViolation(IdeoError):
    pass


class LogOfUnit(IdeoError):
    pass


class NotMonotone(IdeoError):
    pass


class ZeroTheta(IdeoError):
    pass


class PoleHit(IdeoError):
    pass


class NotUnimodular(IdeoError):
    pass


class WindowMismatch(IdeoError):
    pass


class MembershipFailed(IdeoError):
    def __init__(self, side, verdict=None):
        super().__init__(f"membership failed on side {side}")
        self.side = side
        self.verdict = verdict


class RationalInput(IdeoError):
    pass


class MixedTheta(IdeoError):
    pass


class CriterionMismatch(IdeoError):
    pass


class ZeroPolynomial(IdeoError):
    pass


class ZeroDenominator(IdeoError):
    pass


class RootIsolationFailed(IdeoError):
    pass


class SearchSpaceTooLarge(IdeoError):
    pass


class TieUnresolved(IdeoError):
    pass


class NotSquareForSum(IdeoError):
    pass


class SingularDenominatorBlock(IdeoError):
    pass


class NotPV(IdeoError):
    pass


class NormWindowNotInfinitesimal(IdeoError):
    pass


class WindowHypothesisUnmet(IdeoError):
    pass


class IdentityViolated(IdeoError):
    """An exact identity that must hold failed in interval arithmetic."""
