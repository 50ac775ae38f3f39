"""Exception hierarchy shared by every module."""


class HeckeVoronoiError(Exception):
    pass


class NotSquarefree(HeckeVoronoiError, ValueError):
    pass


class NotPrime(HeckeVoronoiError, ValueError):
    pass


class NotSplit(HeckeVoronoiError, ValueError):
    pass


class SearchExhausted(HeckeVoronoiError, RuntimeError):
    pass


class ZeroModulus(HeckeVoronoiError, ValueError):
    pass


class NonPrimitive(HeckeVoronoiError, ValueError):
    pass


class UnitInconsistency(HeckeVoronoiError, ValueError):
    pass


class NotCoprime(HeckeVoronoiError, ValueError):
    pass


class UnsupportedClassGroup(HeckeVoronoiError, NotImplementedError):
    pass


class EvenInput(HeckeVoronoiError, ValueError):
    pass


class OracleTooLarge(HeckeVoronoiError, ValueError):
    pass


class InvalidCase(HeckeVoronoiError, ValueError):
    pass


class BudgetExceeded(HeckeVoronoiError, RuntimeError):
    pass


class DegeneratePhase(HeckeVoronoiError, ValueError):
    pass


class NoStationaryPoint(HeckeVoronoiError, ValueError):
    pass


class NonConvexPhase(HeckeVoronoiError, ValueError):
    pass


class HessianViolation(HeckeVoronoiError, ValueError):
    pass


class AbscissaTooSmall(HeckeVoronoiError, ValueError):
    pass


class UnsupportedField(HeckeVoronoiError, NotImplementedError):
    pass
