"""Exception hierarchy.

Configuration problems derive from :class:`ConfigError` (CLI exit code 2);
numerical failures derive from :class:`SolverError` (CLI exit code 3).
"""


class QGBandError(Exception):
    pass


class ConfigError(QGBandError, ValueError):
    pass


class NonPositiveLength(ConfigError):
    pass


class CouplingOrderViolated(ConfigError):
    pass


class UnknownVertex(ConfigError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class WrongDegree(ConfigError):
    pass


class InvalidCondition(ConfigError):
    pass


class SolverError(QGBandError, RuntimeError):
    pass


class LambdaOutOfRange(SolverError):
    pass


class ScanResolutionTooCoarse(SolverError):
    pass


class NotAnEigenvalue(SolverError):
    pass


class MultiplicityAmbiguous(SolverError):
    pass


class GridTooCoarse(SolverError):
    pass


class NotACurve(SolverError):
    pass


class NoCurve(SolverError):
    """The quadrangle inequalities fail; ``index`` is the offending side (1-based)."""

    def __init__(self, message, index=None, sides=None):
        super().__init__(message)
        self.index = index
        self.sides = sides


class GapChainViolated(SolverError):
    def __init__(self, message, k=None):
        super().__init__(message)
        self.k = k
