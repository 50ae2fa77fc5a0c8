"""Exception hierarchy shared by every module of the package."""


class PadicCirclesError(Exception):
    """Base class for all errors raised by this package."""


class PrecisionExhausted(PadicCirclesError, ArithmeticError):
    """Too few significant digits remain to continue a computation."""


class DivisionByZero(PadicCirclesError, ZeroDivisionError):
    pass


class NotASquare(PadicCirclesError, ValueError):
    pass


class OddValuation(PadicCirclesError, ValueError):
    pass


class NotAUnit(PadicCirclesError, ValueError):
    pass


class OutOfConvergenceDomain(PadicCirclesError, ValueError):
    pass


class SingularMatrix(PadicCirclesError, ValueError):
    pass


class DegenerateFrame(PadicCirclesError, ValueError):
    pass


class NonHyperbolicGenerator(PadicCirclesError, ValueError):
    pass


class NoValidLabeling(PadicCirclesError):
    """No axis labeling inside the search window makes the half-trees disjoint."""

    def __init__(self, message, violation=None):
        super().__init__(message)
        self.violation = violation


class NonTermination(PadicCirclesError, RuntimeError):
    pass


class NotStabilized(PadicCirclesError):
    pass


class NotLimitPoints(PadicCirclesError, ValueError):
    pass


class FrontierBudgetExceeded(PadicCirclesError):
    pass


class DegenerateBall(PadicCirclesError, ValueError):
    pass


class Inconclusive(PadicCirclesError):
    pass


class ConfigError(PadicCirclesError, ValueError):
    pass
