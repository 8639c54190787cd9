"""Exception hierarchy shared by every module."""


class AntiderivError(Exception):
    """Base class for library errors."""


class ConfigError(AntiderivError, ValueError):
    pass


class DivisionByZero(AntiderivError, ZeroDivisionError):
    pass


class IndistinguishableAtPrecision(AntiderivError):
    pass


class OutOfDomain(AntiderivError, ValueError):
    pass


class PoleHit(AntiderivError, ZeroDivisionError):
    pass


class PoleOnNode(PoleHit):
    """A sigma-node of the antiderivation series lands on a pole."""


class PrecisionExhausted(AntiderivError):
    pass


class ExpDomainError(AntiderivError, ValueError):
    pass


class LogDomainError(AntiderivError, ValueError):
    pass


class ExprSyntaxError(AntiderivError, SyntaxError):
    def __init__(self, message: str, position: int = -1):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ArityError(AntiderivError, TypeError):
    pass


class DegreeMismatch(AntiderivError, ValueError):
    pass


class ZeroConstant(AntiderivError):
    """The loop constant is indistinguishable from zero."""


class PoleInside(AntiderivError, ValueError):
    pass


class ZeroOnBorder(AntiderivError, ValueError):
    pass


class NonConvergentSweep(AntiderivError):
    pass


class BorderTouchesSpectrum(AntiderivError, ValueError):
    pass


class SingularAtEvaluation(AntiderivError, ZeroDivisionError):
    pass


class RankDeficiency(AntiderivError):
    pass


class NotHolomorphic(AntiderivError, ValueError):
    """The integrand fails the symbolic d/d(conj z) = 0 check."""


class IncompatibleData(AntiderivError, ValueError):
    """Right-hand sides violate d f_j / d conj(z_l) = d f_l / d conj(z_j)."""
