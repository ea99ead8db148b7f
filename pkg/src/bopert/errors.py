"""Exception hierarchy shared by all modules."""


class BOPertError(Exception):
    """Base class for every error raised by the package."""


class SampleCountTooSmall(BOPertError, ValueError):
    pass


class RealnessViolation(BOPertError, ArithmeticError):
    pass


class KappaOutOfRange(BOPertError, ValueError):
    pass


class NonpositiveDepth(BOPertError, ValueError):
    pass


class MeanResidual(BOPertError, ArithmeticError):
    pass


class BlowupDetected(BOPertError, ArithmeticError):
    pass


class NotPositiveDefinite(BOPertError, ArithmeticError):
    """Raised when ``L_u + kappa`` fails a Cholesky factorization."""


class ThresholdNotFound(BOPertError, ArithmeticError):
    pass


class QuadratureNotConverged(BOPertError, ArithmeticError):
    pass


class CountExceedsDim(BOPertError, ValueError):
    pass


class FormatError(BOPertError, ValueError):
    pass


class ConfigError(BOPertError, ValueError):
    pass
