"""Exception hierarchy shared by all modules."""


class QmtResumError(Exception):
    """Base class for every error raised by this package."""


class ConventionError(QmtResumError, ValueError):
    """Two series use different expansion variables or sign conventions."""


class DegenerateInputError(QmtResumError, ValueError):
    """Input is too short or identically zero for the requested operation."""


class DegeneratePadeError(QmtResumError, ArithmeticError):
    """The Toeplitz system of a Pade approximant is singular."""


class PoleProximityError(QmtResumError, ArithmeticError):
    """Evaluation point lies on (or numerically at) a denominator root."""


class PoleOnContourError(QmtResumError, ArithmeticError):
    """An ordinary Laplace integral meets a pole on the positive real axis.

    Use the principal-value or a lateral prescription instead.
    """


class UnsupportedSingularityError(QmtResumError, ArithmeticError):
    """Higher-order pole on the integration axis."""


class ClassificationError(QmtResumError, ValueError):
    """Coefficient growth does not match any supported Gevrey order."""


class NumericError(QmtResumError, ArithmeticError):
    """A numerical routine failed to converge."""

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


class DegeneracyError(QmtResumError, ArithmeticError):
    """Target level is (numerically) degenerate, so the QMT diverges."""


class StepSizeError(QmtResumError, ValueError):
    """Finite-difference step too large for reliable phase alignment."""


class DomainError(QmtResumError, ValueError):
    """Special function evaluated at a pole or outside its domain."""
