"""Exception hierarchy shared by every brstlab module."""


class BrstLabError(Exception):
    """Base class for all library errors."""


class DimensionError(BrstLabError, ValueError):
    """Operand sizes do not agree."""


class NotHermitianError(BrstLabError, ValueError):
    """A matrix expected to be Hermitian is not, within tolerance."""


class SizeError(BrstLabError, ValueError):
    """A requested construction exceeds the supported size range."""


class ShapeError(BrstLabError, ValueError):
    """Two structures that must be paired have incompatible shapes."""


class ClosureError(BrstLabError, ValueError):
    """Constraint data fail to close, or a charge fails to square to zero."""


class UnsupportedError(BrstLabError, NotImplementedError):
    """The input lies outside the supported class of systems."""


class NilpotencyError(BrstLabError, ValueError):
    """A charge handed to the decomposition does not square to zero."""


class GradingError(BrstLabError, ValueError):
    """A grading operator is not an involution or does not make the charge odd."""


class RankAmbiguityError(BrstLabError, ArithmeticError):
    """Singular values sit too close to the rank cutoff for a stable decision."""

    def __init__(self, message, singular_values=None):
        super().__init__(message)
        self.singular_values = singular_values


class StructureTheoremViolation(BrstLabError, AssertionError):
    """Ran(delta) and Ker(delta) intersected with Ker(Phi_s) disagree."""

    def __init__(self, message, witness=None, residual=None):
        super().__init__(message)
        self.witness = witness
        self.residual = residual
