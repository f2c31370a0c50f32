"""Exception types shared across the package."""


class PcgoptError(Exception):
    """Base class for all package-specific errors."""


class FormatError(PcgoptError):
    """Malformed or unsupported input file."""


class BreakdownError(PcgoptError):
    """Factorization breakdown (nonpositive pivot)."""

    def __init__(self, row, message=None):
        self.row = row
        super().__init__(message or f"nonpositive pivot in row {row}")


class SingularFactorError(PcgoptError):
    """Zero diagonal encountered in a triangular solve."""


class JacobiDivergentError(PcgoptError):
    """Jacobi iteration diverges; the SOR omega formula is inapplicable."""


class ZeroOperatorError(PcgoptError):
    """Power iteration produced the zero vector repeatedly."""


class IndefiniteOperatorError(PcgoptError):
    """CG detected a non-SPD matrix or preconditioner."""


class OptimizationFailedError(PcgoptError):
    """Scalar optimization could not collect enough valid evaluations."""

    def __init__(self, message, x=None):
        self.x = x
        super().__init__(message)
