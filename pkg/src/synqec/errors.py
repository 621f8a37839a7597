"""Exception types shared across the package."""


class SynqecError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(SynqecError):
    """Operands have incompatible shapes."""


class NonHermitianInput(SynqecError):
    """A matrix required to be Hermitian is not, within tolerance."""


class NegativeSpectrum(SynqecError):
    """A matrix required to be PSD has a significantly negative eigenvalue."""


class OutOfRange(SynqecError):
    """A scalar parameter lies outside its admissible interval."""


class ToleranceViolation(SynqecError):
    """A numerical certificate failed.  Carries the offending residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InconsistentGroup(SynqecError):
    """Stabilizer generators do not define a codespace of the expected size."""


class NonOrthonormal(SynqecError):
    """Supplied codewords are not an orthonormal set."""


class ParseError(SynqecError):
    """A code file could not be parsed."""


class NonUnitary(SynqecError):
    """A truth table does not define a unitary."""


class SubspacesOverlap(SynqecError):
    """Error images of the codespace overlap, so a syndrome-measurement
    recovery of the restricted kind cannot be built."""


class NotEigenspace(SynqecError):
    """An error image is not an eigenspace of a measurement operator."""


class TruthTableMismatch(SynqecError):
    """Encoding unitary does not map the designated inputs to the codewords."""


class UnsupportedDimension(SynqecError):
    """Operation only implemented for two-dimensional codespaces."""


class IllConditioned(SynqecError):
    """Least-squares design matrix is numerically singular."""


class NoConvergence(SynqecError):
    """Nonlinear fit failed to converge from every starting point."""
