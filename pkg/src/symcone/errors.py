"""Exception hierarchy shared by all modules."""


class SymConeError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(SymConeError, ValueError):
    """Elements or operators belong to different (or malformed) algebras."""


class ConeDomainError(SymConeError, ValueError):
    """An element lies outside the open cone or the unit domain."""


class SingularityError(ConeDomainError):
    def __init__(self, message, min_abs_eigenvalue):
        super().__init__(message)
        self.min_abs_eigenvalue = min_abs_eigenvalue


class BoundaryError(ConeDomainError):
    """An intermediate quantity is numerically on the boundary of the cone."""


class UnsupportedOperationError(SymConeError):
    """The operation is not defined for this kind of algebra."""


class ParameterError(SymConeError, ValueError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DiagnosticError(SymConeError, RuntimeError):
    """A sampler diagnostic failed (e.g. a Metropolis chain stopped moving)."""
