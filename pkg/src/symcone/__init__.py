"""Computation on symmetric cones: Jordan algebras, multiplication algorithms,
beta and beta-Riesz laws, and the independence-preserving transformation psi."""

__version__ = "0.1.0"

from .algebra import Algebra, Element, JordanFrame, Kind, check_algebra
from .dist import BetaParams, BetaRieszParams, SampleBatch, draw
from .errors import (
    BoundaryError,
    ConeDomainError,
    DiagnosticError,
    DimensionError,
    ParameterError,
    SingularityError,
    SymConeError,
    UnsupportedOperationError,
)
from .mulalg import MultiplicationRule, OrthogonalAutomorphism, check_axioms
from .stats import Scenario, VerificationReport, verify_direct, verify_k_invariance
from .transform import PredictedLaws, TransformSpec, predicted_uv_params, psi, psi_inv

__all__ = [
    "Algebra", "Element", "JordanFrame", "Kind", "check_algebra",
    "BetaParams", "BetaRieszParams", "SampleBatch", "draw",
    "BoundaryError", "ConeDomainError", "DiagnosticError", "DimensionError", "ParameterError",
    "SingularityError", "SymConeError", "UnsupportedOperationError",
    "MultiplicationRule", "OrthogonalAutomorphism", "check_axioms",
    "Scenario", "VerificationReport", "verify_direct", "verify_k_invariance",
    "PredictedLaws", "TransformSpec", "predicted_uv_params", "psi", "psi_inv",
    "__version__",
]
