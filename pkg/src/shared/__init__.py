"""공유 모듈"""

from src.shared.exceptions import (
    CalcException,
    CoefficientClassException,
    EllipticityException,
    GridException,
    MissingDerivativeRuleException,
    NotDiffeomorphismException,
    QuadratureResolutionException,
    SeriesTooDeepException,
    SingularEvaluationException,
    ValidationException,
)
from src.shared.parallel import parallel_map

__all__ = [
    "CalcException",
    "CoefficientClassException",
    "EllipticityException",
    "GridException",
    "MissingDerivativeRuleException",
    "NotDiffeomorphismException",
    "QuadratureResolutionException",
    "SeriesTooDeepException",
    "SingularEvaluationException",
    "ValidationException",
    "parallel_map",
]
