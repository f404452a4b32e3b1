"""각도 좌표 변환 카탈로그 (항등, 선형 확대, 원 위의 뫼비우스형 변환)"""

import numpy as np
import sympy as sp

from src.expr import registry
from src.expr.service import diff, evaluate_grid
from src.expr.variables import theta
from src.symbols.schemas import AngularDiffeo
from src.shared.exceptions import NotDiffeomorphismException, ValidationException


def _arctan() -> type[sp.Function]:
    return registry.register_function(
        "arctan",
        evaluator=np.arctan,
        derivative=lambda x: 1 / (1 + x**2),
    )


def identity() -> AngularDiffeo:
    return AngularDiffeo(name="identity", forward=theta, inverse=theta)


def dilation(c: float) -> AngularDiffeo:
    """θ ↦ cθ (호 사이의 변환, c > 0)"""
    if c <= 0:
        raise NotDiffeomorphismException(f"dilation({c})", location=0.0)
    factor = sp.nsimplify(c, rational=True)
    return AngularDiffeo(name=f"dil_{c:g}", forward=factor * theta, inverse=theta / factor)


def _mobius_expr(kappa: sp.Expr) -> sp.Expr:
    # θ ↦ 2·atan(κ·tan(θ/2)) 를 θ에 대해 매끄럽게 들어올린 형태
    atan = _arctan()
    num = (kappa - 1) * sp.sin(theta)
    den = (1 + kappa) + (1 - kappa) * sp.cos(theta)
    return theta + 2 * atan(num / den)


def mobius(kappa: float) -> AngularDiffeo:
    """원의 뫼비우스형 변환; 도함수 2κ/((1+κ²)+(1−κ²)cos θ), 역변환은 κ ↦ 1/κ"""
    if kappa <= 0:
        raise ValidationException("kappa must be positive", details={"kappa": kappa})
    k = sp.nsimplify(kappa, rational=True)
    return AngularDiffeo(
        name=f"mob_k{int(round(kappa * 1000)):04d}",
        forward=_mobius_expr(k),
        inverse=_mobius_expr(1 / k),
    )


def derivative(phi: AngularDiffeo) -> sp.Expr:
    """∂_θ φ′"""
    return diff(phi.forward, "theta")


def check_positive(phi: AngularDiffeo, theta_min: float = 0.0, theta_max: float = 2 * np.pi, samples: int = 256) -> float:
    """샘플에서 ∂φ′ > 0 확인, 최솟값 반환"""
    grid = np.linspace(theta_min, theta_max, samples, endpoint=False)
    values = evaluate_grid(derivative(phi), {"theta": grid}).real
    worst = int(np.argmin(values))
    if values[worst] <= 0:
        raise NotDiffeomorphismException(phi.name, location=float(grid[worst]))
    return float(values[worst])


def map_values(phi: AngularDiffeo, theta_values: np.ndarray, inverse: bool = False) -> np.ndarray:
    expr = phi.inverse if inverse else phi.forward
    return evaluate_grid(expr, {"theta": np.asarray(theta_values, dtype=float)}).real
