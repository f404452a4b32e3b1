"""가중치 함수 카탈로그: one (원통), sqrt1pr2 (원뿔형 ⟨r⟩), exp-windowed (쌍곡형 e^r, r ≥ 0)"""

import logging
from functools import lru_cache

import numpy as np
import sympy as sp

from src.expr import registry
from src.expr.service import diff, evaluate_grid
from src.expr.variables import r
from src.symbols.schemas import WeightFunction
from src.shared.exceptions import ValidationException

logger = logging.getLogger(__name__)

WEIGHT_NAMES = ("one", "sqrt1pr2", "exp-windowed")


def _japanese_bracket() -> type[sp.Function]:
    """⟨x⟩ = (1 + x²)^{1/2} 노드 (미분 규칙 x·⟨x⟩⁻¹)"""
    return registry.register_function(
        "jr",
        evaluator=lambda x: np.sqrt(1 + np.asarray(x) ** 2),
        derivative=lambda x: x / registry.get_function("jr")(x),
        positive=True,
    )


@lru_cache
def get_weight(name: str) -> WeightFunction:
    """이름으로 가중치 조회"""
    if name == "one":
        return WeightFunction(
            name="one",
            expr=sp.Integer(1),
            claimed_bounds=((1, 0.0), (2, 0.0), (3, 0.0), (4, 0.0)),
        )
    if name == "sqrt1pr2":
        jr = _japanese_bracket()
        return WeightFunction(
            name="sqrt1pr2",
            expr=jr(r),
            claimed_bounds=((1, 0.5), (2, 1.0), (3, 1.5), (4, 6.0)),
        )
    if name == "exp-windowed":
        return WeightFunction(
            name="exp-windowed",
            expr=sp.exp(r),
            claimed_bounds=((1, 1.0), (2, 0.0), (3, 0.0), (4, 0.0)),
            r_min=0.0,
        )
    raise ValidationException(f"unknown weight: {name}", details={"choices": WEIGHT_NAMES})


def japanese_bracket(x: sp.Expr) -> sp.Expr:
    return _japanese_bracket()(x)


def weight_values(weight: WeightFunction, r_values: np.ndarray) -> np.ndarray:
    """격자에서 f(r) 실수값"""
    return evaluate_grid(weight.expr, {"r": r_values}).real


def check_weight(weight: WeightFunction, r_min: float, r_max: float, samples: int = 257) -> dict[int, float]:
    """f ≥ 1 과 |∂_r^j log f| ≤ 주장된 상한을 창에서 샘플로 확인"""
    if weight.r_min is not None and r_min < weight.r_min:
        raise ValidationException(
            f"window leaves the domain of weight {weight.name}",
            details={"r_min": r_min, "domain_start": weight.r_min},
        )
    grid = np.linspace(r_min, r_max, samples)
    f = weight_values(weight, grid)
    if np.min(f) < 1.0 - 1e-12:
        raise ValidationException(
            f"weight {weight.name} drops below 1",
            details={"r": float(grid[int(np.argmin(f))])},
        )

    measured: dict[int, float] = {}
    log_f = sp.log(weight.expr)
    derivative = log_f
    for j, bound in weight.claimed_bounds:
        while len(measured) < j:
            derivative = diff(derivative, "r")
            measured[len(measured) + 1] = float(np.max(np.abs(evaluate_grid(derivative, {"r": grid}))))
        if measured[j] > bound + 1e-9:
            raise ValidationException(
                f"|d^{j} log f| exceeds claimed bound",
                details={"weight": weight.name, "measured": measured[j], "bound": bound},
            )
    logger.debug(f"weight {weight.name} checked on [{r_min}, {r_max}]: {measured}")
    return measured
