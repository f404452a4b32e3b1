"""Symbol Pydantic 스키마"""

import math

import numpy as np
import sympy as sp
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.expr.variables import hbar


class WeightFunction(BaseModel):
    """가중치 f: ℝ → [1, ∞) 와 ∂_r^j log f 의 주장된 상한"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str
    expr: sp.Expr
    claimed_bounds: tuple[tuple[int, float], ...] = ()
    r_min: float | None = None  # f ≥ 1 이 보장되는 영역의 하한

    def __hash__(self) -> int:
        return hash((self.name, self.expr))


class SampleWindow(BaseModel):
    """세미노름/타원성 추정용 결정적 샘플 격자"""

    model_config = ConfigDict(frozen=True)

    r_min: float = -4.0
    r_max: float = 4.0
    theta_min: float = 0.0
    theta_max: float = 2 * math.pi
    q_samples: int = Field(default=9, ge=1)
    p_samples: int = Field(default=33, ge=1)
    momentum_bound: float = Field(default=8.0, gt=0.0)

    @model_validator(mode="after")
    def _check_order(self) -> "SampleWindow":
        if self.r_max < self.r_min or self.theta_max < self.theta_min:
            raise ValueError("window bounds out of order")
        return self

    def r_samples(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.q_samples)

    def theta_samples(self) -> np.ndarray:
        return np.linspace(self.theta_min, self.theta_max, self.q_samples, endpoint=False)

    def momentum_samples(self) -> np.ndarray:
        return np.linspace(-self.momentum_bound, self.momentum_bound, self.p_samples)


class Symbol(BaseModel):
    """차수 m, 가중치 f가 붙은 심볼 a(r, θ, ρ, η; ħ, z)"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    expr: sp.Expr
    order: float
    weight: WeightFunction
    z: complex | None = None


class Bisymbol(BaseModel):
    """(r′, θ′)에도 의존하는 진폭 a(q, p, q′)"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    expr: sp.Expr
    order: float
    t: float = Field(ge=0.0, le=1.0)
    weight: WeightFunction


class SymbolSeries(BaseModel):
    """절단된 ħ 전개 b₀ + ħb₁ + … + ħᴺb_N"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    terms: tuple[sp.Expr, ...]
    orders: tuple[float, ...]
    weight: WeightFunction
    z: complex | None = None
    t: float = 1.0

    @model_validator(mode="after")
    def _check_lengths(self) -> "SymbolSeries":
        if len(self.terms) != len(self.orders):
            raise ValueError("terms and orders differ in length")
        return self

    @property
    def N(self) -> int:
        return len(self.terms) - 1

    def total(self) -> sp.Expr:
        """Σ ħ^l b_l"""
        return sp.Add(*[hbar**j * b for j, b in enumerate(self.terms)])

    def truncated(self, n: int) -> "SymbolSeries":
        return self.model_copy(
            update={"terms": self.terms[: n + 1], "orders": self.orders[: n + 1]}
        )


class ResolventBound(BaseModel):
    """격자에서 샘플한 Δ_N(z)"""

    z: complex
    N: int
    delta_N: float = Field(ge=0.0)


class AngularDiffeo(BaseModel):
    """각도 좌표 변환 θ ↦ φ′(θ) 와 그 역"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str
    forward: sp.Expr
    inverse: sp.Expr

    def inverted(self) -> "AngularDiffeo":
        return AngularDiffeo(name=f"{self.name}^-1", forward=self.inverse, inverse=self.forward)
