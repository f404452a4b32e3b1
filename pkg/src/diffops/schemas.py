"""DiffOp Pydantic 스키마"""

import sympy as sp
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.expr.variables import eta, hbar, rho
from src.symbols.schemas import WeightFunction

MultiIndex = tuple[int, int]


class DiffOp(BaseModel):
    """정규화 틀 (ħD_r, f(r)⁻¹ħD_θ) 에서의 미분연산자

    P = Σ_α p_α(ħ; r, θ) (f⁻¹ħD_θ)^{α′} (ħD_r)^{α₀},  p_α = Σ_j ħ^j coeffs[α][j]
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str = "P"
    order: int = Field(ge=0)
    coeffs: dict[MultiIndex, tuple[sp.Expr, ...]]
    weight: WeightFunction

    @field_validator("coeffs")
    @classmethod
    def _check_indices(cls, v: dict[MultiIndex, tuple[sp.Expr, ...]]) -> dict[MultiIndex, tuple[sp.Expr, ...]]:
        for alpha, layers in v.items():
            if len(alpha) != 2 or min(alpha) < 0:
                raise ValueError(f"bad multi-index {alpha}")
            if not layers:
                raise ValueError(f"empty coefficient for {alpha}")
            for e in layers:
                if e.has(rho, eta):
                    raise ValueError("coefficients must not depend on momenta")
        return v

    @model_validator(mode="after")
    def _check_order(self) -> "DiffOp":
        too_high = [alpha for alpha in self.coeffs if sum(alpha) > self.order]
        if too_high:
            raise ValueError(f"multi-indices exceed order {self.order}: {too_high}")
        return self

    @property
    def hbar_degree(self) -> int:
        """계수의 최대 ħ 차수"""
        return max((len(layers) - 1 for layers in self.coeffs.values()), default=0)

    def layer(self, j: int) -> dict[MultiIndex, sp.Expr]:
        """ħ^j 계수 p_{α,j} (0이 아닌 것만)"""
        return {
            alpha: layers[j]
            for alpha, layers in self.coeffs.items()
            if j < len(layers) and layers[j] != 0
        }

    def coefficient(self, alpha: MultiIndex) -> sp.Expr:
        """p_α(ħ) = Σ_j ħ^j p_{α,j}"""
        layers = self.coeffs.get(alpha, (sp.Integer(0),))
        return sp.Add(*[hbar**j * p for j, p in enumerate(layers)])

    def triples(self) -> list[tuple[MultiIndex, int, sp.Expr]]:
        """(α, ħ 차수, 식) 목록, 정렬 순서 고정"""
        return [
            (alpha, j, p)
            for alpha in sorted(self.coeffs)
            for j, p in enumerate(self.coeffs[alpha])
            if p != 0
        ]


class EllipticityReport(BaseModel):
    """C⁻¹⟨ρ⊕f⁻¹η⟩^m ≤ |z − σ| ≤ C⟨ρ⊕f⁻¹η⟩^m 의 샘플 상수"""

    z: complex
    c_lower: float
    c_upper: float
    elliptic: bool
    worst_sample: dict[str, float] = {}


class CoefficientReport(BaseModel):
    """B_f 검사 결과: 계수별 (f⁻¹∂_θ)^{α′}∂_r^{α₀} 샘플 최댓값"""

    name: str
    sup: dict[str, float]
    bound: float
    passed: bool


class MetricReport(BaseModel):
    """정규화 틀에서 계량 고유값 비의 균등 동치 검사"""

    min_ratio: float
    max_ratio: float
    tolerance: float
    positive: bool
    passed: bool
