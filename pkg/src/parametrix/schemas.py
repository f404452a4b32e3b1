"""Parametrix Pydantic 스키마"""

import sympy as sp
from pydantic import BaseModel, ConfigDict, Field

from src.diffops.schemas import EllipticityReport
from src.symbols.schemas import SymbolSeries


class ParametrixResult(BaseModel):
    """b₀..b_N 과 ħ^{N+1} 잔여 심볼 e_{N+1}"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    series: SymbolSeries
    remainder: sp.Expr
    ellipticity: EllipticityReport
    requested_n: int
    nodes: list[int]

    @property
    def achieved_n(self) -> int:
        return self.series.N


class ResidualReport(BaseModel):
    """‖(z−P)Op¹(Σħ^l b_l)u − u‖/‖u‖ 의 ħ 스윕"""

    N: int
    z: complex
    hbars: list[float]
    residuals: list[list[float]]  # [ħ 인덱스][필드 인덱스]
    slope: float | None = None
    fit_residual: float | None = None

    @property
    def worst(self) -> list[float]:
        return [max(row) for row in self.residuals]


class NeumannTrace(BaseModel):
    """K 별 ‖(z−P)w_K − u‖/‖u‖"""

    z: complex
    hbar: float
    residuals: list[float]

    @property
    def final(self) -> float:
        return self.residuals[-1]


class SelfAdjointReport(BaseModel):
    """대칭성, ‖R_±‖ 추정, ħ₀, 노이만 역산"""

    symmetry_defect: float
    hbars: list[float]
    norms_plus: list[float]
    norms_minus: list[float]
    hbar0: float | None = None
    neumann: list[NeumannTrace] = Field(default_factory=list)


class CommutatorReport(BaseModel):
    """‖[P, χ(δr)]Op¹(b)v‖ 대 δ"""

    hbar: float
    deltas: list[float]
    values: list[float]
    slope: float | None = None


class AtlasReport(BaseModel):
    """‖Op_M(a)u − Op(a)u‖/‖u‖ 의 ħ 별 값"""

    chart: str
    hbars: list[float]
    discrepancies: list[list[float]]

    @property
    def worst(self) -> list[float]:
        return [max(row) for row in self.discrepancies]
