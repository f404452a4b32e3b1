"""Expr Pydantic 스키마"""

from pydantic import BaseModel, ConfigDict, Field


class Point(BaseModel):
    """위상공간 한 점 (r, θ, ρ, η; ħ, z)과 바이심볼용 (r′, θ′)"""

    model_config = ConfigDict(frozen=True)

    r: float = 0.0
    theta: float = 0.0
    rho: float = 0.0
    eta: float = 0.0
    hbar: float = Field(default=1.0, gt=0.0, le=1.0)
    z: complex = 0j
    r_p: float = 0.0
    theta_p: float = 0.0

    def env(self) -> dict[str, complex]:
        return {name: complex(value) for name, value in self.model_dump().items()}

    def shifted(self, name: str, delta: float) -> "Point":
        """한 좌표만 delta만큼 이동한 점"""
        return self.model_copy(update={name: getattr(self, name) + delta})


class FdCheckReport(BaseModel):
    """중심 차분 검증 결과"""

    symbolic: complex
    numeric: complex
    rel_err: float

    @property
    def passed(self) -> bool:
        return self.rel_err <= 1e-6
