"""Experiment Pydantic 스키마 - 평면 key=value 설정, 실행 결과"""

from fractions import Fraction
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.config import get_settings
from src.shared.exceptions import ValidationException

ExperimentName = Literal[
    "residual-scaling",
    "l2-bound",
    "block-decay",
    "scaling-identity",
    "chart-transfer",
    "selfadjoint",
    "expr-selftest",
]


def _parse_float(text: str) -> float:
    # "1/8" 같은 분수 허용
    return float(Fraction(text.strip())) if "/" in text else float(text)


def _parse_float_list(value: Any) -> Any:
    if isinstance(value, str):
        return [_parse_float(part) for part in value.split(",") if part.strip()]
    return value


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, complex):
        return f"{value.real!r}{value.imag:+}j"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_format_value(v) for v in value)
    return str(value)


# ==================== 설정 ====================


class ExperimentConfig(BaseModel):
    """실험 한 번의 평면 설정 (모르는 키는 거부)"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    experiment: ExperimentName
    weight: Literal["one", "sqrt1pr2", "exp-windowed"] = "sqrt1pr2"
    operator: Literal["constant", "radial", "laplacian"] = "laplacian"
    metric: Literal["flat", "cosine"] = "flat"

    # 주기 격자
    n_r: int = 128
    n_theta: int = 32
    r_length: float = Field(default=16.0, gt=0.0)
    r_origin: float = -8.0
    hbars: list[float] = Field(default_factory=lambda: [0.125, 0.0625, 0.03125, 0.015625])

    # 파라메트릭스
    z: complex = -1 + 0j
    N: int = Field(default=2, ge=0)
    t: float = Field(default=1.0, ge=0.0, le=1.0)

    # 시험 필드와 노름 추정
    seed: int = 0
    fields: int = Field(default=3, ge=1)
    trials: int = Field(default=2, ge=1)
    iters: int = Field(default=20, ge=1)
    neumann_terms: int = Field(default=20, ge=0)

    # 절단 교환자 격자
    deltas: list[float] = Field(default_factory=lambda: [0.4, 0.2, 0.1])
    commutator_n_r: int = 512
    commutator_n_theta: int = 16
    commutator_r_length: float = Field(default=68.0, gt=0.0)

    # 블록 표
    blocks: int = Field(default=6, ge=2)

    output_dir: str = Field(default_factory=lambda: get_settings().output_dir)
    plot: bool = True

    @field_validator("hbars", "deltas", mode="before")
    @classmethod
    def _split_list(cls, v: Any) -> Any:
        return _parse_float_list(v)

    @field_validator("hbars")
    @classmethod
    def _check_hbars(cls, v: list[float]) -> list[float]:
        if not v or any(not 0.0 < h <= 1.0 for h in v):
            raise ValueError("hbars must be a non-empty list in (0, 1]")
        return v

    @field_validator("deltas")
    @classmethod
    def _check_deltas(cls, v: list[float]) -> list[float]:
        if not v or any(d <= 0.0 for d in v):
            raise ValueError("deltas must be positive")
        return v

    @field_validator("z", mode="before")
    @classmethod
    def _parse_complex(cls, v: Any) -> Any:
        if isinstance(v, str):
            return complex(v.replace(" ", "").replace("i", "j"))
        return v

    @field_validator("t", "r_length", "r_origin", "commutator_r_length", mode="before")
    @classmethod
    def _parse_fraction(cls, v: Any) -> Any:
        return _parse_float(v) if isinstance(v, str) else v

    # ---------- 텍스트 형식 ----------

    def to_text(self) -> str:
        """필드 순서의 key = value 줄"""
        data = self.model_dump()
        return "".join(f"{key} = {_format_value(data[key])}\n" for key in type(self).model_fields)

    @classmethod
    def from_mapping(cls, values: dict[str, Any]) -> "ExperimentConfig":
        unknown = sorted(set(values) - set(cls.model_fields))
        if unknown:
            raise ValidationException("unknown config keys", details={"keys": unknown})
        try:
            return cls(**values)
        except ValidationError as exc:
            first = exc.errors()[0]
            raise ValidationException(
                f"invalid config: {first['msg']}",
                details={"field": ".".join(str(p) for p in first["loc"])},
            ) from None

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        return cls.from_mapping(parse_config_text(text))


def parse_config_text(text: str) -> dict[str, str]:
    """'#' 주석과 빈 줄을 건너뛰는 key = value 파서"""
    values: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationException("config line without '='", details={"line": number})
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key in values:
            raise ValidationException("duplicate config key", details={"key": key, "line": number})
        values[key] = value
    return values


# ==================== 결과 ====================


class PlotSeries(BaseModel):
    label: str
    xs: list[float]
    ys: list[float]


class ExperimentResult(BaseModel):
    """측정 행, 요약 지표, 판정"""

    experiment: str
    columns: list[str]
    rows: list[list[Any]]
    metrics: dict[str, Any] = Field(default_factory=dict)
    checks: dict[str, bool] = Field(default_factory=dict)
    thresholds: dict[str, float] = Field(default_factory=dict)
    plot: list[PlotSeries] = Field(default_factory=list)
    x_label: str = "hbar"
    y_label: str = "value"

    @property
    def passed(self) -> bool:
        return all(self.checks.values())
