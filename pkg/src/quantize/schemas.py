"""Quantize Pydantic 스키마 - 격자, 반밀도 필드, 단위분할, 스케일링 사상"""

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.fft import fftfreq

from src.shared.exceptions import GridException


def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


class Grid(BaseModel):
    """주기적 (r, θ) 격자와 쌍대 격자

    ρ ∈ (2πħ/L_r)·{−n_r/2..n_r/2−1}, η ∈ ħ·{−n_θ/2..n_θ/2−1}
    """

    model_config = ConfigDict(frozen=True)

    r_origin: float
    r_length: float = Field(gt=0.0)
    n_r: int
    n_theta: int
    hbar: float = Field(gt=0.0, le=1.0)
    eta_needed: float = Field(default=0.0, ge=0.0)

    @model_validator(mode="after")
    def _check_lattice(self) -> "Grid":
        for name, n in (("n_r", self.n_r), ("n_theta", self.n_theta)):
            if n < 8 or not _is_power_of_two(n):
                raise GridException(f"{name} must be a power of two >= 8", details={name: n})
        if self.eta_needed > self.eta_max:
            raise GridException(
                "angular lattice too coarse for the requested momenta",
                details={"eta_needed": self.eta_needed, "eta_max": self.eta_max},
            )
        return self

    @property
    def r_end(self) -> float:
        return self.r_origin + self.r_length

    @property
    def dr(self) -> float:
        return self.r_length / self.n_r

    @property
    def dtheta(self) -> float:
        return 2 * math.pi / self.n_theta

    @property
    def cell(self) -> float:
        """구적 가중치 dq = (L_r/n_r)(2π/n_θ)"""
        return self.dr * self.dtheta

    @property
    def size(self) -> int:
        return self.n_r * self.n_theta

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_r, self.n_theta)

    @property
    def eta_max(self) -> float:
        return self.hbar * self.n_theta / 2

    def r_values(self) -> np.ndarray:
        return self.r_origin + self.dr * np.arange(self.n_r)

    def theta_values(self) -> np.ndarray:
        return self.dtheta * np.arange(self.n_theta)

    def k_index(self) -> np.ndarray:
        """FFT 순서의 정수 파수"""
        return np.rint(fftfreq(self.n_r, d=1.0 / self.n_r)).astype(int)

    def l_index(self) -> np.ndarray:
        return np.rint(fftfreq(self.n_theta, d=1.0 / self.n_theta)).astype(int)

    def rho_values(self) -> np.ndarray:
        return 2 * math.pi * self.hbar * self.k_index() / self.r_length

    def eta_values(self) -> np.ndarray:
        return self.hbar * self.l_index()

    def with_hbar(self, hbar: float) -> "Grid":
        return self.model_copy(update={"hbar": hbar})

    def matches(self, other: "Grid") -> bool:
        keys = ("r_origin", "r_length", "n_r", "n_theta", "hbar")
        return all(getattr(self, k) == getattr(other, k) for k in keys)


class HalfDensityField(BaseModel):
    """v|dq|^{1/2} 의 계수 v (n_r × n_θ 복소 배열)"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: Grid
    values: np.ndarray

    @model_validator(mode="after")
    def _check_shape(self) -> "HalfDensityField":
        if self.values.shape != self.grid.shape:
            raise GridException(
                "field shape does not match grid",
                details={"shape": self.values.shape, "grid": self.grid.shape},
            )
        return self

    def like(self, values: np.ndarray) -> "HalfDensityField":
        return HalfDensityField(grid=self.grid, values=np.asarray(values, dtype=complex))

    def __add__(self, other: "HalfDensityField") -> "HalfDensityField":
        _require_same_grid(self.grid, other.grid)
        return self.like(self.values + other.values)

    def __sub__(self, other: "HalfDensityField") -> "HalfDensityField":
        _require_same_grid(self.grid, other.grid)
        return self.like(self.values - other.values)

    def scaled(self, c: complex) -> "HalfDensityField":
        return self.like(c * self.values)


def _require_same_grid(a: Grid, b: Grid) -> None:
    if not a.matches(b):
        raise GridException("fields live on different grids")


class PartitionOfUnity(BaseModel):
    """ψ_j = ψ(· − j), ψ = β / Σ_k β(· − k), β(x) = exp(−1/(1−x²)) on (−1, 1)"""

    model_config = ConfigDict(frozen=True)

    centers: tuple[int, ...]

    @staticmethod
    def bump(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        inside = np.abs(x) < 1.0
        out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
        return out

    @classmethod
    def lattice_sum(cls, x: np.ndarray) -> np.ndarray:
        base = np.floor(np.asarray(x, dtype=float))
        return sum(cls.bump(x - (base + s)) for s in (-1, 0, 1, 2))

    def member(self, j: int, r_values: np.ndarray) -> np.ndarray:
        shifted = np.asarray(r_values, dtype=float) - j
        return self.bump(shifted) / self.lattice_sum(shifted)

    def total(self, r_values: np.ndarray) -> np.ndarray:
        return sum(self.member(j, r_values) for j in self.centers)

    @classmethod
    def covering(cls, r_min: float, r_max: float) -> "PartitionOfUnity":
        """[r_min, r_max] 를 덮는 모든 ψ_j"""
        return cls(centers=tuple(range(math.floor(r_min), math.ceil(r_max) + 1)))


class ScalingMap(BaseModel):
    """Θ^t_{jk}(r, θ) = (r, F θ), F = f(tj + (1−t)k)"""

    model_config = ConfigDict(frozen=True)

    j: int
    k: int
    t: float = Field(ge=0.0, le=1.0)
    factor: float

    @field_validator("factor")
    @classmethod
    def _factor_at_least_one(cls, v: float) -> float:
        if v < 1.0 - 1e-12:
            raise ValueError("scaling factor must be >= 1")
        return v

    @property
    def center(self) -> float:
        return self.t * self.j + (1 - self.t) * self.k


class QuadratureWindow(BaseModel):
    """비주기 직접 구적용 중점 격자"""

    model_config = ConfigDict(frozen=True)

    r_min: float
    r_max: float
    theta_min: float
    theta_max: float
    n_r: int = Field(ge=2)
    n_theta: int = Field(ge=2)

    @property
    def dr(self) -> float:
        return (self.r_max - self.r_min) / self.n_r

    @property
    def dtheta(self) -> float:
        return (self.theta_max - self.theta_min) / self.n_theta

    def r_nodes(self) -> np.ndarray:
        return self.r_min + self.dr * (np.arange(self.n_r) + 0.5)

    def theta_nodes(self) -> np.ndarray:
        return self.theta_min + self.dtheta * (np.arange(self.n_theta) + 0.5)


class BlockNormTable(BaseModel):
    """‖ψ_j Op^t(a) ψ_k‖ 추정 표"""

    t: float
    hbar: float
    j_values: list[int]
    k_values: list[int]
    norms: list[list[float]]
    decay_exponent: float | None = None

    def by_distance(self) -> dict[int, float]:
        """|j − k| 별 최댓값"""
        out: dict[int, float] = {}
        for a, j in enumerate(self.j_values):
            for b, k in enumerate(self.k_values):
                d = abs(j - k)
                out[d] = max(out.get(d, 0.0), self.norms[a][b])
        return dict(sorted(out.items()))


class WindowField(BaseModel):
    """비주기 창의 중점 노드 위 필드 값 (n_r × n_θ)"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    window: QuadratureWindow
    values: np.ndarray

    @model_validator(mode="after")
    def _check_shape(self) -> "WindowField":
        if self.values.shape != (self.window.n_r, self.window.n_theta):
            raise GridException("window field shape mismatch", details={"shape": self.values.shape})
        return self

    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.values) ** 2)) * self.window.dr * self.window.dtheta)
