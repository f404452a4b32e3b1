"""시험 필드 생성 - 대역 제한, 창 내부 지지"""

import logging
import math

import numpy as np
from scipy.fft import fft, ifft

from src.quantize.schemas import Grid, HalfDensityField

logger = logging.getLogger(__name__)

MARGIN_FRACTION = 0.1
LEAKAGE_TOLERANCE = 1e-12


def band_limit_r(values: np.ndarray, keep_fraction: float = 2 / 3) -> np.ndarray:
    """r 방향 스펙트럼의 상위 1/3 제거"""
    n_r = values.shape[0]
    spectrum = fft(values, axis=0)
    k = np.abs(np.fft.fftfreq(n_r, d=1.0 / n_r))
    spectrum[k > keep_fraction * n_r / 2, :] = 0.0
    return ifft(spectrum, axis=0)


def margin_leakage(u: HalfDensityField, fraction: float = MARGIN_FRACTION) -> float:
    """창 양 끝 margin 안의 max |v|"""
    width = max(1, int(math.ceil(fraction * u.grid.n_r)))
    edges = np.concatenate([u.values[:width], u.values[-width:]])
    return float(np.max(np.abs(edges)))


def _check_margin(u: HalfDensityField) -> HalfDensityField:
    leak = margin_leakage(u)
    if leak > LEAKAGE_TOLERANCE:
        logger.warning(f"test field leaks into the window margin: max |v| = {leak:.3e}")
    return u


def gaussian_profile(grid: Grid, center: float, width: float) -> np.ndarray:
    return np.exp(-0.5 * ((grid.r_values() - center) / width) ** 2)


def random_field(grid: Grid, seed: int, width_cells: float = 4.0, max_mode: int | None = None) -> HalfDensityField:
    """r 가우시안 × 각도 삼각다항식 (|l| ≤ n_θ/8), 계수는 seed로 결정"""
    rng = np.random.default_rng(seed)
    mid = grid.r_origin + 0.5 * grid.r_length
    center = mid + rng.uniform(-0.05, 0.05) * grid.r_length
    radial = gaussian_profile(grid, center, width_cells * grid.dr)

    max_mode = grid.n_theta // 8 if max_mode is None else max_mode
    modes = np.arange(-max_mode, max_mode + 1)
    coeffs = rng.standard_normal(modes.size) + 1j * rng.standard_normal(modes.size)
    angular = np.exp(1j * np.outer(grid.theta_values(), modes)) @ coeffs

    values = band_limit_r(np.outer(radial, angular))
    return _check_margin(HalfDensityField(grid=grid, values=values))


def random_fields(grid: Grid, seed: int, count: int = 3) -> list[HalfDensityField]:
    return [random_field(grid, seed + i) for i in range(count)]


def semiclassical_field(
    grid: Grid,
    r_center: float,
    theta_center: float,
    eta0: float,
    width: float = 0.75,
) -> HalfDensityField:
    """e^{imθ}((1 + cos(θ − θ_c))/2)^4 × r 가우시안, m = round(η₀/ħ)"""
    m = int(round(eta0 / grid.hbar))
    th = grid.theta_values()
    angular = np.exp(1j * m * th) * ((1 + np.cos(th - theta_center)) / 2) ** 4
    radial = gaussian_profile(grid, r_center, width)
    return _check_margin(HalfDensityField(grid=grid, values=band_limit_r(np.outer(radial, angular))))


def double_bump_field(grid: Grid, separation: float, width_cells: float = 3.0) -> HalfDensityField:
    """r 방향으로 떨어진 두 가우시안 (θ 에서 e^{iθ})"""
    mid = grid.r_origin + 0.5 * grid.r_length
    width = width_cells * grid.dr
    radial = gaussian_profile(grid, mid - separation / 2, width) + gaussian_profile(grid, mid + separation / 2, width)
    angular = np.exp(1j * grid.theta_values())
    return _check_margin(HalfDensityField(grid=grid, values=band_limit_r(np.outer(radial, angular))))


def mode_field(grid: Grid, k: int, l: int) -> HalfDensityField:
    """격자 푸리에 모드 e^{2πikr/L} e^{ilθ}"""
    phase_r = np.exp(2j * math.pi * k * (grid.r_values() - grid.r_origin) / grid.r_length)
    return HalfDensityField(grid=grid, values=np.outer(phase_r, np.exp(1j * l * grid.theta_values())))
