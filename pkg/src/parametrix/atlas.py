"""두 각도 차트 아틀라스 조립

Op_M(a)u = Σ_ι χ_ι φ_ι^* Op¹(φ̃_ι*(κ_ι a)) φ_ι* (χ_ι u)

차트 1 은 항등, 차트 2 는 등록된 원의 변환 φ. κ₁ 은 0 과 π 를 중심으로 한
반폭 3π/4 호 위의 범프로 만든 분할, κ₂ = 1 − κ₁. χ_ι 는 supp κ_ι 에서 1.
"""

import logging
import math
from collections.abc import Callable

import numpy as np
import sympy as sp

from src.expr import registry
from src.expr.variables import theta
from src.parametrix.schemas import AtlasReport
from src.quantize.charts import conjugated_apply
from src.quantize.schemas import Grid, HalfDensityField, PartitionOfUnity
from src.quantize.service import apply_op, l2_norm
from src.symbols.schemas import AngularDiffeo, Symbol
from src.symbols.service import chart_transfer_leading
from src.shared.parallel import parallel_map

logger = logging.getLogger(__name__)

ARC_HALF_WIDTH = 3 * math.pi / 4
CUTOFF_OUTER = 7 * math.pi / 8


def _distance_to(values: np.ndarray, center: float) -> np.ndarray:
    """원 위의 거리 |θ − c| (mod 2π)"""
    shifted = np.mod(np.asarray(values, dtype=float) - center + math.pi, 2 * math.pi) - math.pi
    return np.abs(shifted)


def identity_arc_weight(values: np.ndarray) -> np.ndarray:
    """κ₁(θ) = β₀/(β₀ + β_π)"""
    near = PartitionOfUnity.bump(_distance_to(values, 0.0) / ARC_HALF_WIDTH)
    far = PartitionOfUnity.bump(_distance_to(values, math.pi) / ARC_HALF_WIDTH)
    return near / (near + far)


def _kappa_node() -> type[sp.Function]:
    # 양자화에만 쓰이므로 미분 규칙은 없다
    return registry.register_function("kappa_id", evaluator=identity_arc_weight)


def chart_weights() -> tuple[sp.Expr, sp.Expr]:
    """(κ₁, κ₂) 식"""
    kappa = _kappa_node()(theta)
    return kappa, 1 - kappa


def _step(s: np.ndarray) -> np.ndarray:
    """s ≤ 0 에서 1, s ≥ 1 에서 0"""

    def g(x: np.ndarray) -> np.ndarray:
        return np.where(x > 0, np.exp(-1.0 / np.maximum(x, 1e-300)), 0.0)

    left, right = g(1.0 - s), g(s)
    return left / (left + right)


def chart_cutoff(values: np.ndarray, center: float) -> np.ndarray:
    """|θ − c| ≤ 3π/4 에서 1, ≥ 7π/8 에서 0"""
    d = _distance_to(values, center)
    return _step((d - ARC_HALF_WIDTH) / (CUTOFF_OUTER - ARC_HALF_WIDTH))


def atlas_apply(a: Symbol, phi: AngularDiffeo, u: HalfDensityField) -> HalfDensityField:
    """Op_M(a)u"""
    th = u.grid.theta_values()
    chi_1 = chart_cutoff(th, 0.0)[None, :]
    chi_2 = chart_cutoff(th, math.pi)[None, :]
    kappa_1, kappa_2 = chart_weights()

    first = apply_op(a.model_copy(update={"expr": kappa_1 * a.expr}), 1.0, u.like(chi_1 * u.values))
    local = chart_transfer_leading(a.model_copy(update={"expr": kappa_2 * a.expr}), phi)
    second = conjugated_apply(local, phi.inverted(), u.like(chi_2 * u.values))
    return u.like(chi_1 * first.values + chi_2 * second.values)


def atlas_discrepancy(a: Symbol, phi: AngularDiffeo, u: HalfDensityField) -> float:
    """‖Op_M(a)u − Op¹(a)u‖ / ‖u‖"""
    gap = atlas_apply(a, phi, u) - apply_op(a, 1.0, u)
    return l2_norm(gap) / max(l2_norm(u), 1e-300)


def atlas_report(
    a: Symbol,
    phi: AngularDiffeo,
    base_grid: Grid,
    hbars: list[float],
    fields: Callable[[Grid], list[HalfDensityField]],
) -> AtlasReport:
    def sweep(h: float) -> list[float]:
        grid = base_grid.with_hbar(h)
        values = [atlas_discrepancy(a, phi, u) for u in fields(grid)]
        logger.debug(f"atlas {phi.name} hbar={h:g}: {values}")
        return values

    return AtlasReport(chart=phi.name, hbars=list(hbars), discrepancies=parallel_map(sweep, hbars))
