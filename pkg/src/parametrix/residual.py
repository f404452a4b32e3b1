"""잔차 측정 - (z − P)Op¹(b)u − u 의 ħ 스케일링"""

import logging
from collections.abc import Callable

import numpy as np

from src.diffops.schemas import DiffOp
from src.diffops.service import apply
from src.parametrix.schemas import ResidualReport
from src.quantize.schemas import Grid, HalfDensityField
from src.quantize.service import QuantizedOperator, l2_norm
from src.symbols.schemas import SymbolSeries
from src.shared.exceptions import ValidationException
from src.shared.parallel import parallel_map

logger = logging.getLogger(__name__)

FieldFactory = Callable[[Grid], list[HalfDensityField]]

RESIDUAL_FLOOR = 1e-300


def resolvent_residual(
    P: DiffOp,
    op: QuantizedOperator,
    z: complex,
    u: HalfDensityField,
) -> HalfDensityField:
    """(z − P)Op(b)u − u"""
    w = op.apply(u)
    return w.scaled(z) - apply(P, w) - u


def residual_norm(P: DiffOp, series: SymbolSeries, z: complex, u: HalfDensityField, t: float = 1.0) -> float:
    op = QuantizedOperator(series, t, u.grid, z)
    return l2_norm(resolvent_residual(P, op, z, u)) / max(l2_norm(u), RESIDUAL_FLOOR)


def fit_slope(xs: list[float], ys: list[float]) -> tuple[float | None, float | None]:
    """log y 대 log x 최소제곱 기울기와 잔차 제곱합"""
    if len(xs) < 2:
        return None, None
    x = np.log(np.asarray(xs, dtype=float))
    y = np.log(np.maximum(np.asarray(ys, dtype=float), RESIDUAL_FLOOR))
    coeffs, residuals, *_ = np.polyfit(x, y, 1, full=True)
    fit_residual = float(residuals[0]) if len(residuals) else 0.0
    return float(coeffs[0]), fit_residual


def residual_report(
    P: DiffOp,
    series: SymbolSeries,
    z: complex,
    base_grid: Grid,
    hbars: list[float],
    fields: FieldFactory,
    t: float = 1.0,
) -> ResidualReport:
    """각 ħ 에서 r(ħ) = ‖(z−P)Op^t(Σħ^l b_l)u − u‖/‖u‖, 필드별 최댓값으로 기울기 적합"""
    if series.z is not None and complex(series.z) != complex(z):
        raise ValidationException(
            "series was built for a different z",
            details={"series_z": series.z, "z": z},
        )

    def sweep(h: float) -> list[float]:
        grid = base_grid.with_hbar(h)
        op = QuantizedOperator(series, t, grid, z)
        values = []
        for u in fields(grid):
            r_u = l2_norm(resolvent_residual(P, op, z, u)) / max(l2_norm(u), RESIDUAL_FLOOR)
            values.append(r_u)
        logger.debug(f"{P.name} N={series.N} hbar={h:g}: residuals {values}")
        return values

    residuals = parallel_map(sweep, hbars)
    slope, fit_residual = fit_slope(hbars, [max(row) for row in residuals])
    logger.info(f"{P.name} N={series.N}: fitted slope {slope}")
    return ResidualReport(
        N=series.N,
        z=complex(z),
        hbars=list(hbars),
        residuals=residuals,
        slope=slope,
        fit_residual=fit_residual,
    )
