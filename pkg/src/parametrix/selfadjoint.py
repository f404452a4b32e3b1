"""본질적 자기수반성 점검 - 대칭성, ‖R_±‖, 노이만 역산, 절단 교환자"""

import logging
from collections.abc import Callable

import numpy as np
from scipy.fft import fft2, ifft2

from src.diffops.schemas import DiffOp
from src.diffops.service import apply, apply_adjoint
from src.parametrix.residual import RESIDUAL_FLOOR, fit_slope, resolvent_residual
from src.parametrix.schemas import CommutatorReport, NeumannTrace, SelfAdjointReport
from src.quantize.fields import band_limit_r, gaussian_profile
from src.quantize.schemas import Grid, HalfDensityField
from src.quantize.service import QuantizedOperator, inner, l2_norm, op_norm_estimate
from src.symbols.schemas import SymbolSeries
from src.shared.parallel import parallel_map

logger = logging.getLogger(__name__)

NORM_THRESHOLD = 1.0


# ==================== 대칭성 ====================


def symmetry_defect(P: DiffOp, fields: list[HalfDensityField]) -> float:
    """max |⟨Pu, v⟩ − ⟨u, Pv⟩| / (‖u‖‖v‖)"""
    images = [apply(P, u) for u in fields]
    worst = 0.0
    for a, u in enumerate(fields):
        for b, v in enumerate(fields):
            gap = abs(inner(images[a], v) - inner(u, images[b]))
            worst = max(worst, gap / max(l2_norm(u) * l2_norm(v), RESIDUAL_FLOOR))
    return worst


# ==================== 잔여 연산자 R ====================


def band_projector(grid: Grid) -> Callable[[np.ndarray], np.ndarray]:
    """|k| ≤ n_r/3, |l| ≤ n_θ/3 스펙트럼 사영 Π"""
    k = np.abs(grid.k_index())[:, None]
    l = np.abs(grid.l_index())[None, :]
    mask = (k <= grid.n_r / 3) & (l <= grid.n_theta / 3)

    def project(values: np.ndarray) -> np.ndarray:
        return ifft2(mask * fft2(values))

    return project


class ResidualOperator:
    """R = Π[(z − P)Op¹(b) − 1]Π 와 그 수반"""

    def __init__(self, P: DiffOp, series: SymbolSeries, z: complex, grid: Grid):
        self.P = P
        self.z = complex(z)
        self.grid = grid
        self.op = QuantizedOperator(series, 1.0, grid, z).prepare()
        self.op_adjoint = self.op.adjoint().prepare()
        self.project = band_projector(grid)

    def apply(self, u: HalfDensityField) -> HalfDensityField:
        v = u.like(self.project(u.values))
        return v.like(self.project(resolvent_residual(self.P, self.op, self.z, v).values))

    def adjoint(self, u: HalfDensityField) -> HalfDensityField:
        v = u.like(self.project(u.values))
        w = v.scaled(np.conj(self.z)) - apply_adjoint(self.P, v)
        return v.like(self.project((self.op_adjoint.apply(w) - v).values))

    def norm(self, trials: int = 2, iters: int = 20, seed: int = 0) -> float:
        return op_norm_estimate(self.grid, self.apply, self.adjoint, trials, iters, seed)


def neumann_trace(
    P: DiffOp,
    series: SymbolSeries,
    z: complex,
    u: HalfDensityField,
    K: int = 20,
    R: ResidualOperator | None = None,
) -> NeumannTrace:
    """w_K = Op¹(b) Σ_{k≤K} (−R)^k u 의 ‖(z − P)w_K − u‖/‖u‖, K = 0..K"""
    R = R or ResidualOperator(P, series, z, u.grid)
    u = u.like(R.project(u.values))
    scale = max(l2_norm(u), RESIDUAL_FLOOR)
    term, total = u, u
    residuals: list[float] = []
    for k in range(K + 1):
        if k > 0:
            term = R.apply(term).scaled(-1.0)
            total = total + term
        w = R.op.apply(total)
        residuals.append(l2_norm(w.scaled(z) - apply(P, w) - u) / scale)
    logger.debug(f"neumann z={z} hbar={u.grid.hbar:g}: {residuals[0]:.3e} -> {residuals[-1]:.3e}")
    return NeumannTrace(z=complex(z), hbar=u.grid.hbar, residuals=residuals)


def selfadjoint_pipeline(
    P: DiffOp,
    series_plus: SymbolSeries,
    series_minus: SymbolSeries,
    base_grid: Grid,
    hbars: list[float],
    fields: Callable[[Grid], list[HalfDensityField]],
    K: int = 20,
    trials: int = 2,
    iters: int = 20,
    seed: int = 0,
) -> SelfAdjointReport:
    """z = ±i 의 파라메트릭스로 ‖R_±‖ 를 ħ 별로 추정하고 노이만 역산 확인"""
    sym_grid = base_grid.with_hbar(min(hbars))
    defect = symmetry_defect(P, fields(sym_grid))

    def norms(h: float) -> tuple[ResidualOperator, ResidualOperator, float, float]:
        grid = base_grid.with_hbar(h)
        R_plus = ResidualOperator(P, series_plus, 1j, grid)
        R_minus = ResidualOperator(P, series_minus, -1j, grid)
        plus, minus = R_plus.norm(trials, iters, seed), R_minus.norm(trials, iters, seed)
        logger.debug(f"hbar={h:g}: |R+| ~ {plus:.3e}, |R-| ~ {minus:.3e}")
        return R_plus, R_minus, plus, minus

    measured = parallel_map(norms, hbars)
    norms_plus = [m[2] for m in measured]
    norms_minus = [m[3] for m in measured]
    good = [h for h, m in zip(hbars, measured) if m[2] < NORM_THRESHOLD and m[3] < NORM_THRESHOLD]
    hbar0 = max(good) if good else None
    if hbar0 is None:
        logger.warning(f"no hbar in {hbars} gives |R| < 1 for {P.name}")

    target = min(good) if good else min(hbars)
    R_plus, R_minus, *_ = measured[list(hbars).index(target)]
    del measured
    u = fields(R_plus.grid)[0]
    traces = [
        neumann_trace(P, series_plus, 1j, u, K, R=R_plus),
        neumann_trace(P, series_minus, -1j, u, K, R=R_minus),
    ]
    return SelfAdjointReport(
        symmetry_defect=defect,
        hbars=list(hbars),
        norms_plus=norms_plus,
        norms_minus=norms_minus,
        hbar0=hbar0,
        neumann=traces,
    )


# ==================== 절단 교환자 ====================


def smooth_cutoff(s: np.ndarray) -> np.ndarray:
    """|s| ≤ 1 에서 1, |s| ≥ 2 에서 0 인 매끄러운 절단"""
    s = np.abs(np.asarray(s, dtype=float))

    def g(x: np.ndarray) -> np.ndarray:
        return np.where(x > 0, np.exp(-1.0 / np.maximum(x, 1e-300)), 0.0)

    left, right = g(2.0 - s), g(s - 1.0)
    return left / (left + right)


def transition_field(grid: Grid, delta: float, width: float = 1.0) -> HalfDensityField:
    """χ(δr) 의 전이 구간 r = 1.5/δ 에 놓인 가우시안 × e^{iθ}"""
    radial = gaussian_profile(grid, 1.5 / delta, width)
    values = band_limit_r(np.outer(radial, np.exp(1j * grid.theta_values())))
    return HalfDensityField(grid=grid, values=values)


def cutoff_commutator(
    P: DiffOp,
    series: SymbolSeries,
    z: complex,
    grid: Grid,
    deltas: list[float],
) -> CommutatorReport:
    """‖[P, χ(δr)]Op¹(b)v_δ‖ / ‖v_δ‖, v_δ 는 전이 구간에 놓인 필드"""
    op = QuantizedOperator(series, 1.0, grid, z)
    r_vals = grid.r_values()

    def measure(delta: float) -> float:
        chi = smooth_cutoff(delta * r_vals)[:, None]
        v = transition_field(grid, delta)
        w = op.apply(v)
        commutator = apply(P, w.like(chi * w.values)) - w.like(chi * apply(P, w).values)
        return l2_norm(commutator) / max(l2_norm(v), RESIDUAL_FLOOR)

    values = [measure(d) for d in deltas]
    slope, _ = fit_slope(deltas, values)
    logger.info(f"cutoff commutator at hbar={grid.hbar:g}: {values}, slope {slope}")
    return CommutatorReport(hbar=grid.hbar, deltas=list(deltas), values=values, slope=slope)
