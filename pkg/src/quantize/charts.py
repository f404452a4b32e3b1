"""각도 좌표 변환 아래의 반밀도 필드 연산

(φ^* u)(r, θ) = u(r, φ(θ)) φ′(θ)^{1/2},  φ_* = (φ⁻¹)^*
격자 밖 θ 값은 삼각 보간 (대역 제한 필드에서 정확) 으로 얻는다.
"""

import logging
import math
from typing import Any

import numpy as np
from scipy.fft import fft, fft2

from src.config import get_settings
from src.expr.service import evaluate_grid
from src.quantize.schemas import HalfDensityField
from src.quantize.service import apply_op, l2_norm, symbol_expr
from src.symbols import diffeos
from src.symbols.schemas import AngularDiffeo, Symbol
from src.symbols.service import chart_transfer_leading
from src.shared.parallel import parallel_map

logger = logging.getLogger(__name__)


def interpolate_theta(values: np.ndarray, theta_points: np.ndarray) -> np.ndarray:
    """각 r 행의 삼각 보간값 (n_r × len(theta_points)), Nyquist 모드는 cos 로 분할"""
    n_theta = values.shape[1]
    coeffs = fft(values, axis=1) / n_theta
    l_idx = np.rint(np.fft.fftfreq(n_theta, d=1.0 / n_theta)).astype(int)
    basis = np.exp(1j * np.outer(l_idx, theta_points))
    nyquist = l_idx == -n_theta // 2
    basis[nyquist] = np.cos(n_theta / 2 * np.asarray(theta_points))[None, :]
    return coeffs @ basis


def pull_back(u: HalfDensityField, phi: AngularDiffeo) -> HalfDensityField:
    """φ^* u"""
    th = u.grid.theta_values()
    mapped = diffeos.map_values(phi, th)
    jac = evaluate_grid(diffeos.derivative(phi), {"theta": th}).real
    return u.like(interpolate_theta(u.values, mapped) * np.sqrt(jac)[None, :])


def push_forward(u: HalfDensityField, phi: AngularDiffeo) -> HalfDensityField:
    """φ_* u = (φ⁻¹)^* u"""
    return pull_back(u, phi.inverted())


def op1_at(a: Any, v: HalfDensityField, theta_points: np.ndarray, z: complex | None = None) -> np.ndarray:
    """(Op¹(a) v)(r_i, θ*_n) 를 임의 θ* 에서 직접 평가"""
    g = v.grid
    expr = symbol_expr(a)
    theta_points = np.asarray(theta_points, dtype=float)
    v_hat = fft2(v.values) / g.size
    kk, ll = np.nonzero(np.abs(v_hat) > 1e-14 * max(float(np.max(np.abs(v_hat))), 1e-300))
    r_vals, rho_vals, eta_vals = g.r_values(), g.rho_values(), g.eta_values()
    e_r = np.exp(2j * math.pi * np.outer(np.arange(g.n_r), g.k_index()[kk]) / g.n_r)
    e_th = np.exp(1j * np.outer(theta_points, g.l_index()[ll]))
    extra: dict[str, Any] = {"hbar": g.hbar}
    if z is not None:
        extra["z"] = complex(z)
    chunk = max(1, get_settings().chunk_points // max(len(theta_points), 1))

    def rows(start: int) -> np.ndarray:
        idx = np.arange(start, min(start + chunk, g.n_r))
        A = evaluate_grid(
            expr,
            {
                "r": r_vals[idx][:, None, None],
                "theta": theta_points[None, :, None],
                "rho": rho_vals[kk][None, None, :],
                "eta": eta_vals[ll][None, None, :],
                **extra,
            },
        )
        phase = e_r[idx][:, None, :] * e_th[None, :, :]
        return np.sum(A * phase * v_hat[kk, ll][None, None, :], axis=2)

    return np.concatenate(parallel_map(rows, range(0, g.n_r, chunk)), axis=0)


def conjugated_apply(a: Symbol, phi: AngularDiffeo, u: HalfDensityField) -> HalfDensityField:
    """φ_* Op¹(a) φ^* u (출력은 φ⁻¹(θ_m) 에서 직접 평가)"""
    g = u.grid
    v = pull_back(u, phi)
    th = g.theta_values()
    back = diffeos.map_values(phi, th, inverse=True)
    jac_inv = evaluate_grid(diffeos.derivative(phi.inverted()), {"theta": th}).real
    w = op1_at(a, v, back, a.z)
    return u.like(w * np.sqrt(jac_inv)[None, :])


def chart_transfer_defect(a: Symbol, phi: AngularDiffeo, u: HalfDensityField) -> float:
    """‖φ_* Op¹(a) φ^* u − Op¹(a_{φ,0}) u‖ / ‖u‖"""
    lhs = conjugated_apply(a, phi, u)
    leading = chart_transfer_leading(a, phi)
    rhs = apply_op(leading, 1.0, u)
    defect = l2_norm(lhs - rhs) / max(l2_norm(u), 1e-300)
    logger.debug(f"chart transfer defect {phi.name} at hbar={u.grid.hbar}: {defect:.4e}")
    return defect
