"""스케일링 켤레 항등식 - 비주기 창에서 직접 진동적분 구적

Θ(r, θ) = (r, Fθ) 에 대해
    Θ_* ψ_j Op^t(a) ψ_k Θ^* = ψ_j Op^t(Θ̃_* a) ψ_k,   (Θ̃_* a)(r, θ, ρ, η) = a(r, θ/F, ρ, Fη)
반밀도 당김 (Θ^* u)(r, θ) = F^{1/2} u(r, Fθ).
"""

import logging
import math

import numpy as np
import sympy as sp

from src.expr.service import evaluate_grid
from src.expr.variables import eta, theta
from src.quantize.schemas import PartitionOfUnity, QuadratureWindow, ScalingMap, WindowField
from src.symbols.schemas import Symbol, WeightFunction
from src.symbols.weights import weight_values
from src.shared.exceptions import QuadratureResolutionException, ValidationException
from src.shared.parallel import parallel_map

logger = logging.getLogger(__name__)


def scaling_map(weight: WeightFunction, j: int, k: int, t: float) -> ScalingMap:
    """F = f(tj + (1−t)k)"""
    center = t * j + (1 - t) * k
    factor = float(weight_values(weight, np.array([center]))[0])
    return ScalingMap(j=j, k=k, t=t, factor=factor)


def momentum_nodes(extent: float, count: int) -> np.ndarray:
    step = 2 * extent / count
    return -extent + step * (np.arange(count) + 0.5)


def nodes_for(extent: float, spatial_length: float, hbar: float) -> int:
    """Δp · (공간 길이) / ħ ≤ π 를 만족하는 최소 노드 수"""
    return max(2, math.ceil(2 * extent * spatial_length / (math.pi * hbar)))


def phase_step(
    window: QuadratureWindow,
    rho_max: float,
    eta_max: float,
    n_rho: int,
    n_eta: int,
    hbar: float,
) -> float:
    """이웃 구적 노드 사이 최대 위상 증분"""
    steps = (
        rho_max * window.dr,
        (2 * rho_max / n_rho) * (window.r_max - window.r_min),
        eta_max * window.dtheta,
        (2 * eta_max / n_eta) * (window.theta_max - window.theta_min),
    )
    return max(steps) / hbar


def direct_quantize(
    expr: sp.Expr,
    t: float,
    field: WindowField,
    hbar: float,
    rho_max: float,
    eta_max: float,
    n_rho: int,
    n_eta: int,
) -> np.ndarray:
    """(2πħ)^{-2} Σ_{q′} Σ_p a(tq + (1−t)q′, p) e^{ip(q−q′)/ħ} u(q′) Δq′ Δp 를 창 노드에서"""
    window = field.window
    step = phase_step(window, rho_max, eta_max, n_rho, n_eta, hbar)
    if step > math.pi + 1e-12:
        raise QuadratureResolutionException(step)

    r_n, th_n = window.r_nodes(), window.theta_nodes()
    rho_n, eta_n = momentum_nodes(rho_max, n_rho), momentum_nodes(eta_max, n_eta)
    weight = window.dr * window.dtheta * (2 * rho_max / n_rho) * (2 * eta_max / n_eta) / (2 * math.pi * hbar) ** 2
    e_r = np.exp(1j * np.outer(r_n, rho_n) / hbar)
    e_th = np.exp(1j * np.outer(th_n, eta_n) / hbar)
    u = field.values

    def symbol(r_vals: np.ndarray, th_vals: np.ndarray) -> np.ndarray:
        return evaluate_grid(
            expr,
            {
                "r": r_vals[..., None, None],
                "theta": th_vals[..., None, None],
                "rho": rho_n[:, None],
                "eta": eta_n[None, :],
                "hbar": hbar,
            },
        )

    r_mesh, th_mesh = np.meshgrid(r_n, th_n, indexing="ij")

    if t == 1.0:
        # û(p) = Σ_{q′} e^{−ipq′/ħ} u(q′)
        u_hat = np.conj(e_r).T @ u @ np.conj(e_th)
        A = symbol(r_mesh, th_mesh)
        phase = e_r[:, None, :, None] * e_th[None, :, None, :]
        return weight * np.sum(A * phase * u_hat[None, None], axis=(2, 3))

    if t == 0.0:
        A = symbol(r_mesh, th_mesh)
        weighted = A * np.conj(e_r)[:, None, :, None] * np.conj(e_th)[None, :, None, :] * u[:, :, None, None]
        c = np.sum(weighted, axis=(0, 1))
        return weight * (e_r @ c @ e_th.T)

    support = np.abs(u) > 0.0
    ii, mm = np.nonzero(support)

    def point(flat: int) -> complex:
        i, m = divmod(flat, window.n_theta)
        x_r = t * r_n[i] + (1 - t) * r_n[ii]
        x_th = t * th_n[m] + (1 - t) * th_n[mm]
        A = symbol(x_r, x_th)
        phase = (e_r[i][None, :] * np.conj(e_r[ii]))[:, :, None] * (e_th[m][None, :] * np.conj(e_th[mm]))[:, None, :]
        return complex(weight * np.sum(A * phase * u[ii, mm][:, None, None]))

    out = parallel_map(point, range(window.n_r * window.n_theta))
    return np.array(out, dtype=complex).reshape(window.n_r, window.n_theta)


def pullback(field: WindowField, factor: float) -> WindowField:
    """Θ^* u 를 θ 창을 1/F 로 줄인 노드에 (같은 노드 수)"""
    w = field.window
    scaled = w.model_copy(update={"theta_min": w.theta_min / factor, "theta_max": w.theta_max / factor})
    return WindowField(window=scaled, values=math.sqrt(factor) * field.values)


def pushforward(field: WindowField, factor: float) -> WindowField:
    """Θ_* w (pullback 의 역)"""
    w = field.window
    scaled = w.model_copy(update={"theta_min": w.theta_min * factor, "theta_max": w.theta_max * factor})
    return WindowField(window=scaled, values=field.values / math.sqrt(factor))


def scaling_conjugate(
    a: Symbol,
    smap: ScalingMap,
    u: WindowField,
    hbar: float,
    rho_max: float = 3.0,
    eta_max: float = 3.0,
    n_rho: int | None = None,
    n_eta: int | None = None,
) -> tuple[WindowField, WindowField]:
    """(Θ_* ψ_j Op^t(a) ψ_k Θ^* u, ψ_j Op^t(Θ̃_* a) ψ_k u)

    운동량 상자는 우변 기준이며 좌변은 대응 노드 (η ↦ Fη) 를 쓴다.
    """
    window = u.window
    F = smap.factor
    pou = PartitionOfUnity(centers=(smap.j, smap.k))
    for c in pou.centers:
        if c - 1 < window.r_min or c + 1 > window.r_max:
            raise ValidationException(
                "partition member escapes the quadrature window",
                details={"center": c, "window": (window.r_min, window.r_max)},
            )
    n_rho = n_rho or nodes_for(rho_max, window.r_max - window.r_min, hbar)
    n_eta = n_eta or nodes_for(eta_max, window.theta_max - window.theta_min, hbar)

    psi_j = pou.member(smap.j, window.r_nodes())[:, None]
    psi_k = pou.member(smap.k, window.r_nodes())[:, None]
    edge = np.concatenate([u.values[:, 0], u.values[:, -1]])
    if np.max(np.abs(edge)) > 1e-10 * max(float(np.max(np.abs(u.values))), 1e-300):
        logger.warning("quadrature field does not vanish at the angular window edge")

    # 우변: 변환된 심볼을 원래 노드에서
    factor = sp.Float(F)
    pushed = a.expr.subs({theta: theta / factor, eta: factor * eta}, simultaneous=True)
    inner_rhs = WindowField(window=window, values=psi_k * u.values)
    rhs_values = psi_j * direct_quantize(pushed, smap.t, inner_rhs, hbar, rho_max, eta_max, n_rho, n_eta)

    # 좌변: 당긴 필드를 축소된 θ 창에서, η 상자는 F 배
    pulled = pullback(WindowField(window=window, values=u.values), F)
    inner_lhs = WindowField(window=pulled.window, values=psi_k * pulled.values)
    w = direct_quantize(a.expr, smap.t, inner_lhs, hbar, rho_max, F * eta_max, n_rho, n_eta)
    lhs = pushforward(WindowField(window=pulled.window, values=psi_j * w), F)

    logger.debug(f"scaling conjugate j={smap.j} k={smap.k} t={smap.t} F={F:.6g}: n_rho={n_rho} n_eta={n_eta}")
    return lhs, WindowField(window=window, values=rhs_values)


def scaling_defect(a: Symbol, smap: ScalingMap, u: WindowField, hbar: float, **kwargs: float) -> float:
    """‖lhs − rhs‖ / ‖u‖"""
    lhs, rhs = scaling_conjugate(a, smap, u, hbar, **kwargs)
    diff = WindowField(window=u.window, values=lhs.values - rhs.values)
    return diff.norm() / max(u.norm(), 1e-300)


def gaussian_window_field(window: QuadratureWindow, r_center: float, r_width: float = 0.6, theta_width: float = 0.25) -> WindowField:
    """r, θ 가우시안 시험 필드"""
    r_n, th_n = window.r_nodes(), window.theta_nodes()
    values = np.outer(np.exp(-(((r_n - r_center) / r_width) ** 2)), np.exp(-((th_n / theta_width) ** 2)))
    return WindowField(window=window, values=values.astype(complex))


def default_window(n_r: int = 22, n_theta: int = 16) -> QuadratureWindow:
    """ψ_1..ψ_3 를 담는 r ∈ [−0.2, 4.2], θ ∈ [−1.5, 1.5]"""
    return QuadratureWindow(r_min=-0.2, r_max=4.2, theta_min=-1.5, theta_max=1.5, n_r=n_r, n_theta=n_theta)
