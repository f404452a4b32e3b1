"""Symbol Service - 세미노름 추정, 바이심볼 전개, 샤프 곱, 차트 전송, 레졸벤트 심볼"""

import logging
import math
from itertools import product

import numpy as np
import sympy as sp

from src.config import get_settings
from src.expr.service import as_expr, diff, evaluate_grid, normalize, to_number
from src.expr.variables import eta, r, r_p, rho, theta, theta_p
from src.symbols import diffeos
from src.symbols.schemas import (
    AngularDiffeo,
    Bisymbol,
    ResolventBound,
    SampleWindow,
    Symbol,
    SymbolSeries,
    WeightFunction,
)
from src.symbols.weights import weight_values
from src.shared.exceptions import EllipticityException, ValidationException
from src.shared.parallel import parallel_map

logger = logging.getLogger(__name__)

MARGIN_FLOOR = 1e-12


# ==================== 샘플 격자 ====================


def default_window(**overrides: float | int) -> SampleWindow:
    """설정값으로 채운 기본 샘플 창"""
    settings = get_settings()
    values: dict = {
        "q_samples": settings.q_samples,
        "p_samples": settings.p_samples,
        "momentum_bound": settings.momentum_bound,
    }
    values.update(overrides)
    return SampleWindow(**values)


def window_for(weight: WeightFunction, **overrides: float | int) -> SampleWindow:
    """가중치 정의역 안으로 r 하한을 당긴 기본 창"""
    window = default_window(**overrides)
    if weight.r_min is not None and window.r_min < weight.r_min:
        shift = weight.r_min - window.r_min
        window = window.model_copy(update={"r_min": weight.r_min, "r_max": window.r_max + shift})
    return window


def sample_mesh(
    expr: sp.Expr,
    weight_r_min: float | None,
    window: SampleWindow,
    p_samples: int | None = None,
) -> dict[str, np.ndarray]:
    """(r, θ, ρ, η) 희소 메시

    식에 나타나지 않는 θ, ρ, η 축은 한 점(θ_min, 0, 0)으로 접는다.
    """
    if weight_r_min is not None and window.r_min < weight_r_min:
        raise ValidationException(
            "sample window leaves the weight domain",
            details={"r_min": window.r_min, "domain_start": weight_r_min},
        )
    free = as_expr(expr).free_symbols
    n_p = p_samples or window.p_samples
    momenta = np.linspace(-window.momentum_bound, window.momentum_bound, n_p)
    axes = [
        window.r_samples(),
        window.theta_samples() if theta in free else np.array([window.theta_min]),
        momenta if rho in free else np.array([0.0]),
        momenta if eta in free else np.array([0.0]),
    ]
    r_m, th_m, rho_m, eta_m = np.meshgrid(*axes, indexing="ij", sparse=True)
    return {"r": r_m, "theta": th_m, "rho": rho_m, "eta": eta_m}


def japanese(mesh: dict[str, np.ndarray], f_values: np.ndarray) -> np.ndarray:
    """⟨ρ ⊕ f(r)⁻¹η⟩"""
    return np.sqrt(1.0 + mesh["rho"] ** 2 + (mesh["eta"] / f_values) ** 2)


def evaluate_on_mesh(
    expr: sp.Expr,
    mesh: dict[str, np.ndarray],
    z: complex | None = None,
    hbar_value: float = 1.0,
) -> np.ndarray:
    values: dict = dict(mesh)
    values["hbar"] = hbar_value
    if z is not None:
        values["z"] = complex(z)
    shape = np.broadcast_shapes(*(np.shape(a) for a in mesh.values()))
    return np.broadcast_to(evaluate_grid(expr, values), shape)


def sample_location(mesh: dict[str, np.ndarray], flat_index: int) -> dict[str, float]:
    shape = np.broadcast_shapes(*(np.shape(a) for a in mesh.values()))
    idx = np.unravel_index(flat_index, shape)
    return {k: float(np.broadcast_to(v, shape)[idx]) for k, v in mesh.items()}


# ==================== 세미노름 ====================


def seminorm_estimate(
    a: Symbol,
    N: int,
    window: SampleWindow | None = None,
    p_samples: int | None = None,
    decay: int = 1,
    hbar_value: float = 1.0,
) -> float:
    """|a|_{S^m_f, N} 의 격자 최댓값 추정 (참값의 하한)

    decay는 운동량 미분마다 얻는 감쇠 ⟨·⟩^{σ|β|} 의 σ (0 또는 1).
    """
    settings = get_settings()
    if N < 0 or N > settings.max_seminorm_order:
        raise ValidationException(
            "seminorm order outside derivative budget",
            details={"N": N, "max": settings.max_seminorm_order},
        )
    if decay not in (0, 1):
        raise ValidationException("decay must be 0 or 1", details={"decay": decay})

    window = window or window_for(a.weight)
    mesh = sample_mesh(a.expr, a.weight.r_min, window, p_samples)
    f_values = weight_values(a.weight, mesh["r"])
    bracket = japanese(mesh, f_values)

    # 다중지수 (α₀, α′, β₀, β′) → 도함수
    derivatives: dict[tuple[int, int, int, int], sp.Expr] = {(0, 0, 0, 0): a.expr}
    order = ("r", "theta", "rho", "eta")
    indices = [idx for idx in product(range(N + 1), repeat=4) if sum(idx) <= N]
    for idx in sorted(indices, key=sum):
        if idx in derivatives:
            continue
        axis = next(i for i, n in enumerate(idx) if n > 0)
        parent = tuple(n - (1 if i == axis else 0) for i, n in enumerate(idx))
        derivatives[idx] = diff(derivatives[parent], order[axis])

    def weighted_max(idx: tuple[int, int, int, int]) -> float:
        a0, a1, b0, b1 = idx
        expr = derivatives[idx]
        if expr == 0:
            return 0.0
        values = np.abs(evaluate_on_mesh(expr, mesh, a.z, hbar_value))
        factor = f_values ** (b1 - a1) * bracket ** (-a.order + decay * (b0 + b1))
        return float(np.max(values * factor))

    result = max(parallel_map(weighted_max, indices))
    logger.debug(f"seminorm estimate N={N} order={a.order}: {result:.6g}")
    return result


# ==================== 바이심볼 / 샤프 곱 ====================


def _check_J(J: int) -> None:
    limit = get_settings().max_series_order
    if J < 0 or J > limit:
        raise ValidationException("series order outside budget", details={"J": J, "max": limit})


def bisymbol_expansion(a: Bisymbol, J: int) -> SymbolSeries:
    """a(q, p, q′) → Op^t 심볼 전개 b₀ + ħb₁ + … + ħᴶb_J

    b_j = (i^j/j!)(∂_p·∂_y)^j a(q+(1−t)y, p, q−ty)|_{y=0}
    """
    _check_J(J)
    y_r, y_theta = sp.Dummy("y_r", real=True), sp.Dummy("y_theta", real=True)
    t = sp.nsimplify(a.t, rational=True)
    substituted = a.expr.subs(
        {
            r: r + (1 - t) * y_r,
            theta: theta + (1 - t) * y_theta,
            r_p: r - t * y_r,
            theta_p: theta - t * y_theta,
        },
        simultaneous=True,
    )

    terms: list[sp.Expr] = []
    current = substituted
    for j in range(J + 1):
        at_zero = current.subs({y_r: 0, y_theta: 0})
        terms.append(normalize(sp.I**j / sp.factorial(j) * at_zero))
        current = sp.diff(current, rho, y_r) + sp.diff(current, eta, y_theta)
    return SymbolSeries(
        terms=tuple(terms),
        orders=tuple(a.order - j for j in range(J + 1)),
        weight=a.weight,
        t=a.t,
    )


def _sharp(chi: Symbol, a: Symbol, factor: sp.Expr, J: int, t: float) -> SymbolSeries:
    _check_J(J)
    if chi.expr.has(rho, eta):
        raise ValidationException("cutoff symbol must not depend on momenta")
    primed = chi.expr.subs({r: r_p, theta: theta_p}, simultaneous=True)
    current = a.expr * primed

    terms: list[sp.Expr] = []
    for j in range(J + 1):
        coeff = factor**j / sp.factorial(j)
        term = current.subs({r_p: r, theta_p: theta}, simultaneous=True) if coeff != 0 else sp.Integer(0)
        terms.append(normalize(coeff * term))
        current = sp.diff(current, rho, r_p) + sp.diff(current, eta, theta_p)
    return SymbolSeries(
        terms=tuple(terms),
        orders=tuple(a.order + chi.order - j for j in range(J + 1)),
        weight=a.weight,
        z=a.z,
        t=t,
    )


def sharp_left(chi: Symbol, a: Symbol, t: float, J: int) -> SymbolSeries:
    """χ ∘ Op^t(a) 의 심볼 χ #^t a, 계수 (i(1−t))^j/j!"""
    factor = sp.I * (1 - sp.nsimplify(t, rational=True))
    return _sharp(chi, a, factor, J, t)


def sharp_right(a: Symbol, chi: Symbol, t: float, J: int) -> SymbolSeries:
    """Op^t(a) ∘ χ 의 심볼 a #^t χ, 계수 (−it)^j/j!"""
    factor = -sp.I * sp.nsimplify(t, rational=True)
    return _sharp(chi, a, factor, J, t)


# ==================== 차트 전송 ====================


def chart_transfer_leading(a: Symbol, phi: AngularDiffeo) -> Symbol:
    """정준 변환 (θ, η) ↦ (φ′(θ), η/∂φ′(θ)) 에 의한 푸시포워드 a ∘ φ̃⁻¹"""
    diffeos.check_positive(phi)
    if not a.expr.has(theta, eta):
        return a
    jac_at_inverse = diffeos.derivative(phi).subs(theta, phi.inverse)
    pushed = a.expr.subs({theta: phi.inverse, eta: jac_at_inverse * eta}, simultaneous=True)
    return a.model_copy(update={"expr": pushed})


# ==================== 레졸벤트 심볼 ====================


def ellipticity_margin(
    sigma: Symbol,
    z: complex,
    window: SampleWindow | None = None,
    p_samples: int | None = None,
) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """샘플별 |z − σ|·⟨ρ⊕f⁻¹η⟩^{−m}"""
    window = window or window_for(sigma.weight)
    mesh = sample_mesh(sigma.expr, sigma.weight.r_min, window, p_samples)
    values = evaluate_on_mesh(sigma.expr, mesh, z)
    bracket = japanese(mesh, weight_values(sigma.weight, mesh["r"]))
    return np.abs(complex(z) - values) * bracket ** (-sigma.order), mesh


def _require_margin(margin: np.ndarray, mesh: dict[str, np.ndarray], z: complex) -> None:
    worst = int(np.argmin(margin))
    if margin.flat[worst] <= MARGIN_FLOOR:
        raise EllipticityException(z, worst_sample=sample_location(mesh, worst))


def resolvent_symbol(
    sigma: Symbol,
    z: complex,
    window: SampleWindow | None = None,
    p_samples: int | None = None,
) -> Symbol:
    """(z − σ)⁻¹, 차수 −m"""
    margin, mesh = ellipticity_margin(sigma, z, window, p_samples)
    _require_margin(margin, mesh, z)
    expr = sp.Pow(to_number(z) - sigma.expr, -1)
    return Symbol(expr=expr, order=-sigma.order, weight=sigma.weight, z=complex(z))


def delta_N(
    sigma: Symbol,
    z: complex,
    N: int,
    window: SampleWindow | None = None,
    p_samples: int | None = None,
) -> ResolventBound:
    """Δ_N(z) = Σ_{l≤N} sup ⟨ρ⊕f⁻¹η⟩^{m(l+1)} / |z − σ|^{l+1}"""
    if N < 0:
        raise ValidationException("N must be nonnegative", details={"N": N})
    margin, mesh = ellipticity_margin(sigma, z, window, p_samples)
    _require_margin(margin, mesh, z)
    ratio = 1.0 / margin
    total = math.fsum(float(np.max(ratio ** (l + 1))) for l in range(N + 1))
    return ResolventBound(z=complex(z), N=N, delta_N=total)

