"""DiffOp Service - 적용, 주심볼, 타원성, 리 미분, 휜 라플라시안, 계수 클래스 검사"""

import logging

import numpy as np
import sympy as sp

from src.expr.service import as_expr, diff, evaluate_grid, normalize
from src.expr.variables import eta, hbar, r, rho, theta
from src.diffops.schemas import CoefficientReport, DiffOp, EllipticityReport, MetricReport, MultiIndex
from src.quantize.schemas import HalfDensityField
from src.quantize.service import momentum_powers, spectral_multiplier
from src.symbols.schemas import SampleWindow, Symbol, WeightFunction
from src.symbols.service import ellipticity_margin, sample_location, window_for
from src.symbols.weights import weight_values
from src.shared.exceptions import CoefficientClassException, ValidationException
from src.shared.parallel import parallel_map

logger = logging.getLogger(__name__)

NOT_ELLIPTIC_FLOOR = 1e-14
COEFFICIENT_BOUND = 1e6
METRIC_TOLERANCE = 10.0


def _layers(*exprs: sp.Expr | int) -> tuple[sp.Expr, ...]:
    """뒤쪽 0 층을 잘라낸 ħ 층 튜플"""
    out = [normalize(as_expr(e)) for e in exprs]
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return tuple(out)


# ==================== 적용 ====================


def _coefficient_grid(P: DiffOp, alpha: MultiIndex, u: HalfDensityField) -> np.ndarray:
    g = u.grid
    return evaluate_grid(
        P.coefficient(alpha),
        {"r": g.r_values()[:, None], "theta": g.theta_values()[None, :], "hbar": g.hbar},
    )


def apply(P: DiffOp, u: HalfDensityField) -> HalfDensityField:
    """Pu = Σ_α p_α(ħ) f^{−α′} (ħD_θ)^{α′}(ħD_r)^{α₀} u (스펙트럼 미분 후 점별 곱)"""
    g = u.grid
    f = weight_values(P.weight, g.r_values())[:, None]

    def term(alpha: MultiIndex) -> np.ndarray:
        derived = u.values if alpha == (0, 0) else spectral_multiplier(u.values, momentum_powers(g, *alpha))
        return _coefficient_grid(P, alpha, u) * f ** (-alpha[1]) * derived

    parts = parallel_map(term, sorted(P.coeffs))
    return u.like(sum(parts, np.zeros(g.shape, dtype=complex)))


def apply_adjoint(P: DiffOp, u: HalfDensityField) -> HalfDensityField:
    """P*u = Σ_α (ħD)^α [conj(p_α f^{−α′}) u], apply 의 이산 L² 수반"""
    g = u.grid
    f = weight_values(P.weight, g.r_values())[:, None]

    def term(alpha: MultiIndex) -> np.ndarray:
        weighted = np.conj(_coefficient_grid(P, alpha, u) * f ** (-alpha[1])) * u.values
        if alpha == (0, 0):
            return weighted
        return spectral_multiplier(weighted, momentum_powers(g, *alpha))

    parts = parallel_map(term, sorted(P.coeffs))
    return u.like(sum(parts, np.zeros(g.shape, dtype=complex)))


# ==================== 주심볼 / 타원성 ====================


def principal_symbol(P: DiffOp) -> Symbol:
    """σ(P) = Σ_α p_{α,0} (f⁻¹η)^{α′} ρ^{α₀}"""
    f = P.weight.expr
    terms = [
        p * (eta / f) ** alpha[1] * rho ** alpha[0]
        for alpha, p in sorted(P.layer(0).items())
    ]
    return Symbol(expr=normalize(sp.Add(*terms)), order=float(P.order), weight=P.weight)


def check_elliptic(
    P: DiffOp,
    z: complex,
    window: SampleWindow | None = None,
    p_samples: int | None = None,
) -> EllipticityReport:
    """|z − σ|⟨ρ⊕f⁻¹η⟩^{−m} 의 샘플 최솟값/최댓값 (실패는 보고로만)"""
    sigma = principal_symbol(P)
    margin, mesh = ellipticity_margin(sigma, z, window, p_samples)
    worst = int(np.argmin(margin))
    c_lower, c_upper = float(margin.flat[worst]), float(np.max(margin))
    elliptic = c_lower > NOT_ELLIPTIC_FLOOR
    report = EllipticityReport(
        z=complex(z),
        c_lower=c_lower,
        c_upper=c_upper,
        elliptic=elliptic,
        worst_sample=sample_location(mesh, worst),
    )
    if not elliptic:
        logger.warning(f"{P.name} is not elliptic at z={z}: worst sample {report.worst_sample}")
    return report


# ==================== B_f 계수 클래스 ====================


def check_bf_class(
    name: str,
    expr: sp.Expr,
    weight: WeightFunction,
    window: SampleWindow | None = None,
    N: int = 2,
    bound: float = COEFFICIENT_BOUND,
) -> CoefficientReport:
    """(f⁻¹∂_θ)^{α′}∂_r^{α₀} a, α₀ + α′ ≤ N 의 샘플 최댓값이 bound 이하인지 확인"""
    window = window or window_for(weight)
    if weight.r_min is not None and window.r_min < weight.r_min:
        raise ValidationException(
            "coefficient window leaves the weight domain",
            details={"r_min": window.r_min, "domain_start": weight.r_min},
        )
    r_vals = window.r_samples()[:, None]
    th_vals = window.theta_samples()[None, :]
    f = weight_values(weight, window.r_samples())[:, None]

    sup: dict[str, float] = {}
    by_r = as_expr(expr)
    for a0 in range(N + 1):
        current = by_r
        for a1 in range(N + 1 - a0):
            values = np.abs(evaluate_grid(current, {"r": r_vals, "theta": th_vals, "hbar": 1.0}))
            weighted = values * f ** (-a1)
            peak = float(np.max(weighted))
            sup[f"{a0},{a1}"] = peak
            if not np.isfinite(peak) or peak > bound:
                idx = np.unravel_index(int(np.argmax(weighted)), weighted.shape)
                raise CoefficientClassException(
                    name,
                    location={"r": float(r_vals[idx[0], 0]), "theta": float(th_vals[0, idx[-1]])},
                )
            current = diff(current, "theta")
        by_r = diff(by_r, "r")
    logger.debug(f"B_f check {name}: {sup}")
    return CoefficientReport(name=name, sup=sup, bound=bound, passed=True)


def check_diffop_class(P: DiffOp, window: SampleWindow | None = None, N: int = 2) -> list[CoefficientReport]:
    """모든 p_{α,j} 에 대한 B_f 검사"""
    return [
        check_bf_class(f"p[{alpha}][{j}]", p, P.weight, window, N)
        for alpha, j, p in P.triples()
    ]


def check_metric(
    h: sp.Expr,
    weight: WeightFunction,
    window: SampleWindow | None = None,
    tolerance: float = METRIC_TOLERANCE,
) -> MetricReport:
    """정규화 틀 (dr, f dθ) 의 계량 diag(1, h) 고유값을 창 시작 r 의 값과 비교

    h 는 (r, θ) 에 의존해도 된다; 비율이 [1/tolerance, tolerance] 안이면 통과.
    """
    window = window or window_for(weight)
    r_vals = window.r_samples()[:, None]
    th_vals = window.theta_samples()[None, :]
    values = evaluate_grid(as_expr(h), {"r": r_vals, "theta": th_vals})
    shape = np.broadcast_shapes(r_vals.shape, th_vals.shape)
    values = np.broadcast_to(values, shape)
    positive = bool(np.all(np.abs(values.imag) <= 1e-12)) and bool(np.all(values.real > 0))
    if not positive:
        return MetricReport(min_ratio=0.0, max_ratio=np.inf, tolerance=tolerance, positive=False, passed=False)

    h_values = values.real
    eigen = np.stack([np.ones_like(h_values), h_values])
    ratio = eigen / eigen[:, :1, :]
    lo, hi = float(np.min(ratio)), float(np.max(ratio))
    passed = lo >= 1.0 / tolerance and hi <= tolerance
    return MetricReport(min_ratio=lo, max_ratio=hi, tolerance=tolerance, positive=True, passed=passed)


# ==================== 예제 연산자 ====================


def lie_derivative(X1: sp.Expr, Y1: sp.Expr, weight: WeightFunction, window: SampleWindow | None = None) -> DiffOp:
    """X = X₁∂_r + f⁻¹Y₁∂_θ 에 대한 반밀도 위의 i⁻¹ħL_X

    i⁻¹ħL_X = X₁ħD_r + Y₁f⁻¹ħD_θ − (iħ/2)(∂_rX₁ + f⁻¹∂_θY₁)
    """
    X1, Y1 = as_expr(X1), as_expr(Y1)
    if window is not None:
        check_bf_class("X1", X1, weight, window)
        check_bf_class("Y1", Y1, weight, window)
    f = weight.expr
    divergence = diff(X1, "r") + diff(Y1, "theta") / f
    coeffs: dict[MultiIndex, tuple[sp.Expr, ...]] = {}
    if X1 != 0:
        coeffs[(1, 0)] = _layers(X1)
    if Y1 != 0:
        coeffs[(0, 1)] = _layers(Y1)
    zeroth = _layers(0, -sp.I / 2 * divergence)
    if zeroth != (0,):
        coeffs[(0, 0)] = zeroth
    return DiffOp(name="lie", order=1, coeffs=coeffs, weight=weight)


def radial_potential(weight: WeightFunction, n: int = 2) -> sp.Expr:
    """−((n−1)²/4)(∂_r log f)² − ((n−1)/2)∂_r² log f"""
    log_f = sp.log(weight.expr)
    d1 = diff(log_f, "r")
    d2 = diff(d1, "r")
    return normalize(-sp.Rational((n - 1) ** 2, 4) * d1**2 - sp.Rational(n - 1, 2) * d2)


def angular_potential(h: sp.Expr) -> sp.Expr:
    """V′ = h^{−1/4} ∂_θ(h^{−1/2} ∂_θ h^{−1/4}) = (7/16)h′²/h³ − h″/(4h²)"""
    h1 = diff(h, "theta")
    h2 = diff(h1, "theta")
    return normalize(sp.Rational(7, 16) * h1**2 / h**3 - h2 / (4 * h**2))


def half_density_potential(weight: WeightFunction, h: sp.Expr, n: int = 2) -> sp.Expr:
    """V_φ = 반경 부분 + f⁻²V′"""
    return normalize(radial_potential(weight, n) + angular_potential(h) / weight.expr**2)


def warped_laplacian(
    weight: WeightFunction,
    h: sp.Expr | int = 1,
    window: SampleWindow | None = None,
) -> DiffOp:
    """g = dr² + f(r)²h(θ)dθ² 의 반밀도 라플라시안 −ħ²Δ_g

    (ħD_r)² + h⁻¹(f⁻¹ħD_θ)² − iħf⁻¹(h⁻¹)′(f⁻¹ħD_θ) − ħ²V_φ
    """
    h = as_expr(h)
    if h.has(r, rho, eta, hbar):
        raise ValidationException("angular metric coefficient must depend on theta only")
    if window is not None:
        metric = check_metric(h, weight, window)
        if not metric.passed:
            raise CoefficientClassException("h", location={"min_ratio": metric.min_ratio, "max_ratio": metric.max_ratio})
        check_bf_class("h", h, weight, window)
        check_bf_class("1/h", 1 / h, weight, window)

    f = weight.expr
    inv_h = normalize(1 / h)
    coeffs: dict[MultiIndex, tuple[sp.Expr, ...]] = {
        (2, 0): _layers(1),
        (0, 2): _layers(inv_h),
    }
    first = _layers(0, -sp.I * diff(inv_h, "theta") / f)
    if first != (0,):
        coeffs[(0, 1)] = first
    potential = half_density_potential(weight, h)
    zeroth = _layers(0, 0, -potential)
    if zeroth != (0,):
        coeffs[(0, 0)] = zeroth
    return DiffOp(name=f"laplacian[{weight.name}]", order=2, coeffs=coeffs, weight=weight)


def shifted(P: DiffOp, c: sp.Expr | int, name: str | None = None) -> DiffOp:
    """P + c(r, θ) (ħ⁰ 층에 더함)"""
    coeffs = dict(P.coeffs)
    layers = list(coeffs.get((0, 0), (sp.Integer(0),)))
    layers[0] = normalize(layers[0] + as_expr(c))
    coeffs[(0, 0)] = _layers(*layers)
    if coeffs[(0, 0)] == (0,):
        del coeffs[(0, 0)]
    return P.model_copy(update={"coeffs": coeffs, "name": name or P.name})


def constant_operator(weight: WeightFunction, c0: float = 1.0, c1: float = 1.0) -> DiffOp:
    """c₀(ħD_r)² + c₁(f⁻¹ħD_θ)² (f ≡ 1 이면 상수 계수)"""
    coeffs: dict[MultiIndex, tuple[sp.Expr, ...]] = {
        (2, 0): _layers(sp.nsimplify(c0)),
        (0, 2): _layers(sp.nsimplify(c1)),
    }
    return DiffOp(name="constant", order=2, coeffs=coeffs, weight=weight)


def radial_schrodinger(weight: WeightFunction, c: sp.Expr) -> DiffOp:
    """(ħD_r)² + c(r)"""
    c = as_expr(c)
    if c.has(theta, rho, eta):
        raise ValidationException("radial potential must depend on r only")
    coeffs: dict[MultiIndex, tuple[sp.Expr, ...]] = {(2, 0): _layers(1), (0, 0): _layers(c)}
    return DiffOp(name="radial", order=2, coeffs=coeffs, weight=weight)
