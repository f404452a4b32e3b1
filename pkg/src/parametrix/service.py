"""Parametrix Service - 미분연산자와 심볼의 정확한 합성, 파라메트릭스 재귀

(z − P) ∘ Op¹(Σ ħ^l b_l) = 1 + Op¹(ħ^{N+1} e_{N+1} + …)
"""

import logging
from functools import lru_cache
from math import comb
from typing import Any

import sympy as sp

from src.config import get_settings
from src.diffops.schemas import DiffOp
from src.diffops.service import check_diffop_class, check_elliptic, principal_symbol
from src.expr.service import diff, is_zero, node_count, normalize, to_number
from src.expr.variables import eta, rho
from src.parametrix.schemas import ParametrixResult
from src.quantize.service import symbol_expr
from src.symbols.schemas import SampleWindow, SymbolSeries
from src.symbols.service import resolvent_symbol
from src.shared.exceptions import EllipticityException, SeriesTooDeepException, ValidationException

logger = logging.getLogger(__name__)


# ==================== 합성 ====================


def compose_diffop_symbol(
    P: DiffOp,
    a: Any,
    z: complex | None = None,
    order: float = 0.0,
) -> SymbolSeries:
    """Σ_α p_α(ħ; q) f^{−|α′|} (p + ħD_q)^α a 의 정확한 ħ 전개

    z 가 주어지면 (z − P) 와의 합성. ħ⁰ 항은 σ(P)·a (또는 (z − σ)·a) 그대로.
    """
    a = symbol_expr(a)
    sigma = principal_symbol(P).expr
    f = P.weight.expr

    @lru_cache(maxsize=None)
    def derivative(i0: int, i1: int) -> sp.Expr:
        if i0 == 0 and i1 == 0:
            return a
        if i0 > 0:
            return diff(derivative(i0 - 1, i1), "r")
        return diff(derivative(0, i1 - 1), "theta")

    degree = max((j + a0 + a1 for (a0, a1), j, _ in P.triples()), default=0)
    buckets: list[list[sp.Expr]] = [[] for _ in range(degree + 1)]
    for (a0, a1), j, p in P.triples():
        for i0 in range(a0 + 1):
            for i1 in range(a1 + 1):
                if j == 0 and i0 == 0 and i1 == 0:
                    continue
                da = derivative(i0, i1)
                if da == 0:
                    continue
                coeff = comb(a0, i0) * comb(a1, i1) * (-sp.I) ** (i0 + i1)
                buckets[j + i0 + i1].append(
                    coeff * p * f ** (-a1) * rho ** (a0 - i0) * eta ** (a1 - i1) * da
                )

    if z is None:
        leading, sign = sp.Mul(sigma, a), 1
    else:
        leading, sign = sp.Mul(to_number(z) - sigma, a), -1
    terms = [leading] + [normalize(sign * sp.Add(*bucket)) for bucket in buckets[1:]]
    return SymbolSeries(
        terms=tuple(terms),
        orders=tuple(order + P.order - k for k in range(len(terms))),
        weight=P.weight,
        z=None if z is None else complex(z),
    )


def _graded(composed: list[SymbolSeries], k: int) -> sp.Expr:
    """Σ_l C_l[k − l] (C_l 는 b_l 과의 합성)"""
    parts = [
        c.terms[k - l]
        for l, c in enumerate(composed)
        if 0 <= k - l < len(c.terms)
    ]
    return sp.Add(*parts)


# ==================== 파라메트릭스 ====================


def build_parametrix(
    P: DiffOp,
    z: complex,
    N: int,
    window: SampleWindow | None = None,
    allow_partial: bool = False,
) -> ParametrixResult:
    """b₀ = (z − σ)⁻¹, b_{j+1} = −e_{j+1}(z − σ)⁻¹

    e_{j+1} 은 (z − P)#(Σ_{l≤j} ħ^l b_l) − 1 의 ħ^{j+1} 계수 (정확한 심볼 대수).
    """
    settings = get_settings()
    if N < 0 or N > settings.max_series_order:
        raise ValidationException("series order outside budget", details={"N": N, "max": settings.max_series_order})

    check_diffop_class(P, window)
    report = check_elliptic(P, z, window)
    if not report.elliptic:
        raise EllipticityException(complex(z), worst_sample=report.worst_sample)
    sigma = principal_symbol(P)
    inv = resolvent_symbol(sigma, z, window).expr
    logger.info(f"building parametrix for {P.name} at z={z}, N={N}")

    terms = [inv]
    nodes = [node_count(inv)]
    composed = [compose_diffop_symbol(P, inv, z, order=-P.order)]
    for j in range(N):
        e = _graded(composed, j + 1)
        b_next = normalize(-e * inv)
        size = node_count(b_next)
        if size > settings.node_budget:
            if allow_partial:
                logger.warning(f"series too deep for {P.name}: stopping at N={j} ({size} nodes)")
                break
            raise SeriesTooDeepException(achieved_n=j, nodes=size, budget=settings.node_budget)
        terms.append(b_next)
        nodes.append(size)
        composed.append(compose_diffop_symbol(P, b_next, z, order=-P.order - (j + 1)))
        logger.debug(f"b_{j + 1}: {size} nodes")

    n = len(terms) - 1
    series = SymbolSeries(
        terms=tuple(terms),
        orders=tuple(float(-P.order - j) for j in range(n + 1)),
        weight=P.weight,
        z=complex(z),
    )
    remainder = normalize(_graded(composed, n + 1))
    return ParametrixResult(
        series=series,
        remainder=remainder,
        ellipticity=report,
        requested_n=N,
        nodes=nodes,
    )


def defect_coefficients(P: DiffOp, series: SymbolSeries, z: complex) -> list[sp.Expr]:
    """(z − P)#(Σ ħ^l b_l) − 1 의 ħ^k 계수, k = 0..N+m"""
    composed = [
        compose_diffop_symbol(P, b, z, order=o)
        for b, o in zip(series.terms, series.orders)
    ]
    top = max(l + len(c.terms) - 1 for l, c in enumerate(composed))
    coefficients = [_graded(composed, k) for k in range(top + 1)]
    coefficients[0] = coefficients[0] - 1
    return coefficients


def cancellation_flags(P: DiffOp, series: SymbolSeries, z: complex) -> list[bool]:
    """ħ⁰..ħ^N 결손 계수가 정규화 후 0인지"""
    coefficients = defect_coefficients(P, series, z)
    return [is_zero(c) for c in coefficients[: series.N + 1]]


def leading_term_holds(P: DiffOp, a: Any) -> bool:
    """합성의 ħ⁰ 항이 σ(P)·a 와 같은지"""
    a = symbol_expr(a)
    composed = compose_diffop_symbol(P, a)
    return is_zero(composed.terms[0] - principal_symbol(P).expr * a)
