"""L² 유계성 확인용 0차 심볼 10개"""

import sympy as sp

from src.expr.variables import eta, r, rho, theta
from src.symbols.schemas import Symbol, WeightFunction
from src.symbols.weights import japanese_bracket


def symbol_corpus(weight: WeightFunction) -> list[tuple[str, Symbol]]:
    """(이름, 심볼) - 상수, 곱셈, 승수, θ 무관, θ 의존 경로를 모두 포함"""
    f = weight.expr
    frame = rho**2 + (eta / f) ** 2
    exprs = [
        ("one", sp.Integer(1)),
        ("sin_theta", sp.sin(theta)),
        ("radial_profile", (2 + sp.cos(r)) / 3),
        ("gauss_rho", sp.exp(-(rho**2))),
        ("bracket_ratio", rho / japanese_bracket(rho)),
        ("gauss_frame", sp.exp(-frame)),
        ("angular_gauss", sp.cos(theta) * sp.exp(-(rho**2 + eta**2))),
        ("inverse_frame", 1 / (2 + frame)),
        ("localized_rho", sp.exp(-(r**2)) * rho**2 / (1 + rho**2)),
        ("modulated_eta", (1 + sp.cos(theta) / 2) * sp.exp(-((eta / f) ** 2))),
    ]
    return [(name, Symbol(expr=e, order=0.0, weight=weight)) for name, e in exprs]
