"""유한차분 자기검증용 고정 식 모음 (모든 노드 종류 포함)"""

from collections.abc import Callable
from itertools import combinations

import numpy as np
import sympy as sp

from src.expr.schemas import FdCheckReport, Point
from src.expr.service import diff, evaluate_grid, fd_check
from src.expr.variables import eta, hbar, r, rho, theta, z

CorpusCase = tuple[str, sp.Expr, str, Point]


def build_corpus(jr: Callable[[sp.Expr], sp.Expr]) -> list[CorpusCase]:
    """(이름, 식, 미분 변수, 점) 20개

    jr는 ⟨x⟩ 이름 함수 노드 생성자.
    """
    base = Point(r=0.4, theta=0.3, rho=0.7, eta=-0.6, hbar=0.25, z=-1 + 0.5j)
    return [
        ("poly_rho3", rho**3, "rho", base.model_copy(update={"rho": 1.0})),
        ("sin_theta", sp.sin(theta), "theta", base),
        ("cos_product", sp.cos(2 * theta) * r, "theta", base),
        ("resolvent_rho", (z - rho**2) ** -1, "rho", base),
        ("resolvent_sq", (z - rho**2) ** -2, "rho", base.model_copy(update={"rho": 0.5, "z": -1 + 0j})),
        ("exp_r", sp.exp(r) * eta, "r", base),
        ("inverse_exp", sp.exp(-r) * eta, "eta", base),
        ("log_weight", sp.log(1 + r**2), "r", base),
        ("bracket", jr(r), "r", base),
        ("bracket_inv_eta", eta / jr(r), "r", base),
        ("laplace_symbol", rho**2 + eta**2 / jr(r) ** 2, "eta", base),
        ("laplace_resolvent", (z - rho**2 - eta**2 / jr(r) ** 2) ** -1, "r", base),
        ("complex_const", (2 - 3 * sp.I) * rho * theta, "theta", base),
        ("hbar_poly", hbar**2 * rho + hbar * eta, "rho", base),
        ("nested_trig", sp.sin(sp.cos(theta) + r), "r", base),
        ("exp_trig", sp.exp(sp.sin(theta)) * rho, "theta", base),
        ("gauss", sp.exp(-(rho**2 + eta**2)), "eta", base),
        ("rational_mix", rho / (2 + sp.cos(theta)), "theta", base),
        ("log_bracket", sp.log(jr(rho)), "rho", base),
        ("power_mix", (1 + r**2) ** sp.Rational(3, 2) * sp.sin(theta) ** 2, "r", base),
    ]


def run_corpus(cases: list[CorpusCase], step: float = 1e-5) -> list[tuple[str, FdCheckReport]]:
    return [(name, fd_check(e, v, pt, step)) for name, e, v, pt in cases]


def mixed_partial_defect(cases: list[CorpusCase], samples: int = 100, seed: int = 0) -> float:
    """∂_u∂_v e 와 ∂_v∂_u e 의 최대 상대 차 (무작위 점 samples 개)"""
    rng = np.random.default_rng(seed)
    values = {
        "r": rng.uniform(-1.0, 1.0, samples),
        "theta": rng.uniform(0.0, 2 * np.pi, samples),
        "rho": rng.uniform(-1.0, 1.0, samples),
        "eta": rng.uniform(-1.0, 1.0, samples),
        "hbar": 0.25,
        "z": -1 + 0.5j,
    }
    worst = 0.0
    for _, e, _, _ in cases:
        for u, v in combinations(("r", "theta", "rho", "eta"), 2):
            uv = evaluate_grid(diff(diff(e, u), v), values)
            vu = evaluate_grid(diff(diff(e, v), u), values)
            scale = np.maximum(1.0, np.abs(uv))
            worst = max(worst, float(np.max(np.abs(uv - vu) / scale)))
    return worst
