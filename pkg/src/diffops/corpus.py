"""파라메트릭스 검증용 연산자 모음"""

import sympy as sp

from src.diffops.schemas import DiffOp
from src.diffops.service import constant_operator, radial_schrodinger, warped_laplacian
from src.expr.variables import r, theta
from src.symbols.weights import get_weight

# 휜 라플라시안의 각도 계량 (비상수 h 로 ħ¹ 층을 살린다)
ANGULAR_METRIC = 1 + sp.cos(theta) / 4


def radial_bump() -> sp.Expr:
    """c(r) = e^{−r²}/2"""
    return sp.exp(-(r**2)) / 2


def operator_corpus(weight_name: str = "sqrt1pr2", nonconstant_h: bool = False) -> list[tuple[str, DiffOp]]:
    """상수 계수, (ħD_r)² + c(r), 휜 라플라시안"""
    one = get_weight("one")
    h = ANGULAR_METRIC if nonconstant_h else sp.Integer(1)
    return [
        ("constant", constant_operator(one)),
        ("radial", radial_schrodinger(one, radial_bump())),
        ("laplacian", warped_laplacian(get_weight(weight_name), h)),
    ]
