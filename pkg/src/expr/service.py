"""Expr 엔진 - 미분, 평가, 정규화, 유한차분 검증"""

import cmath
import logging
from collections.abc import Callable, Mapping
from functools import lru_cache
from typing import Any

import numpy as np
import sympy as sp

from src.expr import registry
from src.expr.schemas import FdCheckReport, Point
from src.expr.variables import ALL_VARIABLES, DIFF_VARIABLES, resolve
from src.shared.exceptions import SingularEvaluationException, ValidationException

logger = logging.getLogger(__name__)

Expr = sp.Expr
GridFunction = Callable[..., Any]


def as_expr(e: Any) -> Expr:
    """파이썬 수/문자열/sympy 객체를 Expr로 변환"""
    if isinstance(e, sp.Basic):
        return e
    if isinstance(e, complex):
        return to_number(e)
    return sp.sympify(e)


def to_number(c: complex | float | int) -> Expr:
    """복소 스칼라를 sympy 상수로 (정수 부분은 정확히 유지)"""
    c = complex(c)

    def part(x: float) -> Expr:
        return sp.Integer(int(x)) if float(x).is_integer() else sp.Float(x)

    if c.imag == 0:
        return part(c.real)
    return part(c.real) + part(c.imag) * sp.I


# ==================== 미분 ====================


def diff(e: Expr, v: str | sp.Symbol) -> Expr:
    """변수 v에 대한 정확한 편미분"""
    try:
        var = resolve(v)
    except KeyError:
        raise ValidationException(f"unknown variable: {v}") from None
    if var not in DIFF_VARIABLES:
        raise ValidationException(f"cannot differentiate with respect to {var.name}")
    return sp.diff(as_expr(e), var)


def node_count(e: Expr) -> int:
    """트리 노드 개수 (표현식 크기 한도 검사용)"""
    return sum(1 for _ in sp.preorder_traversal(e))


# ==================== 정규화 ====================


def normalize(e: Expr, expand: bool = False) -> Expr:
    """상수 접기, 합/곱 평탄화, 정준 순서로 재구성

    expand=True이면 곱을 합에 분배한다 (소거 확인용).
    """
    e = as_expr(e)
    if expand:
        return sp.expand(e)
    return _rebuild(e)


def _rebuild(e: sp.Basic) -> sp.Basic:
    if not e.args:
        return e
    return e.func(*[_rebuild(a) for a in e.args])


def structurally_equal(a: Expr, b: Expr) -> bool:
    return bool(normalize(a) == normalize(b))


def is_zero(e: Expr) -> bool:
    """정규화 후 0인지 (필요 시 분배 전개로 재확인)"""
    n = normalize(e)
    if n == 0:
        return True
    return bool(normalize(n, expand=True) == 0)


# ==================== 스칼라 평가 ====================


def evaluate(e: Expr, pt: Point) -> complex:
    """점 pt에서의 복소 값 (특이점에서는 SingularEvaluationException)"""
    env = pt.env()
    try:
        return _eval_node(as_expr(e), env)
    except SingularEvaluationException as exc:
        raise SingularEvaluationException(exc.node, location=pt.model_dump()) from None


def _singular(node: sp.Basic) -> SingularEvaluationException:
    return SingularEvaluationException(sp.srepr(node)[:200])


def _eval_node(e: sp.Basic, env: dict[str, complex]) -> complex:
    if e.is_Symbol:
        try:
            return env[e.name]
        except KeyError:
            raise ValidationException(f"no value for variable {e.name}") from None
    if not e.free_symbols:
        if e.has(sp.zoo, sp.nan, sp.oo, -sp.oo):
            raise _singular(e)
        if e.is_Number or e.is_NumberSymbol or e is sp.I:
            return complex(e)
    if isinstance(e, sp.Add):
        return sum((_eval_node(a, env) for a in e.args), 0j)
    if isinstance(e, sp.Mul):
        out = 1 + 0j
        for a in e.args:
            out *= _eval_node(a, env)
        return out
    if isinstance(e, sp.Pow):
        base = _eval_node(e.base, env)
        if e.exp.is_Integer:
            n = int(e.exp)
            if n < 0 and base == 0:
                raise _singular(e)
            return base**n
        power = _eval_node(e.exp, env)
        if base == 0 and power.real <= 0:
            raise _singular(e)
        return base**power
    if isinstance(e, sp.exp):
        return cmath.exp(_eval_node(e.args[0], env))
    if isinstance(e, sp.log):
        x = _eval_node(e.args[0], env)
        if x == 0 or (x.imag == 0 and x.real < 0):
            raise _singular(e)
        return cmath.log(x)
    if isinstance(e, sp.sin):
        return cmath.sin(_eval_node(e.args[0], env))
    if isinstance(e, sp.cos):
        return cmath.cos(_eval_node(e.args[0], env))
    if registry.is_registered_call(e):
        return registry.evaluate_named(type(e).__name__, _eval_node(e.args[0], env))
    if not e.free_symbols:
        return complex(e.evalf())
    raise ValidationException(f"unsupported node: {type(e).__name__}")


# ==================== 격자 평가 ====================


@lru_cache(maxsize=512)
def _compile(e: Expr, registry_version: int) -> GridFunction:
    modules = [registry.numpy_namespace(), "numpy"]
    return sp.lambdify(ALL_VARIABLES, e, modules=modules, cse=True)


def compile_numpy(e: Expr) -> GridFunction:
    """Expr를 ALL_VARIABLES 순서의 numpy 함수로 컴파일 (등록 함수가 늘면 다시 컴파일)"""
    return _compile(e, registry.version())


def evaluate_grid(e: Expr, values: Mapping[str, Any]) -> np.ndarray:
    """브로드캐스트 가능한 배열들에서 Expr 평가 (복소 배열 반환)"""
    e = as_expr(e)
    missing = {s.name for s in e.free_symbols} - set(values)
    if missing:
        raise ValidationException(f"no value for variables {sorted(missing)}")

    args = [_as_array(values.get(s.name, 0.0)) for s in ALL_VARIABLES]
    shape = np.broadcast_shapes(*(np.shape(a) for a in args))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = compile_numpy(e)(*args)
    out = np.broadcast_to(np.asarray(out, dtype=complex), shape)

    bad = ~np.isfinite(out)
    if bad.any():
        idx = np.unravel_index(int(np.flatnonzero(bad)[0]), shape)
        location = {
            s.name: complex(np.broadcast_to(a, shape)[idx]).real
            for s, a in zip(ALL_VARIABLES, args)
            if s in e.free_symbols
        }
        env = {s.name: complex(np.broadcast_to(a, shape)[idx]) for s, a in zip(ALL_VARIABLES, args)}
        try:
            _eval_node(e, env)
        except SingularEvaluationException as exc:
            raise SingularEvaluationException(exc.node, location=location) from None
        raise SingularEvaluationException(sp.srepr(e)[:200], location=location)
    return out


def _as_array(v: Any) -> np.ndarray:
    arr = np.asarray(v)
    if np.iscomplexobj(arr):
        return arr.astype(complex)
    return arr.astype(float)


# ==================== 유한차분 검증 ====================


def fd_check(e: Expr, v: str, pt: Point, step: float) -> FdCheckReport:
    """중심 차분과 기호 미분 비교"""
    if step <= 0:
        raise ValidationException("step must be positive", details={"step": step})
    name = resolve(v).name
    symbolic = evaluate(diff(e, name), pt)
    plus = evaluate(e, pt.shifted(name, step))
    minus = evaluate(e, pt.shifted(name, -step))
    numeric = (plus - minus) / (2 * step)
    rel_err = abs(symbolic - numeric) / max(1.0, abs(symbolic))
    return FdCheckReport(symbolic=symbolic, numeric=numeric, rel_err=rel_err)
