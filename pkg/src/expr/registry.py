"""등록형 이름 함수 노드 (가중치 f(r), 계량 계수 h(θ), 각도 좌표 변환 등)

각 노드는 단항 sympy Function 서브클래스로 만들어지며, 사용자가 준
미분 규칙과 numpy 평가기를 가진다. 미분 규칙이 없는 노드를 미분하면
MissingDerivativeRuleException이 발생한다.
"""

import threading
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

import numpy as np
import sympy as sp

from src.shared.exceptions import MissingDerivativeRuleException, ValidationException

Evaluator = Callable[[Any], Any]
DerivativeRule = Callable[[sp.Expr], sp.Expr]


@dataclass(frozen=True)
class NamedFunctionSpec:
    """이름 함수 노드 명세"""

    name: str
    evaluator: Evaluator
    derivative: DerivativeRule | None = None
    real: bool = True
    positive: bool = False


_lock = threading.Lock()
_specs: dict[str, NamedFunctionSpec] = {}
_classes: dict[str, type[sp.Function]] = {}
# 새 이름이 등록될 때마다 증가 (컴파일 캐시 키)
_version = 0


def _make_class(spec: NamedFunctionSpec) -> type[sp.Function]:
    def fdiff(self: sp.Function, argindex: int = 1) -> sp.Expr:
        if spec.derivative is None:
            raise MissingDerivativeRuleException(spec.name)
        return spec.derivative(self.args[0])

    def _eval_is_real(self: sp.Function) -> bool | None:
        return True if spec.real and self.args[0].is_real else None

    def _eval_is_positive(self: sp.Function) -> bool | None:
        return True if spec.positive and self.args[0].is_real else None

    namespace = {
        "nargs": 1,
        "fdiff": fdiff,
        "_eval_is_real": _eval_is_real,
        "_eval_is_positive": _eval_is_positive,
        "_eval_is_extended_real": _eval_is_real,
        "_eval_is_extended_positive": _eval_is_positive,
    }
    return type(spec.name, (sp.Function,), namespace)


def register_function(
    name: str,
    evaluator: Evaluator,
    derivative: DerivativeRule | None = None,
    *,
    real: bool = True,
    positive: bool = False,
) -> type[sp.Function]:
    """이름 함수 노드 등록 (같은 이름 재등록 시 기존 클래스 반환)"""
    if not name.isidentifier():
        raise ValidationException(f"invalid function name: {name}")
    global _version
    with _lock:
        if name in _classes:
            return _classes[name]
        spec = NamedFunctionSpec(name, evaluator, derivative, real, positive)
        _specs[name] = spec
        _classes[name] = _make_class(spec)
        _version += 1
        return _classes[name]


def version() -> int:
    return _version


def get_function(name: str) -> type[sp.Function]:
    """등록된 함수 클래스 조회"""
    try:
        return _classes[name]
    except KeyError:
        raise ValidationException(f"unknown function: {name}") from None


def get_spec(name: str) -> NamedFunctionSpec:
    try:
        return _specs[name]
    except KeyError:
        raise ValidationException(f"unknown function: {name}") from None


def is_registered_call(e: sp.Basic) -> bool:
    """식이 등록된 이름 함수의 적용인지 여부"""
    return isinstance(e, sp.Function) and type(e).__name__ in _classes


def evaluate_named(name: str, value: complex) -> complex:
    """스칼라 인자에 대한 등록 함수 값"""
    out = get_spec(name).evaluator(np.asarray(value))
    return complex(np.asarray(out).item())


def numpy_namespace() -> dict[str, Evaluator]:
    """lambdify용 모듈 딕셔너리"""
    with _lock:
        return {name: spec.evaluator for name, spec in _specs.items()}
