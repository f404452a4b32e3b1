"""커스텀 예외 정의"""

from typing import Any


class CalcException(Exception):
    """계산 라이브러리 기본 예외"""

    def __init__(
        self,
        message: str,
        exit_code: int = 1,
        details: dict[str, Any] | None = None,
    ):
        self.message = message
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)

    def one_line(self) -> str:
        """CLI 진단용 한 줄 메시지"""
        if not self.details:
            return self.message
        extra = ", ".join(f"{k}={v}" for k, v in self.details.items())
        return f"{self.message} ({extra})"


class ValidationException(CalcException):
    """유효성 검사 실패"""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message=message, exit_code=2, details=details)


class MissingDerivativeRuleException(CalcException):
    """등록된 함수 노드에 미분 규칙이 없음"""

    def __init__(self, name: str):
        super().__init__(
            message=f"missing derivative rule: {name}",
            exit_code=3,
            details={"function": name},
        )


class SingularEvaluationException(CalcException):
    """0으로 나누기 또는 비양수 실수의 log"""

    def __init__(self, node: str, location: dict[str, Any] | None = None):
        details: dict[str, Any] = {"node": node}
        if location:
            details["location"] = location
        super().__init__(message="singular evaluation", exit_code=3, details=details)
        self.node = node
        self.location = location or {}


class GridException(CalcException):
    """격자 불일치 또는 격자 제약 위반"""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message=f"grid error: {message}", exit_code=4, details=details)


class QuadratureResolutionException(CalcException):
    """직접 구적법에서 위상이 충분히 샘플되지 않음"""

    def __init__(self, phase_step: float):
        super().__init__(
            message="quadrature phase undersampled",
            exit_code=4,
            details={"max_phase_step": round(phase_step, 6)},
        )


class NotDiffeomorphismException(CalcException):
    """각도 좌표 변환의 도함수가 양수가 아님"""

    def __init__(self, name: str, location: float):
        super().__init__(
            message=f"not a diffeomorphism: {name}",
            exit_code=5,
            details={"theta": location},
        )


class EllipticityException(CalcException):
    """z가 심볼 값 범위에 너무 가까움"""

    def __init__(self, z: complex, worst_sample: dict[str, float]):
        super().__init__(
            message="z too close to symbol range",
            exit_code=5,
            details={"z": z, "worst_sample": worst_sample},
        )


class CoefficientClassException(CalcException):
    """계수가 B_f 클래스 검사를 통과하지 못함"""

    def __init__(self, name: str, location: dict[str, float] | None = None):
        super().__init__(
            message=f"coefficient outside B_f class: {name}",
            exit_code=5,
            details={"location": location or {}},
        )


class SeriesTooDeepException(CalcException):
    """파라메트릭스 항의 표현식 크기가 노드 한도를 초과"""

    def __init__(self, achieved_n: int, nodes: int, budget: int):
        super().__init__(
            message="series too deep",
            exit_code=6,
            details={"achieved_n": achieved_n, "nodes": nodes, "budget": budget},
        )
        self.achieved_n = achieved_n
