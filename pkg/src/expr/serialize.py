"""Expr의 s-expression 텍스트 직렬화

형식 (완전 괄호):
    (add a b ...) (mul a b ...) (pow base exp) (exp x) (log x) (sin x) (cos x)
    (fn name x) (rat p q) 정수, 실수 리터럴, I, pi, E, 변수 이름
"""

import re

import sympy as sp

from src.expr import registry
from src.expr.variables import BY_NAME
from src.shared.exceptions import ValidationException

_TOKEN = re.compile(r"\(|\)|[^\s()]+")
_UNARY = {"exp": sp.exp, "log": sp.log, "sin": sp.sin, "cos": sp.cos}


def to_sexpr(e: sp.Basic) -> str:
    """Expr → 텍스트"""
    if e.is_Symbol:
        return str(e.name)
    if e is sp.I:
        return "I"
    if e is sp.pi:
        return "pi"
    if e is sp.E:
        return "E"
    if e.is_Integer:
        return str(int(e))
    if e.is_Rational:
        return f"(rat {int(e.p)} {int(e.q)})"
    if e.is_Float:
        return repr(float(e))
    if isinstance(e, sp.Add):
        return "(add " + " ".join(to_sexpr(a) for a in e.args) + ")"
    if isinstance(e, sp.Mul):
        return "(mul " + " ".join(to_sexpr(a) for a in e.args) + ")"
    if isinstance(e, sp.Pow):
        return f"(pow {to_sexpr(e.base)} {to_sexpr(e.exp)})"
    for name, cls in _UNARY.items():
        if isinstance(e, cls):
            return f"({name} {to_sexpr(e.args[0])})"
    if registry.is_registered_call(e):
        return f"(fn {type(e).__name__} {to_sexpr(e.args[0])})"
    raise ValidationException(f"cannot serialize node: {type(e).__name__}")


def from_sexpr(text: str) -> sp.Expr:
    """텍스트 → Expr"""
    tokens = _TOKEN.findall(text)
    if not tokens:
        raise ValidationException("empty expression")
    expr, pos = _parse(tokens, 0)
    if pos != len(tokens):
        raise ValidationException("trailing tokens in expression", details={"at": pos})
    return expr


def _parse(tokens: list[str], pos: int) -> tuple[sp.Expr, int]:
    tok = tokens[pos]
    if tok == ")":
        raise ValidationException("unexpected ')'", details={"at": pos})
    if tok != "(":
        return _atom(tok), pos + 1

    head = tokens[pos + 1]
    pos += 2
    if head == "fn":
        name = tokens[pos]
        arg, pos = _parse(tokens, pos + 1)
        return registry.get_function(name)(arg), _close(tokens, pos)
    if head == "rat":
        value = sp.Rational(int(tokens[pos]), int(tokens[pos + 1]))
        return value, _close(tokens, pos + 2)

    args: list[sp.Expr] = []
    while pos < len(tokens) and tokens[pos] != ")":
        arg, pos = _parse(tokens, pos)
        args.append(arg)
    pos = _close(tokens, pos)

    if head == "add":
        return sp.Add(*args), pos
    if head == "mul":
        return sp.Mul(*args), pos
    if head == "pow" and len(args) == 2:
        return sp.Pow(args[0], args[1]), pos
    if head in _UNARY and len(args) == 1:
        return _UNARY[head](args[0]), pos
    raise ValidationException(f"malformed form: {head}")


def _close(tokens: list[str], pos: int) -> int:
    if pos >= len(tokens) or tokens[pos] != ")":
        raise ValidationException("missing ')'", details={"at": pos})
    return pos + 1


def _atom(tok: str) -> sp.Expr:
    if tok in BY_NAME:
        return BY_NAME[tok]
    if tok == "I":
        return sp.I
    if tok == "pi":
        return sp.pi
    if tok == "E":
        return sp.E
    try:
        return sp.Integer(int(tok))
    except ValueError:
        pass
    try:
        return sp.Float(float(tok))
    except ValueError:
        raise ValidationException(f"unknown token: {tok}") from None
