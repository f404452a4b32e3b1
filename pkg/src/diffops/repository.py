"""DiffOp Repository - (α, ħ 차수, 식) 삼중항 텍스트 형식

    kind = diffop
    name = laplacian[one]
    order = 2
    weight = one
    term.2.0.0 = 1
    term.0.2.0 = 1
"""

from pathlib import Path

import sympy as sp

from src.diffops.schemas import DiffOp, MultiIndex
from src.expr.serialize import from_sexpr, to_sexpr
from src.symbols.repository import parse_lines
from src.symbols.weights import get_weight
from src.shared.exceptions import ValidationException


def dump_diffop(P: DiffOp) -> str:
    lines = [
        "kind = diffop",
        f"name = {P.name}",
        f"order = {P.order}",
        f"weight = {P.weight.name}",
    ]
    for (a0, a1), j, p in P.triples():
        lines.append(f"term.{a0}.{a1}.{j} = {to_sexpr(p)}")
    return "\n".join(lines) + "\n"


def load_diffop(text: str) -> DiffOp:
    fields = parse_lines(text)
    if fields.get("kind") != "diffop":
        raise ValidationException("not a diffop document", details={"kind": fields.get("kind")})
    weight = get_weight(fields["weight"])

    layers: dict[MultiIndex, dict[int, sp.Expr]] = {}
    for key, value in fields.items():
        if not key.startswith("term."):
            continue
        try:
            a0, a1, j = (int(x) for x in key.split(".")[1:])
        except ValueError:
            raise ValidationException("malformed term key", details={"key": key}) from None
        layers.setdefault((a0, a1), {})[j] = from_sexpr(value)

    coeffs = {
        alpha: tuple(by_degree.get(j, sp.Integer(0)) for j in range(max(by_degree) + 1))
        for alpha, by_degree in layers.items()
    }
    return DiffOp(name=fields.get("name", "P"), order=int(fields["order"]), coeffs=coeffs, weight=weight)


class DiffOpRepository:
    """디렉터리 기반 미분연산자 저장소"""

    def __init__(self, root: Path | str):
        self.root = Path(root)

    def save(self, key: str, P: DiffOp) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.root / f"{key}.diffop"
        path.write_text(dump_diffop(P), encoding="utf-8")
        return path

    def load(self, key: str) -> DiffOp:
        path = self.root / f"{key}.diffop"
        if not path.exists():
            raise ValidationException(f"no such operator: {key}", details={"path": str(path)})
        return load_diffop(path.read_text(encoding="utf-8"))
