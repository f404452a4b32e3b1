"""Symbol Repository - 심볼/심볼 급수의 텍스트 저장

형식: `key = value` 헤더 줄 다음에 s-expression 식 줄.

    kind = symbol
    order = -2.0
    weight = sqrt1pr2
    t = 1.0
    z = (-1+0j)
    expr = (pow (add z (mul -1 (pow rho 2))) -1)
"""

from pathlib import Path

from src.expr.serialize import from_sexpr, to_sexpr
from src.symbols.schemas import Symbol, SymbolSeries
from src.symbols.weights import get_weight
from src.shared.exceptions import ValidationException


def parse_lines(text: str) -> dict[str, str]:
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValidationException("malformed header line", details={"line": lineno})
        fields[key.strip()] = value.strip()
    return fields


def _optional_complex(value: str | None) -> complex | None:
    if value is None or value == "none":
        return None
    return complex(value)


def dump_symbol(a: Symbol, t: float = 1.0) -> str:
    lines = [
        "kind = symbol",
        f"order = {a.order!r}",
        f"weight = {a.weight.name}",
        f"t = {t!r}",
        f"z = {a.z!r}" if a.z is not None else "z = none",
        f"expr = {to_sexpr(a.expr)}",
    ]
    return "\n".join(lines) + "\n"


def load_symbol(text: str) -> Symbol:
    fields = parse_lines(text)
    if fields.get("kind") != "symbol":
        raise ValidationException("not a symbol document", details={"kind": fields.get("kind")})
    weight = get_weight(fields["weight"])
    return Symbol(
        expr=from_sexpr(fields["expr"]),
        order=float(fields["order"]),
        weight=weight,
        z=_optional_complex(fields.get("z")),
    )


def dump_series(series: SymbolSeries) -> str:
    lines = [
        "kind = series",
        f"N = {series.N}",
        f"weight = {series.weight.name}",
        f"t = {series.t!r}",
        f"z = {series.z!r}" if series.z is not None else "z = none",
    ]
    for j, (term, order) in enumerate(zip(series.terms, series.orders)):
        lines.append(f"order.{j} = {order!r}")
        lines.append(f"term.{j} = {to_sexpr(term)}")
    return "\n".join(lines) + "\n"


def load_series(text: str) -> SymbolSeries:
    fields = parse_lines(text)
    if fields.get("kind") != "series":
        raise ValidationException("not a series document", details={"kind": fields.get("kind")})
    weight = get_weight(fields["weight"])
    n = int(fields["N"])
    try:
        terms = tuple(from_sexpr(fields[f"term.{j}"]) for j in range(n + 1))
        orders = tuple(float(fields[f"order.{j}"]) for j in range(n + 1))
    except KeyError as exc:
        raise ValidationException("series document is missing a term", details={"key": str(exc)}) from None
    return SymbolSeries(
        terms=terms,
        orders=orders,
        weight=weight,
        z=_optional_complex(fields.get("z")),
        t=float(fields["t"]),
    )


class SymbolRepository:
    """디렉터리 기반 심볼 저장소"""

    def __init__(self, root: Path | str):
        self.root = Path(root)

    def save_series(self, name: str, series: SymbolSeries) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.root / f"{name}.series"
        path.write_text(dump_series(series), encoding="utf-8")
        return path

    def load_series(self, name: str) -> SymbolSeries:
        return load_series((self.root / f"{name}.series").read_text(encoding="utf-8"))

    def save_symbol(self, name: str, a: Symbol) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.root / f"{name}.symbol"
        path.write_text(dump_symbol(a), encoding="utf-8")
        return path

    def load_symbol(self, name: str) -> Symbol:
        return load_symbol((self.root / f"{name}.symbol").read_text(encoding="utf-8"))
