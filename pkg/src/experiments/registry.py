"""실험 목록 - 설명, 확인하는 주장, 판정 기준, 기본 설정"""

import json
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from src.experiments.schemas import ExperimentConfig, parse_config_text
from src.shared.exceptions import ValidationException


class ExperimentSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    description: str
    anchor: str
    thresholds: dict[str, float]
    defaults: dict[str, Any] = Field(default_factory=dict)


EXPERIMENTS: tuple[ExperimentSpec, ...] = (
    ExperimentSpec(
        name="residual-scaling",
        description="parametrix residual ‖(z−P)Op¹(b)u − u‖/‖u‖ against ħ for N = 0..N",
        anchor="resolvent remainder is O(ħ^∞): slope ≥ N + 0.8",
        thresholds={"max_residual": 1e-9, "slope_margin": 0.8},
    ),
    ExperimentSpec(
        name="l2-bound",
        description="operator norms of order-0 symbols against seminorms, quantization relations",
        anchor="Op^t(a) bounded on L² by a symbol seminorm",
        thresholds={"cv_ratio": 2.0, "t_relation": 1e-8, "adjoint_relation": 1e-8, "weyl_symmetry": 1e-8},
        defaults={"weight": "sqrt1pr2", "n_r": 128, "n_theta": 16, "r_length": 32.0, "r_origin": -16.0, "hbars": [0.125]},
    ),
    ExperimentSpec(
        name="block-decay",
        description="‖ψ_j Op(a) ψ_k‖ over |j−k| ≤ 5 for a momentum-localized symbol",
        anchor="almost orthogonality ⟨j−k⟩^{−N}: exponent ≥ 2",
        thresholds={"decay_exponent": 2.0, "identity_off_diagonal": 0.0},
        defaults={"weight": "one", "n_r": 64, "n_theta": 32, "r_length": 10.0, "r_origin": -2.0, "hbars": [0.125]},
    ),
    ExperimentSpec(
        name="scaling-identity",
        description="Θ_* ψ_j Op^t(a) ψ_k Θ^* = ψ_j Op^t(Θ̃_* a) ψ_k by direct quadrature",
        anchor="scaling conjugation identity",
        thresholds={"defect": 1e-6},
        defaults={"weight": "exp-windowed", "hbars": [0.25]},
    ),
    ExperimentSpec(
        name="chart-transfer",
        description="φ_*Op¹(a)φ^* against Op¹(a_φ,0) under a Möbius arc map, and the two-chart atlas",
        anchor="change of angular coordinates is leading order plus O(ħ): ratio in [0.35, 0.65]",
        thresholds={"ratio_min": 0.35, "ratio_max": 0.65},
        defaults={"weight": "one", "n_r": 64, "n_theta": 128, "r_length": 16.0, "r_origin": -8.0, "hbars": [0.125, 0.0625]},
    ),
    ExperimentSpec(
        name="selfadjoint",
        description="symmetry, ‖R_±i‖ per ħ, Neumann inversion and the cutoff commutator",
        anchor="essential self-adjointness: ‖R‖ < 1 and commutator O(δ)",
        thresholds={"symmetry_defect": 1e-8, "residual_norm": 1.0, "neumann_residual": 1e-3, "commutator_slope": 0.8},
        defaults={"n_r": 64, "n_theta": 16, "N": 1, "fields": 2, "trials": 1, "iters": 15, "neumann_terms": 8},
    ),
    ExperimentSpec(
        name="expr-selftest",
        description="finite-difference check of the 20-expression corpus and mixed partials",
        anchor="closed symbolic differentiation",
        thresholds={"fd_rel_err": 1e-6, "fd_passes": 20, "mixed_partials": 1e-10},
        defaults={"hbars": [0.25]},
    ),
)

_BY_NAME = {spec.name: spec for spec in EXPERIMENTS}


def get_experiment(name: str) -> ExperimentSpec:
    spec = _BY_NAME.get(name)
    if spec is None:
        raise ValidationException(f"unknown experiment: {name}", details={"choices": list(_BY_NAME)})
    return spec


def build_config(name: str, text: str = "", overrides: dict[str, str] | None = None) -> ExperimentConfig:
    """실험 기본값 → 설정 파일 → 명령행 덮어쓰기 순으로 병합"""
    spec = get_experiment(name)
    values: dict[str, Any] = {**spec.defaults, **parse_config_text(text), **(overrides or {})}
    if values.setdefault("experiment", name) != name:
        raise ValidationException(
            "config names a different experiment",
            details={"config": values["experiment"], "command": name},
        )
    return ExperimentConfig.from_mapping(values)


def list_experiments() -> list[dict[str, str]]:
    return [{"name": s.name, "description": s.description, "anchor": s.anchor} for s in EXPERIMENTS]


def render_table(as_json: bool = False) -> str:
    rows = list_experiments()
    if as_json:
        return json.dumps(rows, ensure_ascii=False, indent=2)
    width = max(len(r["name"]) for r in rows)
    lines = [f"{'experiment'.ljust(width)}  description  [claim]"]
    lines += [f"{r['name'].ljust(width)}  {r['description']}  [{r['anchor']}]" for r in rows]
    return "\n".join(lines)
