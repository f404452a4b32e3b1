"""Experiment Service - 실험별 측정과 판정"""

import logging
import math
import time
from collections.abc import Callable

import numpy as np
import sympy as sp

from src.diffops.corpus import operator_corpus
from src.diffops.schemas import DiffOp
from src.expr.corpus import build_corpus, mixed_partial_defect, run_corpus
from src.expr.variables import eta, r, rho, theta
from src.experiments.registry import get_experiment
from src.experiments.schemas import ExperimentConfig, ExperimentResult, PlotSeries
from src.parametrix.atlas import atlas_report
from src.parametrix.residual import residual_report
from src.parametrix.selfadjoint import cutoff_commutator, selfadjoint_pipeline
from src.parametrix.service import build_parametrix, cancellation_flags
from src.quantize.charts import chart_transfer_defect
from src.quantize.corpus import symbol_corpus
from src.quantize.fields import random_fields, semiclassical_field
from src.quantize.scaling import default_window, gaussian_window_field, scaling_defect, scaling_map
from src.quantize.schemas import Grid, HalfDensityField
from src.quantize.service import (
    QuantizedOperator,
    block_norm_table,
    inner,
    l2_norm,
    quantized_norm,
)
from src.symbols.diffeos import mobius
from src.symbols.schemas import Symbol
from src.symbols.service import seminorm_estimate, window_for
from src.symbols.weights import get_weight, japanese_bracket
from src.shared.parallel import parallel_map

logger = logging.getLogger(__name__)

Runner = Callable[[ExperimentConfig], ExperimentResult]

SCALING_CASES = ((2, 2, 1.0), (1, 3, 0.0), (2, 3, 0.5))
MOBIUS_KAPPA = 1.5


# ==================== 공통 ====================


def grid_for(config: ExperimentConfig, hbar: float) -> Grid:
    return Grid(
        r_origin=config.r_origin,
        r_length=config.r_length,
        n_r=config.n_r,
        n_theta=config.n_theta,
        hbar=hbar,
    )


def operator_for(config: ExperimentConfig) -> DiffOp:
    corpus = dict(operator_corpus(config.weight, nonconstant_h=config.metric == "cosine"))
    return corpus[config.operator]


def pairing_defect(
    forward: Callable[[HalfDensityField], HalfDensityField],
    backward: Callable[[HalfDensityField], HalfDensityField],
    fields: list[HalfDensityField],
) -> float:
    """max |⟨Au, v⟩ − ⟨u, Bv⟩| / (‖u‖‖v‖)"""
    images = [forward(u) for u in fields]
    pulled = [backward(v) for v in fields]
    worst = 0.0
    for a, u in enumerate(fields):
        for b, v in enumerate(fields):
            gap = abs(inner(images[a], v) - inner(u, pulled[b]))
            worst = max(worst, gap / max(l2_norm(u) * l2_norm(v), 1e-300))
    return worst


def _result(config: ExperimentConfig, **kwargs) -> ExperimentResult:
    spec = get_experiment(config.experiment)
    return ExperimentResult(experiment=config.experiment, thresholds=spec.thresholds, **kwargs)


# ==================== residual-scaling ====================


def run_residual_scaling(config: ExperimentConfig) -> ExperimentResult:
    thresholds = get_experiment(config.experiment).thresholds
    P = operator_for(config)
    built = build_parametrix(P, config.z, config.N)
    base = grid_for(config, config.hbars[0])

    def fields(grid: Grid) -> list[HalfDensityField]:
        return random_fields(grid, config.seed, config.fields)

    reports = [
        residual_report(P, built.series.truncated(n), config.z, base, config.hbars, fields, config.t)
        for n in range(built.achieved_n + 1)
    ]
    rows = [
        [report.N, h, index, value]
        for report in reports
        for h, values in zip(report.hbars, report.residuals)
        for index, value in enumerate(values)
    ]
    max_residual = max(max(report.worst) for report in reports)

    checks: dict[str, bool] = {}
    if config.operator == "constant":
        checks["max_residual"] = max_residual <= thresholds["max_residual"]
    else:
        for report in reports:
            slope = report.slope
            checks[f"slope_N{report.N}"] = slope is not None and slope >= report.N + thresholds["slope_margin"]

    corpus = operator_corpus(config.weight, nonconstant_h=config.metric == "cosine")
    cancellation = {}
    for name, Q in corpus:
        series = build_parametrix(Q, config.z, config.N).series
        cancellation[name] = cancellation_flags(Q, series, config.z)
    checks["cancellation"] = all(all(flags) for flags in cancellation.values())

    return _result(
        config,
        columns=["N", "hbar", "field", "residual"],
        rows=rows,
        metrics={
            "operator": P.name,
            "achieved_n": built.achieved_n,
            "nodes": built.nodes,
            "slopes": {report.N: report.slope for report in reports},
            "fit_residuals": {report.N: report.fit_residual for report in reports},
            "max_residual": max_residual,
            "cancellation": cancellation,
        },
        checks=checks,
        plot=[PlotSeries(label=f"N={report.N}", xs=report.hbars, ys=report.worst) for report in reports],
        x_label="hbar",
        y_label="relative residual",
    )


# ==================== l2-bound ====================


def run_l2_bound(config: ExperimentConfig) -> ExperimentResult:
    thresholds = get_experiment(config.experiment).thresholds
    weight = get_weight(config.weight)
    grid = grid_for(config, config.hbars[0])
    window = window_for(weight, r_min=grid.r_origin, r_max=grid.r_end)

    def measure(item: tuple[str, Symbol]) -> list:
        name, a = item
        norm = quantized_norm(a, config.t, grid, config.trials, config.iters, config.seed)
        semi = seminorm_estimate(a, 2, window)
        return [name, norm, semi, norm / max(semi, 1e-300)]

    rows = [measure(item) for item in symbol_corpus(weight)]
    worst_ratio = max(row[3] for row in rows)

    fields = random_fields(grid, config.seed, config.fields)
    r_rho = Symbol(expr=r * rho, order=1.0, weight=weight)
    left, right = QuantizedOperator(r_rho, 1.0, grid), QuantizedOperator(r_rho, 0.0, grid)
    t_relation = max(
        l2_norm(left.apply(u) - right.apply(u) - u.scaled(1j * grid.hbar)) / l2_norm(u) for u in fields
    )

    amplitude = sp.exp(-(rho**2 + eta**2)) * (2 + sp.sin(r)) / 3
    complex_op = QuantizedOperator(Symbol(expr=(1 + sp.I * rho / 2) * amplitude, order=0.0, weight=weight), config.t, grid)
    adjoint_relation = pairing_defect(complex_op.apply, complex_op.adjoint().apply, fields)

    weyl = QuantizedOperator(Symbol(expr=(rho + eta**2) * amplitude, order=0.0, weight=weight), 0.5, grid)
    weyl_symmetry = pairing_defect(weyl.apply, weyl.apply, fields)

    checks = {
        "cv_ratio": worst_ratio <= thresholds["cv_ratio"],
        "t_relation": t_relation <= thresholds["t_relation"],
        "adjoint_relation": adjoint_relation <= thresholds["adjoint_relation"],
        "weyl_symmetry": weyl_symmetry <= thresholds["weyl_symmetry"],
    }
    return _result(
        config,
        columns=["symbol", "norm", "seminorm", "ratio"],
        rows=rows,
        metrics={
            "hbar": grid.hbar,
            "t": config.t,
            "cv_constant": worst_ratio,
            "t_relation": t_relation,
            "adjoint_relation": adjoint_relation,
            "weyl_symmetry": weyl_symmetry,
        },
        checks=checks,
        plot=[PlotSeries(label="|Op(a)|", xs=[row[2] for row in rows], ys=[row[1] for row in rows])],
        x_label="seminorm N=2",
        y_label="operator norm",
    )


# ==================== block-decay ====================


def run_block_decay(config: ExperimentConfig) -> ExperimentResult:
    thresholds = get_experiment(config.experiment).thresholds
    weight = get_weight(config.weight)
    grid = grid_for(config, config.hbars[0])
    centers = list(range(config.blocks))
    bump = Symbol(expr=sp.exp(-4 * (rho**2 + eta**2)) * (2 + sp.sin(r)) / 3, order=0.0, weight=weight)
    identity = Symbol(expr=sp.Integer(1), order=0.0, weight=weight)

    tables = {
        "bump": block_norm_table(bump, config.t, grid, centers, centers, config.trials, config.iters, config.seed),
        "identity": block_norm_table(identity, config.t, grid, centers, centers, config.trials, config.iters, config.seed),
    }
    rows = [
        [label, j, k, abs(j - k), table.norms[a][b]]
        for label, table in tables.items()
        for a, j in enumerate(table.j_values)
        for b, k in enumerate(table.k_values)
    ]
    exponent = tables["bump"].decay_exponent
    off_diagonal = max(
        (row[4] for row in rows if row[0] == "identity" and row[3] >= 2),
        default=0.0,
    )
    by_distance = tables["bump"].by_distance()
    checks = {
        "decay_exponent": exponent is not None and exponent >= thresholds["decay_exponent"],
        "identity_off_diagonal": off_diagonal == thresholds["identity_off_diagonal"],
    }
    return _result(
        config,
        columns=["symbol", "j", "k", "distance", "norm"],
        rows=rows,
        metrics={
            "hbar": grid.hbar,
            "decay_exponent": exponent,
            "by_distance": by_distance,
            "identity_off_diagonal_max": off_diagonal,
        },
        checks=checks,
        plot=[
            PlotSeries(
                label="max block norm",
                xs=[math.sqrt(1 + d**2) for d in by_distance],
                ys=list(by_distance.values()),
            )
        ],
        x_label="<j-k>",
        y_label="block norm",
    )


# ==================== scaling-identity ====================


def run_scaling_identity(config: ExperimentConfig) -> ExperimentResult:
    thresholds = get_experiment(config.experiment).thresholds
    weight = get_weight(config.weight)
    window = default_window()
    hbar = config.hbars[0]
    a = Symbol(
        expr=sp.exp(-(rho**2 + (eta / weight.expr) ** 2)) * (1 + sp.cos(theta) / 2),
        order=0.0,
        weight=weight,
    )

    def measure(case: tuple[int, int, float]) -> list:
        j, k, t = case
        smap = scaling_map(weight, j, k, t)
        u = gaussian_window_field(window, r_center=float(k))
        return [j, k, t, smap.factor, scaling_defect(a, smap, u, hbar)]

    rows = parallel_map(measure, SCALING_CASES)
    worst = max(row[4] for row in rows)
    return _result(
        config,
        columns=["j", "k", "t", "factor", "defect"],
        rows=rows,
        metrics={"hbar": hbar, "max_defect": worst},
        checks={"defect": worst <= thresholds["defect"]},
    )


# ==================== chart-transfer ====================


def run_chart_transfer(config: ExperimentConfig) -> ExperimentResult:
    thresholds = get_experiment(config.experiment).thresholds
    weight = get_weight(config.weight)
    phi = mobius(MOBIUS_KAPPA)
    a = Symbol(
        expr=(2 + sp.cos(theta)) / 3 * eta * sp.exp(-(rho**2 + eta**2) / 4),
        order=0.0,
        weight=weight,
    )
    mid = config.r_origin + config.r_length / 2
    centers = [2 * math.pi * i / config.fields for i in range(config.fields)]

    def fields(grid: Grid) -> list[HalfDensityField]:
        return [semiclassical_field(grid, mid, c, eta0=1.0) for c in centers]

    def sweep(h: float) -> list[float]:
        return [chart_transfer_defect(a, phi, u) for u in fields(grid_for(config, h))]

    chart = parallel_map(sweep, config.hbars)
    chart_worst = [max(row) for row in chart]
    atlas = atlas_report(a, phi, grid_for(config, config.hbars[0]), config.hbars, fields)

    rows = [
        [kind, h, index, value]
        for kind, table in (("chart", chart), ("atlas", atlas.discrepancies))
        for h, values in zip(config.hbars, table)
        for index, value in enumerate(values)
    ]
    ratio = chart_worst[1] / chart_worst[0] if len(chart_worst) > 1 and chart_worst[0] > 0 else None
    decreasing = len(atlas.worst) > 1 and all(later < earlier for earlier, later in zip(atlas.worst, atlas.worst[1:]))
    checks = {
        "chart_ratio": ratio is not None and thresholds["ratio_min"] <= ratio <= thresholds["ratio_max"],
        "atlas_decreasing": decreasing,
    }
    return _result(
        config,
        columns=["kind", "hbar", "field", "defect"],
        rows=rows,
        metrics={
            "chart": phi.name,
            "C": chart_worst[0] / config.hbars[0],
            "ratio": ratio,
            "chart_worst": chart_worst,
            "atlas_worst": atlas.worst,
        },
        checks=checks,
        plot=[
            PlotSeries(label="chart transfer", xs=config.hbars, ys=chart_worst),
            PlotSeries(label="atlas", xs=config.hbars, ys=atlas.worst),
        ],
        x_label="hbar",
        y_label="relative defect",
    )


# ==================== selfadjoint ====================


def run_selfadjoint(config: ExperimentConfig) -> ExperimentResult:
    thresholds = get_experiment(config.experiment).thresholds
    P = operator_for(config)
    plus = build_parametrix(P, 1j, config.N).series
    minus = build_parametrix(P, -1j, config.N).series
    base = grid_for(config, config.hbars[0])

    def fields(grid: Grid) -> list[HalfDensityField]:
        return random_fields(grid, config.seed, config.fields)

    report = selfadjoint_pipeline(
        P, plus, minus, base, config.hbars, fields,
        K=config.neumann_terms, trials=config.trials, iters=config.iters, seed=config.seed,
    )
    commutator_grid = Grid(
        r_origin=-config.commutator_r_length / 2,
        r_length=config.commutator_r_length,
        n_r=config.commutator_n_r,
        n_theta=config.commutator_n_theta,
        hbar=config.hbars[0],
    )
    commutator = cutoff_commutator(P, plus, 1j, commutator_grid, config.deltas)

    smallest = int(np.argmin(report.hbars))
    rows: list[list] = [["symmetry_defect", 0, report.symmetry_defect]]
    rows += [["norm_plus", h, v] for h, v in zip(report.hbars, report.norms_plus)]
    rows += [["norm_minus", h, v] for h, v in zip(report.hbars, report.norms_minus)]
    for trace, label in zip(report.neumann, ("neumann_plus", "neumann_minus")):
        rows += [[label, k, v] for k, v in enumerate(trace.residuals)]
    rows += [["commutator", d, v] for d, v in zip(commutator.deltas, commutator.values)]

    checks = {
        "symmetry_defect": report.symmetry_defect <= thresholds["symmetry_defect"],
        "residual_norm": max(report.norms_plus[smallest], report.norms_minus[smallest]) < thresholds["residual_norm"],
        "neumann_residual": all(trace.final <= thresholds["neumann_residual"] for trace in report.neumann),
        "commutator_slope": commutator.slope is not None and commutator.slope >= thresholds["commutator_slope"],
    }
    return _result(
        config,
        columns=["quantity", "x", "value"],
        rows=rows,
        metrics={
            "operator": P.name,
            "symmetry_defect": report.symmetry_defect,
            "hbar0": report.hbar0,
            "neumann_final": [trace.final for trace in report.neumann],
            "neumann_hbar": report.neumann[0].hbar if report.neumann else None,
            "commutator_slope": commutator.slope,
        },
        checks=checks,
        plot=[
            PlotSeries(label="|R+|", xs=report.hbars, ys=report.norms_plus),
            PlotSeries(label="|R-|", xs=report.hbars, ys=report.norms_minus),
        ],
        x_label="hbar",
        y_label="residual operator norm",
    )


# ==================== expr-selftest ====================


def run_expr_selftest(config: ExperimentConfig) -> ExperimentResult:
    thresholds = get_experiment(config.experiment).thresholds
    cases = build_corpus(japanese_bracket)
    reports = run_corpus(cases)
    rows = [
        [name, v, rep.symbolic.real, rep.symbolic.imag, rep.numeric.real, rep.numeric.imag, rep.rel_err]
        for (name, rep), (_, _, v, _) in zip(reports, cases)
    ]
    passes = sum(rep.rel_err <= thresholds["fd_rel_err"] for _, rep in reports)
    mixed = mixed_partial_defect(cases, samples=100, seed=config.seed)
    return _result(
        config,
        columns=["name", "variable", "symbolic_re", "symbolic_im", "numeric_re", "numeric_im", "rel_err"],
        rows=rows,
        metrics={"fd_passes": passes, "cases": len(cases), "mixed_partials": mixed},
        checks={
            "fd_passes": passes >= thresholds["fd_passes"],
            "mixed_partials": mixed <= thresholds["mixed_partials"],
        },
    )


RUNNERS: dict[str, Runner] = {
    "residual-scaling": run_residual_scaling,
    "l2-bound": run_l2_bound,
    "block-decay": run_block_decay,
    "scaling-identity": run_scaling_identity,
    "chart-transfer": run_chart_transfer,
    "selfadjoint": run_selfadjoint,
    "expr-selftest": run_expr_selftest,
}


def run(config: ExperimentConfig) -> ExperimentResult:
    """설정 하나를 실행하고 판정까지 채운 결과 반환"""
    logger.info(f"running {config.experiment}")
    started = time.perf_counter()
    result = RUNNERS[config.experiment](config)
    elapsed = time.perf_counter() - started
    failed = [name for name, ok in result.checks.items() if not ok]
    if failed:
        logger.warning(f"{config.experiment}: failed checks {failed} ({elapsed:.1f}s)")
    else:
        logger.info(f"{config.experiment}: all checks passed ({elapsed:.1f}s)")
    return result
