"""파라메트릭스 테스트 - 합성, 재귀, 잔차, 자기수반성, 아틀라스"""

import math

import numpy as np
import pytest
import sympy as sp

from src.config import get_settings
from src.diffops.corpus import radial_bump
from src.diffops.schemas import DiffOp
from src.diffops.service import principal_symbol, radial_schrodinger, shifted
from src.expr.service import is_zero
from src.expr.variables import eta, r, rho, theta
from src.parametrix.atlas import atlas_discrepancy, chart_cutoff, chart_weights, identity_arc_weight
from src.parametrix.residual import fit_slope, residual_norm, residual_report
from src.parametrix.selfadjoint import (
    ResidualOperator,
    band_projector,
    cutoff_commutator,
    neumann_trace,
    smooth_cutoff,
    symmetry_defect,
)
from src.parametrix.service import (
    build_parametrix,
    cancellation_flags,
    compose_diffop_symbol,
    defect_coefficients,
    leading_term_holds,
)
from src.quantize.fields import random_fields
from src.quantize.schemas import Grid
from src.quantize.service import inner, l2_norm
from src.symbols import diffeos
from src.symbols.schemas import Symbol
from src.shared.exceptions import (
    CoefficientClassException,
    EllipticityException,
    SeriesTooDeepException,
    ValidationException,
)


@pytest.fixture
def radial_operator(weight_one):
    """(ħD_r)² + e^{−r²}/2"""
    return radial_schrodinger(weight_one, radial_bump())


# ──────────────────────────────────────────────
# 합성
# ──────────────────────────────────────────────
class TestCompose:
    def test_radial_square_on_linear_symbol(self, weight_one):
        """(ρ + ħD_r)² r = ρ²r − 2iħρ"""
        P = DiffOp(order=2, coeffs={(2, 0): (sp.Integer(1),)}, weight=weight_one)
        series = compose_diffop_symbol(P, r)
        assert is_zero(series.terms[0] - rho**2 * r)
        assert is_zero(series.terms[1] + 2 * sp.I * rho)
        assert is_zero(series.terms[2])

    def test_leading_term(self, conic_laplacian, radial_operator):
        a = sp.exp(-(r**2)) * sp.cos(theta) * rho
        assert leading_term_holds(conic_laplacian, a)
        assert leading_term_holds(radial_operator, a)

    def test_with_z(self, flat_operator):
        a = sp.exp(-(r**2))
        series = compose_diffop_symbol(flat_operator, a, z=-1)
        sigma = principal_symbol(flat_operator).expr
        assert is_zero(series.terms[0] - (-1 - sigma) * a)
        assert series.z == -1


# ──────────────────────────────────────────────
# 재귀
# ──────────────────────────────────────────────
class TestBuildParametrix:
    def test_constant_coefficients(self, flat_operator):
        built = build_parametrix(flat_operator, -1, 2)
        assert built.achieved_n == 2
        assert is_zero(built.series.terms[0] - 1 / (-1 - rho**2 - eta**2))
        assert all(is_zero(b) for b in built.series.terms[1:])
        assert is_zero(built.remainder)

    def test_radial_cancellation(self, radial_operator):
        built = build_parametrix(radial_operator, -1, 2)
        assert cancellation_flags(radial_operator, built.series, -1) == [True, True, True]
        assert built.series.orders == (-2.0, -3.0, -4.0)

    def test_first_correction_matches_defect(self, radial_operator):
        """b₁ = −e₁(z − σ)⁻¹"""
        built = build_parametrix(radial_operator, -1, 1)
        b0 = built.series.terms[0]
        e1 = compose_diffop_symbol(radial_operator, b0, -1, order=-2.0).terms[1]
        assert is_zero(built.series.terms[1] + e1 * b0)

    def test_remainder_is_next_defect(self, radial_operator):
        built = build_parametrix(radial_operator, -1, 1)
        coefficients = defect_coefficients(radial_operator, built.series, -1)
        assert is_zero(coefficients[2] - built.remainder)

    @pytest.mark.slow
    def test_warped_laplacian_cancellation(self, conic_laplacian):
        built = build_parametrix(conic_laplacian, 1j, 2)
        assert all(cancellation_flags(conic_laplacian, built.series, 1j))

    def test_order_budget(self, flat_operator):
        with pytest.raises(ValidationException):
            build_parametrix(flat_operator, -1, 5)

    def test_not_elliptic(self, flat_operator):
        with pytest.raises(EllipticityException):
            build_parametrix(flat_operator, 1, 1)

    def test_unbounded_coefficient_rejected(self, flat_operator):
        """B_f 밖의 계수는 재귀 전에 거부"""
        P = shifted(flat_operator, sp.exp(r**2), name="growing")
        with pytest.raises(CoefficientClassException) as exc_info:
            build_parametrix(P, -1, 0)
        assert exc_info.value.exit_code == 5

    def test_node_budget(self, radial_operator, monkeypatch):
        monkeypatch.setattr(get_settings(), "node_budget", 5)
        with pytest.raises(SeriesTooDeepException) as exc_info:
            build_parametrix(radial_operator, -1, 2)
        assert exc_info.value.achieved_n == 0

    def test_partial_series(self, radial_operator, monkeypatch):
        monkeypatch.setattr(get_settings(), "node_budget", 5)
        built = build_parametrix(radial_operator, -1, 2, allow_partial=True)
        assert built.requested_n == 2
        assert built.achieved_n == 0


# ──────────────────────────────────────────────
# 잔차
# ──────────────────────────────────────────────
class TestResidual:
    def test_constant_operator_is_exact(self, flat_operator, square_grid):
        series = build_parametrix(flat_operator, -1, 0).series
        grid = square_grid.with_hbar(0.125)
        for u in random_fields(grid, seed=0, count=3):
            assert residual_norm(flat_operator, series, -1, u) <= 1e-9

    def test_radial_residual_shrinks_with_hbar(self, radial_operator, small_grid):
        series = build_parametrix(radial_operator, -1, 1).series
        report = residual_report(
            radial_operator, series, -1, small_grid, [0.125, 0.0625],
            lambda grid: random_fields(grid, seed=1, count=2),
        )
        assert report.worst[1] < report.worst[0]
        assert report.slope is not None and report.slope > 1.0

    def test_z_mismatch(self, flat_operator, small_grid):
        series = build_parametrix(flat_operator, -1, 0).series
        with pytest.raises(ValidationException):
            residual_report(flat_operator, series, 1j, small_grid, [0.125], lambda g: random_fields(g, 0, 1))

    def test_fit_slope(self):
        slope, fit_residual = fit_slope([1.0, 2.0, 4.0], [1.0, 4.0, 16.0])
        assert slope == pytest.approx(2.0)
        assert fit_residual == pytest.approx(0.0, abs=1e-20)
        assert fit_slope([1.0], [1.0]) == (None, None)


# ──────────────────────────────────────────────
# 자기수반성
# ──────────────────────────────────────────────
class TestSelfAdjoint:
    def test_laplacian_symmetry(self, conic_laplacian, small_fields):
        assert symmetry_defect(conic_laplacian, small_fields) <= 1e-8

    def test_band_projector_idempotent(self, small_grid, small_fields):
        project = band_projector(small_grid)
        once = project(small_fields[0].values)
        np.testing.assert_allclose(project(once), once, atol=1e-12)

    def test_residual_operator_adjoint(self, radial_operator, small_grid):
        series = build_parametrix(radial_operator, 1j, 1).series
        R = ResidualOperator(radial_operator, series, 1j, small_grid)
        u, v = random_fields(small_grid, seed=4, count=2)
        lhs, rhs = inner(R.apply(u), v), inner(u, R.adjoint(v))
        assert abs(lhs - rhs) <= 1e-10 * l2_norm(u) * l2_norm(v)

    def test_residual_norm_small_at_small_hbar(self, radial_operator, small_grid):
        series = build_parametrix(radial_operator, 1j, 1).series
        norm = ResidualOperator(radial_operator, series, 1j, small_grid.with_hbar(1 / 32)).norm(trials=1, iters=15)
        assert norm < 1.0

    def test_neumann_constant_operator(self, flat_operator, small_fields):
        series = build_parametrix(flat_operator, 1j, 0).series
        trace = neumann_trace(flat_operator, series, 1j, small_fields[0], K=3)
        assert len(trace.residuals) == 4
        assert trace.final <= 1e-10

    def test_neumann_converges(self, radial_operator, small_grid):
        """‖(z − P)w_K − u‖ 는 ‖R‖ 비율로 줄어 1e-3 아래로"""
        series = build_parametrix(radial_operator, -1j, 0).series
        R = ResidualOperator(radial_operator, series, -1j, small_grid)
        norm = R.norm(trials=2, iters=20)
        assert norm < 1.0
        u = random_fields(small_grid, seed=2, count=1)[0]
        trace = neumann_trace(radial_operator, series, -1j, u, K=8, R=R)
        assert len(trace.residuals) == 9
        floor = trace.final
        for before, after in zip(trace.residuals, trace.residuals[1:]):
            assert after <= 1.1 * norm * before + 2 * floor
        assert trace.final <= 1e-3
        assert trace.final < trace.residuals[0]

    def test_neumann_first_entry_is_parametrix_residual(self, radial_operator, small_grid):
        """K = 0 이면 w = Op¹(b)u, 잔차는 Π u 에 대한 파라메트릭스 잔차"""
        series = build_parametrix(radial_operator, 1j, 0).series
        R = ResidualOperator(radial_operator, series, 1j, small_grid)
        u = random_fields(small_grid, seed=5, count=1)[0]
        projected = u.like(R.project(u.values))
        trace = neumann_trace(radial_operator, series, 1j, u, K=0, R=R)
        assert trace.residuals == [pytest.approx(residual_norm(radial_operator, series, 1j, projected), rel=1e-10)]

    @pytest.mark.slow
    def test_residual_norm_decreases_with_hbar(self, conic_laplacian, small_grid):
        """휜 라플라시안, N = 1: ‖R‖ 는 ħ 와 함께 감소 (10% 잡음 허용)"""
        series = build_parametrix(conic_laplacian, 1j, 1).series
        hbars = [1 / 8, 1 / 16, 1 / 32]
        norms = [
            ResidualOperator(conic_laplacian, series, 1j, small_grid.with_hbar(h)).norm(trials=1, iters=15)
            for h in hbars
        ]
        for larger, smaller in zip(norms, norms[1:]):
            assert smaller <= 1.1 * larger
        assert norms[-1] < 1.0

    def test_smooth_cutoff(self):
        s = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 3.0, -2.5])
        values = smooth_cutoff(s)
        assert values[0] == 1.0 and values[2] == 1.0
        assert values[4] == 0.0 and values[5] == 0.0 and values[6] == 0.0
        assert 0.0 < values[3] < 1.0

    @pytest.mark.slow
    def test_commutator_decays_with_delta(self, radial_operator):
        grid = Grid(r_origin=-34.0, r_length=68.0, n_r=512, n_theta=16, hbar=0.125)
        series = build_parametrix(radial_operator, 1j, 1).series
        report = cutoff_commutator(radial_operator, series, 1j, grid, [0.4, 0.2, 0.1])
        assert report.values[-1] < report.values[0]
        assert report.slope is not None and report.slope >= 0.8


# ──────────────────────────────────────────────
# 아틀라스
# ──────────────────────────────────────────────
class TestAtlas:
    def test_weights_sum_to_one(self):
        kappa_1, kappa_2 = chart_weights()
        assert is_zero(kappa_1 + kappa_2 - 1)
        th = np.linspace(0.0, 2 * math.pi, 64, endpoint=False)
        values = identity_arc_weight(th)
        assert np.all((values >= 0.0) & (values <= 1.0))
        assert values[0] == 1.0

    def test_cutoff_is_one_on_support(self):
        th = np.linspace(0.0, 2 * math.pi, 256, endpoint=False)
        kappa = identity_arc_weight(th)
        assert np.all(chart_cutoff(th, 0.0)[kappa > 0] == 1.0)
        assert np.all(chart_cutoff(th, math.pi)[kappa < 1] == 1.0)

    def test_identity_chart_multiplication_symbol(self, weight_one, small_grid, small_fields):
        a = Symbol(expr=(2 + sp.cos(r)) / 3 * (1 + sp.sin(theta) / 2), order=0.0, weight=weight_one)
        for u in small_fields:
            assert atlas_discrepancy(a, diffeos.identity(), u) <= 1e-12
