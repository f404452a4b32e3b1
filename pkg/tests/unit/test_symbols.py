"""Symbol 계산 테스트 - 세미노름, 바이심볼, 샤프 곱, 차트 전송, 레졸벤트"""

import numpy as np
import pytest
import sympy as sp

from src.expr.service import evaluate_grid, is_zero
from src.expr.variables import eta, r, r_p, rho, theta
from src.quantize.fields import random_fields
from src.quantize.service import apply_op, l2_norm
from src.symbols import diffeos
from src.symbols.schemas import Bisymbol, SampleWindow, Symbol
from src.symbols.service import (
    bisymbol_expansion,
    chart_transfer_leading,
    delta_N,
    ellipticity_margin,
    resolvent_symbol,
    seminorm_estimate,
    sharp_left,
    sharp_right,
    window_for,
)
from src.symbols.repository import SymbolRepository, dump_series, dump_symbol, load_series
from src.symbols.weights import check_weight, get_weight
from src.shared.exceptions import (
    EllipticityException,
    NotDiffeomorphismException,
    ValidationException,
)


def _symbol(expr, weight, order=0.0, z=None):
    return Symbol(expr=sp.sympify(expr), order=order, weight=weight, z=z)


class TestWeights:
    def test_catalog(self):
        assert get_weight("one").expr == 1
        assert get_weight("exp-windowed").r_min == 0.0

    def test_unknown_weight(self):
        with pytest.raises(ValidationException):
            get_weight("cusp")

    def test_conic_bounds_hold(self, weight_conic):
        measured = check_weight(weight_conic, -6.0, 6.0)
        assert measured[1] <= 0.5 + 1e-9
        assert set(measured) == {1, 2, 3, 4}

    def test_exp_window_rejects_negative_r(self, weight_exp):
        with pytest.raises(ValidationException):
            check_weight(weight_exp, -1.0, 2.0)

    def test_window_for_shifts_into_domain(self, weight_exp):
        window = window_for(weight_exp)
        assert window.r_min >= 0.0


class TestSeminorm:
    def test_constant_one(self, weight_conic):
        for N in (0, 2, 4):
            assert seminorm_estimate(_symbol(1, weight_conic), N) == pytest.approx(1.0)

    def test_momentum_order_one(self, weight_conic):
        """sup |ρ|/⟨ρ⊕f⁻¹η⟩ → 1"""
        value = seminorm_estimate(_symbol(rho, weight_conic, order=1.0), 0)
        assert 0.9 <= value <= 1.0

    def test_resolvent_order_minus_two(self, weight_conic):
        f = weight_conic.expr
        a = _symbol((-1 - rho**2 - (eta / f) ** 2) ** -1, weight_conic, order=-2.0)
        value = seminorm_estimate(a, 0)
        assert 0.5 <= value <= 1.0 + 1e-12

    def test_derivative_budget(self, weight_one):
        with pytest.raises(ValidationException):
            seminorm_estimate(_symbol(rho, weight_one, order=1.0), 5)

    def test_decay_flag(self, weight_one):
        a = _symbol(sp.cos(rho), weight_one)
        with_decay = seminorm_estimate(a, 1, decay=1)
        without = seminorm_estimate(a, 1, decay=0)
        assert with_decay >= without

    def test_window_outside_weight_domain(self, weight_exp):
        with pytest.raises(ValidationException):
            seminorm_estimate(_symbol(rho, weight_exp, 1.0), 0, SampleWindow(r_min=-2.0, r_max=2.0))


class TestBisymbolExpansion:
    def test_left_quantization_of_unprimed_amplitude(self, weight_one):
        a = Bisymbol(expr=sp.cos(r) * sp.exp(-(rho**2)), order=0.0, t=1.0, weight=weight_one)
        series = bisymbol_expansion(a, 3)
        assert is_zero(series.terms[0] - sp.cos(r) * sp.exp(-(rho**2)))
        assert all(is_zero(term) for term in series.terms[1:])

    def test_right_quantization_of_primed_variable(self, weight_one):
        """t = 0 에서 r′ρ 의 심볼은 정확히 rρ"""
        series = bisymbol_expansion(Bisymbol(expr=r_p * rho, order=1.0, t=0.0, weight=weight_one), 2)
        assert is_zero(series.terms[0] - r * rho)
        assert is_zero(series.terms[1])

    def test_matches_sharp_product(self, weight_one):
        chi = sp.exp(-(r_p**2))
        s = sp.sin(r) * rho**2
        bis = bisymbol_expansion(Bisymbol(expr=chi * s, order=2.0, t=1.0, weight=weight_one), 2)
        sharp = sharp_right(_symbol(s, weight_one, 2.0), _symbol(sp.exp(-(r**2)), weight_one), 1.0, 2)
        for a, b in zip(bis.terms, sharp.terms):
            assert is_zero(a - b)

    def test_budget(self, weight_one):
        with pytest.raises(ValidationException):
            bisymbol_expansion(Bisymbol(expr=rho, order=1.0, t=1.0, weight=weight_one), 9)


class TestSharpProducts:
    def test_left_at_t_one_is_exact_product(self, weight_one):
        series = sharp_left(_symbol(r, weight_one), _symbol(rho, weight_one, 1.0), 1.0, 3)
        assert is_zero(series.terms[0] - r * rho)
        assert all(is_zero(term) for term in series.terms[1:])

    def test_left_at_t_zero(self, weight_one):
        series = sharp_left(_symbol(r, weight_one), _symbol(rho, weight_one, 1.0), 0.0, 2)
        assert is_zero(series.terms[0] - r * rho)
        assert is_zero(series.terms[1] - sp.I)

    def test_right_at_t_zero_is_exact_product(self, weight_one):
        series = sharp_right(_symbol(rho**2, weight_one, 2.0), _symbol(sp.cos(r), weight_one), 0.0, 2)
        assert all(is_zero(term) for term in series.terms[1:])

    def test_right_at_t_one(self, weight_one):
        """ħD_r(ru) = rħD_r u − iħu"""
        series = sharp_right(_symbol(rho, weight_one, 1.0), _symbol(r, weight_one), 1.0, 2)
        assert is_zero(series.terms[0] - r * rho)
        assert is_zero(series.terms[1] + sp.I)

    def test_right_matches_operator_composition(self, weight_one, small_grid):
        fields = random_fields(small_grid, seed=11, count=2)
        for u in fields:
            lhs = apply_op(rho, 1.0, u.like(small_grid.r_values()[:, None] * u.values))
            rhs = apply_op(r * rho - sp.I * small_grid.hbar, 1.0, u)
            assert l2_norm(lhs - rhs) / l2_norm(u) <= 1e-6

    def test_unit_cutoff(self, weight_one):
        a = _symbol(sp.sin(theta) * rho * eta, weight_one, 2.0)
        for t in (0.0, 0.5, 1.0):
            series = sharp_left(_symbol(1, weight_one), a, t, 2)
            assert is_zero(series.terms[0] - a.expr)
            assert all(is_zero(term) for term in series.terms[1:])

    def test_cutoff_must_not_depend_on_momenta(self, weight_one):
        with pytest.raises(ValidationException):
            sharp_left(_symbol(rho, weight_one), _symbol(rho, weight_one), 0.5, 1)


class TestChartTransfer:
    def test_identity(self, weight_one):
        a = _symbol(sp.cos(theta) * eta, weight_one, 1.0)
        assert is_zero(chart_transfer_leading(a, diffeos.identity()).expr - a.expr)

    def test_dilation_pointwise(self, weight_one):
        """φ′(θ) = 2θ 이면 전송된 심볼은 a(θ/2, 2η)"""
        a = _symbol(sp.sin(theta) * eta + eta**2, weight_one, 2.0)
        pushed = chart_transfer_leading(a, diffeos.dilation(2.0))
        rng = np.random.default_rng(0)
        th, et = rng.uniform(-1, 1, 10), rng.uniform(-2, 2, 10)
        actual = evaluate_grid(pushed.expr, {"theta": th, "eta": et})
        expected = np.sin(th / 2) * 2 * et + (2 * et) ** 2
        np.testing.assert_allclose(actual, expected, rtol=1e-12)

    def test_angle_free_symbol_unchanged(self, weight_one):
        a = _symbol(rho**2 * sp.exp(-(r**2)), weight_one, 2.0)
        assert chart_transfer_leading(a, diffeos.mobius(1.5)).expr == a.expr

    def test_not_a_diffeomorphism(self, weight_one):
        with pytest.raises(NotDiffeomorphismException):
            diffeos.dilation(-1.0)


class TestDiffeos:
    def test_mobius_inverse(self):
        phi = diffeos.mobius(1.5)
        th = np.linspace(0.0, 2 * np.pi, 17, endpoint=False)
        back = diffeos.map_values(phi, diffeos.map_values(phi, th), inverse=True)
        np.testing.assert_allclose(back, th, atol=1e-12)

    def test_mobius_derivative_positive(self):
        assert diffeos.check_positive(diffeos.mobius(1.5)) > 0

    def test_mobius_derivative_formula(self):
        kappa = 1.5
        th = np.linspace(0.0, 2 * np.pi, 9, endpoint=False)
        actual = evaluate_grid(diffeos.derivative(diffeos.mobius(kappa)), {"theta": th}).real
        expected = 2 * kappa / ((1 + kappa**2) + (1 - kappa**2) * np.cos(th))
        np.testing.assert_allclose(actual, expected, rtol=1e-12)


class TestResolvent:
    def test_value_and_margin_at_origin(self, weight_conic):
        f = weight_conic.expr
        sigma = _symbol(rho**2 + (eta / f) ** 2, weight_conic, 2.0)
        b = resolvent_symbol(sigma, -1)
        assert b.order == -2.0
        value = evaluate_grid(b.expr, {"r": 0.0, "rho": 0.0, "eta": 0.0, "z": -1.0})
        assert complex(value) == -1
        margin, _ = ellipticity_margin(sigma, -1)
        assert np.max(margin) <= 1.0 + 1e-12
        assert np.min(margin) == pytest.approx(1.0)

    def test_imaginary_z(self, weight_one):
        sigma = _symbol(rho**2, weight_one, 2.0)
        b = resolvent_symbol(sigma, 1j)
        assert np.isfinite(seminorm_estimate(b, 2))

    def test_margin_failure_carries_sample(self, weight_one):
        sigma = _symbol(rho**2, weight_one, 2.0)
        with pytest.raises(EllipticityException) as exc_info:
            resolvent_symbol(sigma, 4.0)
        assert "rho" in exc_info.value.details["worst_sample"]

    def test_delta_exact_cancellation(self, weight_one):
        bound = delta_N(_symbol(rho**2, weight_one, 2.0), -1, 0)
        assert bound.delta_N == pytest.approx(1.0)

    def test_delta_below_one(self, weight_one):
        bound = delta_N(_symbol(rho**2, weight_one, 2.0), -4, 0)
        assert 0.9 <= bound.delta_N <= 1.0

    def test_delta_monotone_in_N(self, weight_one):
        sigma = _symbol(rho**2, weight_one, 2.0)
        values = [delta_N(sigma, 1j, N).delta_N for N in range(4)]
        assert values == sorted(values)


class TestSymbolRepository:
    def test_series_round_trip(self, tmp_path, weight_conic):
        sigma = _symbol(rho**2 + (eta / weight_conic.expr) ** 2, weight_conic, 2.0)
        series = sharp_right(resolvent_symbol(sigma, -1), _symbol(sp.cos(r), weight_conic), 1.0, 2)
        repo = SymbolRepository(tmp_path)
        repo.save_series("b", series)
        loaded = repo.load_series("b")
        assert loaded.orders == series.orders
        assert loaded.z == series.z
        assert all(is_zero(a - b) for a, b in zip(loaded.terms, series.terms))

    def test_symbol_round_trip(self, tmp_path, weight_exp):
        a = _symbol(sp.exp(r) ** -1 * eta, weight_exp, 1.0)
        repo = SymbolRepository(tmp_path)
        repo.save_symbol("a", a)
        loaded = repo.load_symbol("a")
        assert loaded.weight.name == "exp-windowed"
        assert loaded.z is None
        assert is_zero(loaded.expr - a.expr)

    def test_wrong_kind(self, weight_one):
        text = dump_symbol(_symbol(rho, weight_one, 1.0))
        with pytest.raises(ValidationException):
            load_series(text)

    def test_missing_term(self, weight_one):
        series = sharp_left(_symbol(r, weight_one), _symbol(rho, weight_one, 1.0), 0.0, 1)
        text = "\n".join(line for line in dump_series(series).splitlines() if not line.startswith("term.1"))
        with pytest.raises(ValidationException):
            load_series(text)
