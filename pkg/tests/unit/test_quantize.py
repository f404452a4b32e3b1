"""격자 양자화 테스트 - Op^t 경로, 수반, 노름, 블록 표, 필드 저장"""

import numpy as np
import pytest
import sympy as sp

from src.expr.variables import eta, r, rho, theta
from src.quantize.corpus import symbol_corpus
from src.quantize.fields import margin_leakage, mode_field, random_field, semiclassical_field
from src.quantize.repository import FieldRepository, decode_field, encode_field
from src.quantize import service as quantize_service
from src.quantize.schemas import Grid, HalfDensityField, PartitionOfUnity
from src.quantize.service import (
    QuantizedOperator,
    apply_op,
    block_norm_table,
    inner,
    l2_norm,
    quantized_norm,
    relative_error,
)
from src.shared.exceptions import GridException, ValidationException


@pytest.fixture
def tiny_grid():
    """16 × 8, 직접 합 경로용"""
    return Grid(r_origin=-4.0, r_length=8.0, n_r=16, n_theta=8, hbar=0.5)


class TestGrid:
    def test_power_of_two(self):
        with pytest.raises(GridException):
            Grid(r_origin=0.0, r_length=1.0, n_r=12, n_theta=8, hbar=0.5)

    def test_angular_resolution(self):
        with pytest.raises(GridException):
            Grid(r_origin=0.0, r_length=1.0, n_r=8, n_theta=8, hbar=0.125, eta_needed=1.0)

    def test_dual_lattice(self, small_grid):
        assert small_grid.eta_max == pytest.approx(1.0)
        assert small_grid.rho_values()[1] == pytest.approx(2 * np.pi * 0.125 / 16)
        assert small_grid.r_values()[0] == -8.0

    def test_field_shape_checked(self, small_grid):
        with pytest.raises(GridException):
            HalfDensityField(grid=small_grid, values=np.zeros((4, 4), dtype=complex))


class TestFields:
    def test_random_fields_deterministic(self, small_grid):
        a = random_field(small_grid, seed=5)
        b = random_field(small_grid, seed=5)
        np.testing.assert_array_equal(a.values, b.values)

    def test_random_field_vanishes_at_edges(self):
        wide = Grid(r_origin=-16.0, r_length=32.0, n_r=128, n_theta=16, hbar=0.125)
        assert all(margin_leakage(random_field(wide, seed=s)) <= 1e-12 for s in range(3))

    def test_semiclassical_frequency(self, square_grid):
        """η₀ = 1, ħ = 1/4 → 주 모드 l = 4"""
        u = semiclassical_field(square_grid, r_center=0.0, theta_center=np.pi, eta0=1.0)
        spectrum = np.abs(np.fft.fft(u.values, axis=1)).sum(axis=0)
        assert int(square_grid.l_index()[np.argmax(spectrum)]) == 4


class TestQuantizedOperator:
    def test_identity(self, small_grid, small_fields):
        for u in small_fields:
            np.testing.assert_allclose(apply_op(1, 0.5, u).values, u.values)

    def test_classification(self, small_grid):
        kinds = {
            "constant": sp.Integer(3),
            "multiplication": sp.cos(r) * sp.sin(theta),
            "multiplier": rho**2 + eta**2,
            "angle_free": r * rho,
            "general": sp.cos(theta) * eta,
        }
        for kind, expr in kinds.items():
            assert QuantizedOperator(expr, 1.0, small_grid).kind == kind

    def test_t_outside_unit_interval(self, small_grid):
        with pytest.raises(ValidationException):
            QuantizedOperator(rho, 1.5, small_grid)

    def test_grid_mismatch(self, small_grid, square_grid):
        u = random_field(square_grid, seed=0)
        with pytest.raises(GridException):
            QuantizedOperator(rho, 1.0, small_grid).apply(u)

    def test_multiplication_independent_of_t(self, small_fields):
        u = small_fields[0]
        a = sp.cos(r) * (2 + sp.sin(theta))
        base = apply_op(a, 1.0, u)
        for t in (0.0, 0.5):
            assert relative_error(apply_op(a, t, u), base) <= 1e-12

    def test_plane_wave_eigenvalue(self, small_grid):
        u = mode_field(small_grid, 3, 2)
        w = apply_op(rho**2 + eta**2, 1.0, u)
        expected = small_grid.rho_values()[3] ** 2 + small_grid.eta_values()[2] ** 2
        np.testing.assert_allclose(w.values, expected * u.values, atol=1e-12)

    def test_left_minus_right_quantization(self, small_fields, small_grid):
        """Op¹(rρ) − Op⁰(rρ) = iħ"""
        for u in small_fields:
            diff = apply_op(r * rho, 1.0, u) - apply_op(r * rho, 0.0, u)
            expected = u.scaled(1j * small_grid.hbar)
            assert relative_error(diff, expected) <= 1e-6

    def test_theta_dependent_left_quantization(self, small_fields):
        """Op¹(cos θ · η) = cos θ · ħD_θ"""
        for u in small_fields:
            lhs = apply_op(sp.cos(theta) * eta, 1.0, u)
            rhs = apply_op(sp.cos(theta), 1.0, apply_op(eta, 1.0, u))
            assert relative_error(lhs, rhs) <= 1e-10

    def test_adjoint_relation(self, tiny_grid):
        a = sp.exp(-(r**2)) * (rho + sp.I * sp.sin(theta) * eta) + sp.cos(theta)
        op = QuantizedOperator(a, 0.3, tiny_grid)
        adj = op.adjoint()
        assert adj.t == pytest.approx(0.7)
        u, v = random_field(tiny_grid, seed=1), random_field(tiny_grid, seed=2)
        lhs, rhs = inner(op.apply(u), v), inner(u, adj.apply(v))
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))

    def test_weyl_real_symbol_is_symmetric(self, tiny_grid):
        a = sp.sin(theta) * rho * sp.exp(-(r**2) - eta**2)
        op = QuantizedOperator(a, 0.5, tiny_grid)
        u, v = random_field(tiny_grid, seed=3), random_field(tiny_grid, seed=4)
        lhs, rhs = inner(op.apply(u), v), inner(u, op.apply(v))
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))

    def test_direct_sum_limit(self):
        big = Grid(r_origin=-8.0, r_length=16.0, n_r=256, n_theta=64, hbar=0.125)
        u = HalfDensityField(grid=big, values=np.ones(big.shape, dtype=complex))
        with pytest.raises(GridException):
            apply_op(sp.cos(theta) * eta, 0.5, u)


class TestDenseCache:
    SYMBOL = (2 + sp.cos(theta)) / 3 * sp.exp(-(rho**2 + eta**2)) * (1 + sp.I * rho) * (1 + sp.sin(r) / 4)

    @pytest.mark.parametrize("t", [0.0, 1.0])
    def test_matches_chunked_path(self, small_grid, small_fields, monkeypatch, t):
        """조밀 행렬 캐시와 청크 합은 같은 연산자"""
        dense = QuantizedOperator(self.SYMBOL, t, small_grid).prepare()
        assert dense.uses_dense()
        expected = [dense.apply(u) for u in small_fields]
        monkeypatch.setattr(quantize_service, "TENSOR_CACHE_LIMIT", 0)
        chunked = QuantizedOperator(self.SYMBOL, t, small_grid)
        assert not chunked.uses_dense()
        for u, e in zip(small_fields, expected):
            assert relative_error(chunked.apply(u), e) <= 1e-10

    def test_shared_adjoint(self, small_grid, small_fields):
        """수반은 켤레 전치 행렬을 그대로 쓴다"""
        op = QuantizedOperator(self.SYMBOL, 1.0, small_grid).prepare()
        adj = op.adjoint()
        assert adj.t == 0.0 and adj.uses_dense()
        u, v = small_fields[0], small_fields[1]
        lhs, rhs = inner(op.apply(u), v), inner(u, adj.apply(v))
        assert abs(lhs - rhs) <= 1e-10 * l2_norm(u) * l2_norm(v)

    def test_large_grid_skips_cache(self):
        big = Grid(r_origin=-8.0, r_length=16.0, n_r=128, n_theta=32, hbar=0.125)
        assert not QuantizedOperator(self.SYMBOL, 1.0, big).uses_dense()


class TestInnerProduct:
    def test_conjugate_linear_in_second_argument(self, small_fields):
        u, v = small_fields[0], small_fields[1]
        c = 2 - 3j
        assert inner(u, v.scaled(c)) == pytest.approx(np.conj(c) * inner(u, v))

    def test_norm_matches_inner(self, small_fields):
        u = small_fields[0]
        assert l2_norm(u) ** 2 == pytest.approx(inner(u, u).real)


class TestNorms:
    def test_constant(self, small_grid):
        assert quantized_norm(2, 1.0, small_grid, trials=1, iters=3) == pytest.approx(2.0)

    def test_multiplier_bounded_by_sup(self, small_grid):
        value = quantized_norm(sp.exp(-(rho**2)), 1.0, small_grid, trials=2, iters=20)
        assert 0.9 <= value <= 1.0 + 1e-12

    def test_multiplication_norm_is_sup(self, small_grid):
        value = quantized_norm((2 + sp.cos(r)) / 3, 0.0, small_grid, trials=2, iters=40)
        assert 0.95 <= value <= 1.0 + 1e-12

    def test_corpus_is_order_zero(self, weight_conic):
        corpus = symbol_corpus(weight_conic)
        assert len(corpus) == 10
        assert {a.order for _, a in corpus} == {0.0}


class TestPartitionOfUnity:
    def test_sums_to_one(self):
        x = np.linspace(-3.0, 3.0, 121)
        total = PartitionOfUnity.covering(-4.0, 4.0).total(x)
        np.testing.assert_allclose(total, 1.0, atol=1e-12)

    def test_member_support(self):
        pou = PartitionOfUnity(centers=(0,))
        x = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
        values = pou.member(0, x)
        assert values[0] == 0.0 and values[-1] == 0.0
        assert values[2] == pytest.approx(1.0)


class TestBlockNormTable:
    def test_multiplication_blocks_vanish_off_support(self, weight_one):
        grid = Grid(r_origin=-2.0, r_length=10.0, n_r=64, n_theta=8, hbar=0.25)
        table = block_norm_table((2 + sp.cos(r)) / 3, 1.0, grid, [0, 1, 2, 3], [0, 1, 2, 3], trials=1, iters=10)
        by_d = table.by_distance()
        assert by_d[2] == 0.0 and by_d[3] == 0.0
        assert by_d[0] > 0.0

    def test_center_outside_window(self, small_grid):
        with pytest.raises(GridException):
            block_norm_table(1, 1.0, small_grid, [0], [8])


class TestFieldRepository:
    def test_round_trip(self, tmp_path, small_fields):
        repo = FieldRepository(tmp_path)
        repo.save("u0", small_fields[0])
        loaded = repo.load("u0")
        assert loaded.grid.matches(small_fields[0].grid)
        np.testing.assert_allclose(loaded.values, small_fields[0].values, rtol=1e-6, atol=1e-6)

    def test_header_size(self, small_fields):
        data = encode_field(small_fields[0])
        assert data[:4] == b"HDF1"
        assert len(data) == 32 + 64 * 16 * 8

    def test_bad_magic(self, small_fields):
        data = b"XXXX" + encode_field(small_fields[0])[4:]
        with pytest.raises(ValidationException):
            decode_field(data)

    def test_truncated_body(self, small_fields):
        with pytest.raises(ValidationException):
            decode_field(encode_field(small_fields[0])[:-8])

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationException):
            FieldRepository(tmp_path).load("nothing")
