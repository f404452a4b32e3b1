"""테스트 공통 설정 및 fixture"""

import os

import pytest

# 테스트 환경 설정: Settings 로드 전에 환경변수를 설정해야 함
os.environ["ENDCALC_APP_ENV"] = "test"
os.environ["ENDCALC_THREADS"] = "2"
os.environ["ENDCALC_LOG_LEVEL"] = "WARNING"

from src.diffops.service import constant_operator, warped_laplacian
from src.expr.schemas import Point
from src.quantize.fields import random_fields
from src.quantize.schemas import Grid
from src.symbols.weights import get_weight


# ──────────────────────────────────────────────
# Weight Fixtures
# ──────────────────────────────────────────────
@pytest.fixture
def weight_one():
    """f ≡ 1 (원통형 끝)"""
    return get_weight("one")


@pytest.fixture
def weight_conic():
    """f = ⟨r⟩"""
    return get_weight("sqrt1pr2")


@pytest.fixture
def weight_exp():
    """f = e^r (r ≥ 0)"""
    return get_weight("exp-windowed")


# ──────────────────────────────────────────────
# Grid / Field Fixtures
# ──────────────────────────────────────────────
@pytest.fixture
def small_grid():
    """64 × 16, r ∈ [−8, 8), ħ = 1/8"""
    return Grid(r_origin=-8.0, r_length=16.0, n_r=64, n_theta=16, hbar=0.125)


@pytest.fixture
def square_grid():
    """64 × 64, r ∈ [−8, 8), ħ = 1/4"""
    return Grid(r_origin=-8.0, r_length=16.0, n_r=64, n_theta=64, hbar=0.25)


@pytest.fixture
def small_fields(small_grid):
    """small_grid 위 대역 제한 무작위 필드 3개"""
    return random_fields(small_grid, seed=7, count=3)


# ──────────────────────────────────────────────
# Operator Fixtures
# ──────────────────────────────────────────────
@pytest.fixture
def flat_operator(weight_one):
    """(ħD_r)² + (ħD_θ)²"""
    return constant_operator(weight_one)


@pytest.fixture
def conic_laplacian(weight_conic):
    """f = ⟨r⟩, h ≡ 1 휜 라플라시안"""
    return warped_laplacian(weight_conic)


# ──────────────────────────────────────────────
# Point Fixtures
# ──────────────────────────────────────────────
@pytest.fixture
def base_point():
    return Point(r=0.4, theta=0.3, rho=0.7, eta=-0.6, hbar=0.25, z=-1 + 0.5j)
