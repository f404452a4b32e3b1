"""Quantize Service - 격자 양자화 Op^t_ħ 와 연산자 노름 측정"""

import logging
import math
from collections.abc import Callable
from typing import Any

import numpy as np
import sympy as sp
from scipy.fft import fft, fft2, ifft, ifft2
from scipy.sparse.linalg import LinearOperator

from src.config import get_settings
from src.expr.service import as_expr, evaluate_grid
from src.expr.variables import eta, r, rho, theta
from src.quantize.schemas import BlockNormTable, Grid, HalfDensityField, PartitionOfUnity
from src.symbols.schemas import Symbol, SymbolSeries
from src.shared.exceptions import GridException, ValidationException
from src.shared.parallel import in_worker, parallel_map

logger = logging.getLogger(__name__)

FieldMap = Callable[[HalfDensityField], HalfDensityField]

# 각도 의존 일반 t 경로의 (출력점 × 입력점 × 운동량) 상한
DIRECT_SUM_LIMIT = 2 * 10**8
# 캐시할 심볼 텐서 원소 수 상한
TENSOR_CACHE_LIMIT = 2**23


def _workers() -> int:
    return 1 if in_worker() else get_settings().worker_count


def symbol_expr(a: Any) -> sp.Expr:
    """Symbol / SymbolSeries / Expr → 양자화할 식 (급수는 Σ ħ^l b_l)"""
    if isinstance(a, SymbolSeries):
        return a.total()
    if isinstance(a, Symbol):
        return a.expr
    return as_expr(a)


# ==================== 스펙트럼 도구 ====================


def spectral_multiplier(u: np.ndarray, multiplier: np.ndarray) -> np.ndarray:
    """FFT 순서 (k, l) 승수 m(ρ_k, η_l) 적용"""
    return ifft2(multiplier * fft2(u, workers=_workers()), workers=_workers())


def momentum_powers(grid: Grid, a0: int, a1: int) -> np.ndarray:
    """ρ^{a0} η^{a1} 격자 승수 (ħD_r)^{a0}(ħD_θ)^{a1}"""
    return np.outer(grid.rho_values() ** a0, grid.eta_values() ** a1)


# ==================== 양자화 연산자 ====================


class QuantizedOperator:
    """격자 위의 Op^t_ħ(a)

    심볼 종류별 경로:
      constant       → 스칼라 곱
      multiplication → 운동량 무관, 점별 곱 (모든 t에서 정확)
      multiplier     → 공간 무관, 푸리에 승수
      angle_free     → θ 무관, 커널 K[i, i′, l] 을 한 번 만들어 캐시
      general        → θ 의존, t=1/t=0 는 DFT를 한쪽으로 끌어내고 나머지는 직접 합
                       (작은 격자에서는 조밀 행렬을 한 번 만들어 캐시)
    """

    def __init__(self, a: Any, t: float, grid: Grid, z: complex | None = None, conjugate: bool = False):
        if not 0.0 <= t <= 1.0:
            raise ValidationException("quantization parameter outside [0, 1]", details={"t": t})
        self.expr = symbol_expr(a)
        self.t = float(t)
        self.grid = grid
        self.z = z if z is not None else getattr(a, "z", None)
        self.conjugate = conjugate
        self.kind = self._classify()
        self._kernel: np.ndarray | None = None
        self._pointwise: np.ndarray | complex | None = None

    def _classify(self) -> str:
        free = self.expr.free_symbols
        spatial = bool(free & {r, theta})
        momentum = bool(free & {rho, eta})
        if not spatial and not momentum:
            return "constant"
        if not momentum:
            return "multiplication"
        if not spatial:
            return "multiplier"
        if theta not in free:
            return "angle_free"
        return "general"

    # ---------- 평가 ----------

    def _values(self, **axes: Any) -> np.ndarray:
        values: dict[str, Any] = {"hbar": self.grid.hbar, **axes}
        if self.z is not None:
            values["z"] = complex(self.z)
        out = evaluate_grid(self.expr, values)
        return np.conj(out) if self.conjugate else out

    def adjoint(self) -> "QuantizedOperator":
        """L² 수반: Op^{1−t}(ā)"""
        other = QuantizedOperator(self.expr, 1.0 - self.t, self.grid, self.z, not self.conjugate)
        if self.uses_dense() and self._kernel is not None:
            # t ∈ {0, 1} 에서 두 조밀 행렬은 서로의 켤레 전치
            other._kernel = np.ascontiguousarray(self._kernel.conj().T)
        return other

    def uses_dense(self) -> bool:
        return self.kind == "general" and self.t in (0.0, 1.0) and self.grid.size**2 <= TENSOR_CACHE_LIMIT

    def prepare(self) -> "QuantizedOperator":
        """캐시할 커널을 병렬 적용 전에 미리 만든다"""
        if self.kind == "angle_free":
            self.angle_free_kernel()
        elif self.uses_dense():
            self.dense_matrix()
        return self

    def __call__(self, u: HalfDensityField) -> HalfDensityField:
        return self.apply(u)

    def apply(self, u: HalfDensityField) -> HalfDensityField:
        if not u.grid.matches(self.grid):
            raise GridException("field grid differs from operator grid")
        v = u.values
        handler = {
            "constant": self._apply_pointwise,
            "multiplication": self._apply_pointwise,
            "multiplier": self._apply_multiplier,
            "angle_free": self._apply_angle_free,
            "general": self._apply_general,
        }[self.kind]
        return u.like(handler(v))

    # ---------- 경로별 구현 ----------

    def _apply_pointwise(self, v: np.ndarray) -> np.ndarray:
        if self._pointwise is None:
            g = self.grid
            self._pointwise = self._values(r=g.r_values()[:, None], theta=g.theta_values()[None, :])
        return self._pointwise * v

    def _apply_multiplier(self, v: np.ndarray) -> np.ndarray:
        if self._kernel is None:
            g = self.grid
            self._kernel = np.broadcast_to(
                self._values(rho=g.rho_values()[:, None], eta=g.eta_values()[None, :]), g.shape
            )
        return spectral_multiplier(v, self._kernel)

    def angle_free_kernel(self) -> np.ndarray:
        """K[i, i′, l] = (1/n_r) Σ_k a(x_t(r_i, r_i′), ρ_k, η_l) e^{2πik(i−i′)/n_r}"""
        if self._kernel is not None:
            return self._kernel
        g = self.grid
        n = g.n_r
        r_vals = g.r_values()
        rho_vals = g.rho_values()
        eta_vals = g.eta_values()
        diff_index = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n

        if self.t in (0.0, 1.0):
            # A[i, k, l] 을 k 방향 역 FFT → G[i, d, l], 커널은 차이 인덱스로 재배열
            A = np.broadcast_to(
                self._values(r=r_vals[:, None, None], rho=rho_vals[None, :, None], eta=eta_vals[None, None, :]),
                (n, n, g.n_theta),
            )
            G = ifft(A, axis=1, workers=_workers())
            if self.t == 1.0:
                kernel = G[np.arange(n)[:, None], diff_index, :]
            else:
                kernel = G[np.arange(n)[None, :], diff_index, :]
        else:
            phase = np.exp(2j * math.pi * np.outer(np.arange(n), self._k()) / n)

            def row(i: int) -> np.ndarray:
                x = self.t * r_vals[i] + (1 - self.t) * r_vals
                A = np.broadcast_to(
                    self._values(r=x[:, None, None], rho=rho_vals[None, :, None], eta=eta_vals[None, None, :]),
                    (n, n, g.n_theta),
                )
                # Σ_k A[i′, k, l] e^{2πik(i−i′)/n}
                shift = phase[i][None, :] * np.conj(phase)
                return np.einsum("jkl,jk->jl", A, shift) / n

            kernel = np.stack(parallel_map(row, range(n)))
        if kernel.size <= TENSOR_CACHE_LIMIT:
            self._kernel = kernel
        return kernel

    def _k(self) -> np.ndarray:
        return self.grid.k_index()

    def _apply_angle_free(self, v: np.ndarray) -> np.ndarray:
        kernel = self.angle_free_kernel()
        v_l = fft(v, axis=1, workers=_workers())
        w = np.einsum("ijl,jl->il", kernel, v_l)
        return ifft(w, axis=1, workers=_workers())

    def _phases(self) -> tuple[np.ndarray, np.ndarray]:
        g = self.grid
        e_r = np.exp(2j * math.pi * np.outer(np.arange(g.n_r), g.k_index()) / g.n_r)
        e_theta = np.exp(2j * math.pi * np.outer(np.arange(g.n_theta), g.l_index()) / g.n_theta)
        return e_r, e_theta

    def dense_matrix(self) -> np.ndarray:
        """t = 1: M[(i,m),(k,l)] = a(q_im, p_kl) e^{ip·q/ħ}  (입력은 û)
        t = 0: M[(k,l),(i,m)] = a(q_im, p_kl) e^{−ip·q/ħ} (출력은 ifft2)
        """
        if self._kernel is not None:
            return self._kernel
        g = self.grid
        chunk = max(1, get_settings().chunk_points // g.n_theta)
        r_vals, th_vals = g.r_values(), g.theta_values()
        rho_vals, eta_vals = g.rho_values(), g.eta_values()
        e_r, e_theta = self._phases()

        def rows(start: int) -> np.ndarray:
            idx = np.arange(start, min(start + chunk, g.n_r))
            A = self._values(
                r=r_vals[idx][:, None, None, None],
                theta=th_vals[None, :, None, None],
                rho=rho_vals[None, None, :, None],
                eta=eta_vals[None, None, None, :],
            )
            phase = e_r[idx][:, None, :, None] * e_theta[None, :, None, :]
            if self.t == 0.0:
                phase = np.conj(phase)
            return (A * phase).reshape(len(idx) * g.n_theta, g.size)

        matrix = np.concatenate(parallel_map(rows, range(0, g.n_r, chunk)), axis=0)
        self._kernel = matrix if self.t == 1.0 else np.ascontiguousarray(matrix.T)
        logger.debug(f"dense symbol matrix {self._kernel.shape} cached (t={self.t:g})")
        return self._kernel

    def _apply_general(self, v: np.ndarray) -> np.ndarray:
        g = self.grid
        if self.uses_dense():
            M = self.dense_matrix()
            if self.t == 1.0:
                u_hat = fft2(v, workers=_workers()) / g.size
                return (M @ u_hat.ravel()).reshape(g.shape)
            return ifft2((M @ v.ravel()).reshape(g.shape), workers=_workers())

        chunk = max(1, get_settings().chunk_points // g.n_theta)
        r_vals, th_vals = g.r_values(), g.theta_values()
        rho_vals, eta_vals = g.rho_values(), g.eta_values()
        e_r, e_theta = self._phases()

        if self.t == 1.0:
            # (Op¹u)(q) = Σ_p a(q, p) e^{ipq/ħ} û(p), û 가 0 인 운동량은 건너뜀
            u_hat = fft2(v, workers=_workers()) / g.size
            kk, ll = np.nonzero(np.abs(u_hat) > 1e-14 * max(np.max(np.abs(u_hat)), 1e-300))

            def rows(start: int) -> np.ndarray:
                idx = np.arange(start, min(start + chunk, g.n_r))
                A = self._values(
                    r=r_vals[idx][:, None, None],
                    theta=th_vals[None, :, None],
                    rho=rho_vals[kk][None, None, :],
                    eta=eta_vals[ll][None, None, :],
                )
                phase = e_r[idx][:, kk][:, None, :] * e_theta[:, ll][None, :, :]
                return np.sum(A * phase * u_hat[kk, ll][None, None, :], axis=2)

            return np.concatenate(parallel_map(rows, range(0, g.n_r, chunk)), axis=0)

        if self.t == 0.0:
            # c(p) = Σ_{q′} a(q′, p) e^{−ipq′/ħ} u(q′), 출력은 ifft2(c)
            support = np.abs(v) > 1e-14 * max(np.max(np.abs(v)), 1e-300)
            ii, mm = np.nonzero(support)

            def partial_sum(start: int) -> np.ndarray:
                sl = slice(start, start + chunk * g.n_theta)
                i_s, m_s = ii[sl], mm[sl]
                A = self._values(
                    r=r_vals[i_s][:, None, None],
                    theta=th_vals[m_s][:, None, None],
                    rho=rho_vals[None, :, None],
                    eta=eta_vals[None, None, :],
                )
                phase = np.conj(e_r[i_s])[:, :, None] * np.conj(e_theta[m_s])[:, None, :]
                return np.sum(A * phase * v[i_s, m_s][:, None, None], axis=0)

            parts = parallel_map(partial_sum, range(0, len(ii), chunk * g.n_theta))
            c = np.sum(parts, axis=0) if parts else np.zeros(g.shape, dtype=complex)
            return ifft2(c, workers=_workers())

        return self._apply_direct(v)

    def _apply_direct(self, v: np.ndarray) -> np.ndarray:
        """일반 t, θ 의존 심볼: 직접 합 (작은 격자 전용)"""
        g = self.grid
        support = np.abs(v) > 1e-14 * max(np.max(np.abs(v)), 1e-300)
        ii, mm = np.nonzero(support)
        cost = g.size * len(ii) * g.size
        if cost > DIRECT_SUM_LIMIT:
            raise GridException(
                "generic-t quantization of angle-dependent symbols needs a smaller grid",
                details={"cost": cost, "limit": DIRECT_SUM_LIMIT},
            )
        r_vals, th_vals = g.r_values(), g.theta_values()
        k_idx, l_idx = g.k_index(), g.l_index()
        rho_vals, eta_vals = g.rho_values(), g.eta_values()
        t = self.t

        def point(flat: int) -> complex:
            i, m = divmod(flat, g.n_theta)
            x_r = t * r_vals[i] + (1 - t) * r_vals[ii]
            d = (th_vals[m] - th_vals[mm] + math.pi) % (2 * math.pi) - math.pi
            nyquist = np.isclose(np.abs(d), math.pi)
            phase = np.exp(
                2j * math.pi
                * (np.outer(i - ii, k_idx)[:, :, None] / g.n_r + np.outer(m - mm, l_idx)[:, None, :] / g.n_theta)
            )

            def amp(dtheta: np.ndarray) -> np.ndarray:
                return self._values(
                    r=x_r[:, None, None],
                    theta=(th_vals[mm] + t * dtheta)[:, None, None],
                    rho=rho_vals[None, :, None],
                    eta=eta_vals[None, None, :],
                )

            A = amp(d)
            if nyquist.any():
                A = np.where(nyquist[:, None, None], 0.5 * (amp(np.full_like(d, math.pi)) + amp(np.full_like(d, -math.pi))), A)
            return complex(np.sum(A * phase * v[ii, mm][:, None, None]) / g.size)

        out = np.array(parallel_map(point, range(g.size)), dtype=complex)
        return out.reshape(g.shape)


def apply_op(a: Any, t: float, u: HalfDensityField, z: complex | None = None) -> HalfDensityField:
    """(Op^t_ħ a) u"""
    return QuantizedOperator(a, t, u.grid, z).apply(u)


# ==================== 내적 / 노름 ====================


def inner(u: HalfDensityField, v: HalfDensityField) -> complex:
    """⟨u, v⟩ = Σ u v̄ dq (두 번째 인자에 켤레선형)"""
    if not u.grid.matches(v.grid):
        raise GridException("inner product of fields on different grids")
    return complex(np.vdot(v.values, u.values) * u.grid.cell)


def l2_norm(u: HalfDensityField) -> float:
    return math.sqrt(float(np.sum(np.abs(u.values) ** 2)) * u.grid.cell)


def relative_error(actual: HalfDensityField, expected: HalfDensityField) -> float:
    return l2_norm(actual - expected) / max(l2_norm(expected), 1e-300)


# ==================== 연산자 노름 ====================


def as_linear_operator(grid: Grid, apply: FieldMap, adjoint: FieldMap | None = None) -> LinearOperator:
    """필드 사상을 평탄화된 scipy LinearOperator로 감쌈"""

    def wrap(fn: FieldMap) -> Callable[[np.ndarray], np.ndarray]:
        def mv(x: np.ndarray) -> np.ndarray:
            field = HalfDensityField(grid=grid, values=np.asarray(x, dtype=complex).reshape(grid.shape))
            return fn(field).values.reshape(-1)

        return mv

    return LinearOperator(
        shape=(grid.size, grid.size),
        matvec=wrap(apply),
        rmatvec=wrap(adjoint) if adjoint is not None else None,
        dtype=complex,
    )


def op_norm_estimate(
    grid: Grid,
    apply: FieldMap,
    adjoint: FieldMap | None = None,
    trials: int = 4,
    iters: int = 30,
    seed: int = 0,
    tol: float = 1e-10,
) -> float:
    """A*A 거듭제곱 반복으로 ‖A‖ 하한 추정

    수반이 없으면 x ↦ Ax/‖Ax‖ 반복의 ‖Ax‖/‖x‖ 최댓값을 쓴다 (여전히 하한).
    """
    op = as_linear_operator(grid, apply, adjoint)
    gram = op.H @ op if adjoint is not None else None

    def trial(index: int) -> float:
        rng = np.random.default_rng(seed + index)
        x = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
        x /= np.linalg.norm(x)
        best, previous = 0.0, math.inf
        for _ in range(iters):
            y = op.matvec(x)
            ratio = float(np.linalg.norm(y))
            best = max(best, ratio)
            if ratio == 0.0 or abs(ratio - previous) <= tol * ratio:
                break
            previous = ratio
            x = gram.matvec(x) if gram is not None else y
            norm = np.linalg.norm(x)
            if norm == 0.0:
                break
            x = x / norm
        return best

    estimate = max(parallel_map(trial, range(trials)))
    logger.debug(f"operator norm estimate {estimate:.6g} ({trials} trials, {iters} iters)")
    return estimate


def quantized_norm(a: Any, t: float, grid: Grid, trials: int = 4, iters: int = 30, seed: int = 0) -> float:
    """‖Op^t(a)‖ 추정"""
    op = QuantizedOperator(a, t, grid).prepare()
    return op_norm_estimate(grid, op.apply, op.adjoint().prepare().apply, trials, iters, seed)


# ==================== 블록 노름 ====================


def block_norm_table(
    a: Any,
    t: float,
    grid: Grid,
    j_values: list[int],
    k_values: list[int],
    trials: int = 2,
    iters: int = 20,
    seed: int = 0,
    floor: float = 1e-14,
) -> BlockNormTable:
    """‖ψ_j Op^t(a) ψ_k‖ 표와 ⟨j−k⟩ 감쇠 지수"""
    for c in set(j_values) | set(k_values):
        if c - 1 < grid.r_origin or c + 1 > grid.r_end:
            raise GridException(
                "partition member escapes the r-window",
                details={"center": c, "window": (grid.r_origin, grid.r_end)},
            )
    pou = PartitionOfUnity(centers=tuple(sorted(set(j_values) | set(k_values))))
    r_vals = grid.r_values()
    psi = {c: pou.member(c, r_vals)[:, None] for c in pou.centers}
    op = QuantizedOperator(a, t, grid).prepare()
    adj = op.adjoint().prepare()

    def block(pair: tuple[int, int]) -> float:
        j, k = pair
        if not np.any(psi[j] * psi[k]) and op.kind in ("constant", "multiplication"):
            return 0.0

        def forward(u: HalfDensityField) -> HalfDensityField:
            return u.like(psi[j] * op.apply(u.like(psi[k] * u.values)).values)

        def backward(u: HalfDensityField) -> HalfDensityField:
            return u.like(psi[k] * adj.apply(u.like(psi[j] * u.values)).values)

        return op_norm_estimate(grid, forward, backward, trials, iters, seed)

    pairs = [(j, k) for j in j_values for k in k_values]
    values = [block(p) for p in pairs]
    norms = [values[a_i * len(k_values) : (a_i + 1) * len(k_values)] for a_i in range(len(j_values))]
    table = BlockNormTable(t=t, hbar=grid.hbar, j_values=list(j_values), k_values=list(k_values), norms=norms)
    return table.model_copy(update={"decay_exponent": fit_decay_exponent(table, floor)})


def fit_decay_exponent(table: BlockNormTable, floor: float = 1e-14) -> float | None:
    """log max‖block‖ 대 log⟨d⟩ 최소제곱 기울기의 부호 반전"""
    by_d = table.by_distance()
    if len(by_d) < 2:
        return None
    top = max(by_d.values())
    if top == 0.0:
        return None
    d = np.array(list(by_d.keys()), dtype=float)
    values = np.maximum(np.array(list(by_d.values())), floor * top)
    slope = np.polyfit(np.log(np.sqrt(1 + d**2)), np.log(values), 1)[0]
    return float(-slope)
