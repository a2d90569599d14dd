# -*- coding: utf-8 -*-
"""
運動方程式・積分サービス

左自明化された運動方程式の右辺:
- 測地線（Euler–Poincaré）ξ̇ = −∇^𝔤_ξ ξ
- 力学系 ξ̇ = −∇^𝔤_ξ ξ − grad
- 非ホロノミック ξ̇ = −∇^𝔡_ξ ξ − 𝔓(grad)
- 入力付き ξ̇ = −∇^𝔤_ξ ξ − grad + ũᵇ f_b
- (𝔡,𝔣)-接続の測地線 ξ̇ = −∇^{𝔡,𝔣}_ξ ξ

積分は4段 Runge–Kutta–Munthe-Kaas（g は指数写像で再構成、再正規化なし）
"""

import math
import time
from typing import Callable, Optional

import numpy as np
import structlog

from app.core.config import settings
from app.core.exceptions import ConfigError, ControlDimensionError, NonFiniteError
from app.core.lie_algebra import compose, dexpinv, exp, orthonormality_defect
from app.models.dynamics import INTEGRATION_SCHEME, Diagnostics, RightHandSide, Sample, State, Trajectory
from app.models.geometry import Metric, PotentialSpec, Subspace
from app.models.lie_group import AlgebraVector
from app.services.homogeneous_service import HomogeneousService

logger = structlog.get_logger(__name__)

ConstraintMonitor = Callable[[State], np.ndarray]
Controller = Callable[[State], np.ndarray]
InputMap = Callable[[State], np.ndarray]

# 古典的 RK4 の Butcher 表
RK4_A = ((), (0.5,), (0.0, 0.5), (0.0, 0.0, 1.0))
RK4_B = (1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0)
RK4_C = (0.0, 0.5, 0.5, 1.0)


class DynamicsService:
    """
    運動方程式サービスクラス
    右辺の生成・1ステップ積分・軌道シミュレーションを担当
    """

    def __init__(
        self,
        metric: Metric,
        homogeneous: HomogeneousService,
        potential: Optional[PotentialSpec] = None,
    ):
        self.metric = metric
        self.homogeneous = homogeneous
        self.connections = homogeneous.connections
        self.potential = potential
        self.signature = metric.signature

    # ===================
    # 右辺
    # ===================

    def geodesic_rhs(self, state: State) -> AlgebraVector:
        """ξ̇ = −∇^𝔤_ξ ξ（= ♯ad*_ξ ♭ξ）"""
        return -self.connections.self_connection(state.xi)

    def gradient(self, state: State) -> AlgebraVector:
        """左自明化ポテンシャル勾配"""
        return self.homogeneous.trivialized_gradient(self.potential, state.g)

    def drift(self, state: State) -> AlgebraVector:
        """∇^𝔤_ξ ξ + T_g L_{g⁻¹}(grad Ṽ)"""
        connection = self.connections.self_connection(state.xi)
        if self.potential is None:
            return connection
        return connection + self.gradient(state)

    def mechanical_rhs(self, state: State) -> AlgebraVector:
        """ξ̇ = −∇^𝔤_ξ ξ − T_g L_{g⁻¹}(grad Ṽ)"""
        return -self.drift(state)

    def nonholonomic_rhs(self, d: Subspace) -> RightHandSide:
        """ξ̇ = −∇^𝔡_ξ ξ − 𝔓(grad)（左不変な 𝔡）"""
        tolerance = settings.membership_tolerance

        def rhs(state: State) -> AlgebraVector:
            drift = self.connections.d_connection(d, state.xi, state.xi, tolerance)
            if self.potential is not None:
                drift = drift + self.connections.project(d, self.gradient(state))
            return -drift

        return rhs

    def controlled_rhs(self, controller: Controller, inputs: InputMap) -> RightHandSide:
        """
        ξ̇ = −∇^𝔤_ξ ξ − grad + Σ ũᵇ f_b
        inputs は状態ごとの入力方向 f_b を列に持つ行列
        """

        def rhs(state: State) -> AlgebraVector:
            return self.apply_control(state, controller(state), inputs(state))

        return rhs

    def apply_control(
        self,
        state: State,
        control: np.ndarray,
        directions: np.ndarray,
        drift: Optional[AlgebraVector] = None,
    ) -> AlgebraVector:
        """
        入力付き右辺の1回評価
        control の長さは入力方向の数と一致すること（drift は計算済みなら再利用）
        """
        control = np.asarray(control, dtype=float).reshape(-1)
        directions = np.asarray(directions, dtype=float).reshape(self.signature.dim, -1)
        if control.shape[0] != directions.shape[1]:
            raise ControlDimensionError(
                f"制御入力の長さ {control.shape[0]} が入力方向の数 {directions.shape[1]} と一致しません",
                expected=directions.shape[1],
                actual=control.shape[0],
            )
        drift = self.drift(state) if drift is None else drift
        forcing = directions @ control if control.size else np.zeros(self.signature.dim)
        return AlgebraVector(self.signature, forcing - drift.coeffs)

    def intrinsic_rhs(self, d: Subspace, f_plus_s: Subspace) -> RightHandSide:
        """ξ̇ = −∇^{𝔡,𝔣}_ξ ξ（V = 0、𝔡 固定の閉ループ系）"""
        tolerance = settings.membership_tolerance

        def rhs(state: State) -> AlgebraVector:
            return -self.connections.df_connection(d, f_plus_s, state.xi, state.xi, tolerance)

        return rhs

    # ===================
    # 診断
    # ===================

    def potential_energy(self, state: State) -> float:
        if self.potential is None:
            return 0.0
        return float(self.potential.value(self.homogeneous.pi(state.g)))

    def kinetic_energy(self, state: State) -> float:
        return 0.5 * self.connections.inner(state.xi, state.xi)

    def diagnose(self, state: State, monitor: Optional[ConstraintMonitor] = None) -> Diagnostics:
        """診断値の計算（拘束残差は monitor が返す |μᵃ(ξ)|）"""
        kinetic = self.kinetic_energy(state)
        residuals = np.abs(monitor(state)) if monitor is not None else np.array([])
        return Diagnostics(
            energy=kinetic + self.potential_energy(state),
            kinetic_energy=kinetic,
            vertical_residual=self.homogeneous.vertical_residual(state.xi),
            constraint_residuals=residuals,
            orthonormality_defect=orthonormality_defect(state.g),
        )

    # ===================
    # 積分
    # ===================

    def step(self, rhs: RightHandSide, state: State, h: float) -> State:
        """
        RKMK4 の1ステップ
        g_i = g₀·exp(u_i)、ξ_i = ξ₀ + Σ a_ij k_j、u̇ = dexp⁻¹_{−u}(ξ)
        """
        if h <= 0.0:
            raise ConfigError("h", "must be positive")

        signature = self.signature
        g0, xi0 = state.g, state.xi.coeffs
        group_slopes = []
        algebra_slopes = []

        for i in range(4):
            u = np.zeros(signature.dim)
            v = np.zeros(signature.dim)
            for a_ij, k_g, k_xi in zip(RK4_A[i], group_slopes, algebra_slopes):
                if a_ij:
                    u += a_ij * k_g
                    v += a_ij * k_xi
            xi = AlgebraVector(signature, xi0 + v)
            if i == 0:
                stage = State(g0, xi, state.t)
                group_slopes.append(h * xi.coeffs)
            else:
                stage = State(compose(g0, exp(AlgebraVector(signature, u))), xi, state.t + RK4_C[i] * h)
                group_slopes.append(h * dexpinv(AlgebraVector(signature, -u), xi).coeffs)
            algebra_slopes.append(h * rhs(stage).coeffs)

        u = sum(b_i * k_g for b_i, k_g in zip(RK4_B, group_slopes))
        v = sum(b_i * k_xi for b_i, k_xi in zip(RK4_B, algebra_slopes))
        return State(compose(g0, exp(AlgebraVector(signature, u))), AlgebraVector(signature, xi0 + v), state.t + h)

    def sample(self, state: State, monitor: Optional[ConstraintMonitor] = None) -> Sample:
        return Sample(
            t=state.t,
            g=state.g,
            xi=state.xi,
            q=self.homogeneous.pi(state.g),
            diagnostics=self.diagnose(state, monitor),
        )

    def simulate(
        self,
        rhs: RightHandSide,
        initial: State,
        T: float,
        h: float,
        monitor: Optional[ConstraintMonitor] = None,
    ) -> Trajectory:
        """
        固定刻みでの積分
        ceil(T/h) ステップ、最終ステップは T に合わせて短縮
        """
        if T <= 0.0:
            raise ConfigError("T", "must be positive")
        if h <= 0.0:
            raise ConfigError("h", "must be positive")
        if h > T:
            raise ConfigError("h", "exceeds horizon")

        # T/h の丸め誤差で余分な極小ステップが入らないようにする
        n_steps = max(1, math.ceil(T / h - 1e-9))
        t0 = initial.t
        logger.info("シミュレーション開始", steps=n_steps, horizon=T, step=h, scheme=INTEGRATION_SCHEME)
        started = time.perf_counter()

        samples = [self.sample(initial, monitor)]
        state = initial
        for index in range(1, n_steps + 1):
            target = t0 + T if index == n_steps else t0 + index * h
            state = self.step(rhs, state, target - state.t)
            state = State(state.g, state.xi, target)
            if not state.is_finite():
                logger.error("非有限値を検出", step_index=index, t=target)
                raise NonFiniteError(f"ステップ {index} で非有限値が発生しました", step_index=index)
            samples.append(self.sample(state, monitor))

        logger.info(
            "シミュレーション完了",
            steps=n_steps,
            elapsed=round(time.perf_counter() - started, 3),
        )
        return Trajectory(samples=samples, step=h, scheme=INTEGRATION_SCHEME)
