# -*- coding: utf-8 -*-
"""
仮想非ホロノミック拘束サービス

𝔥 = 𝔡 ⊕ 𝔣 のもとで 𝔡 を閉ループの不変部分空間にする一意な制御則:
    [μᵃ(f_b)] u = μᵃ(∇^𝔤_ξ ξ + grad) − μ̇ᵃ(ξ)
- 零化余ベクトル μᵃ は 𝔥 内（𝔰 上で 0）
- 状態依存の 𝔡 は μ̇ᵃ 項で扱う（解析解、なければ整列した中心差分）
- 同じ拘束を反力で実現する物理的な非ホロノミック系も提供
"""

from typing import Optional, Tuple

import numpy as np
import structlog
from scipy.linalg import lu_factor, lu_solve, pinv, svdvals

from app.core.config import settings
from app.core.exceptions import ConfigError, NotComplementaryError, NotOnConstraintError, SingularDecouplingError
from app.core.lie_algebra import compose, exp
from app.models.control import ControlOutput, DriftDecomposition, ReconstructionReport, TransversalityReport
from app.models.dynamics import RightHandSide, State, Trajectory
from app.models.geometry import Subspace
from app.models.lie_group import AlgebraVector, frozen_array
from app.models.scenario import ScenarioSpec
from app.services.dynamics_service import DynamicsService

logger = structlog.get_logger(__name__)


class VirtualConstraintService:
    """
    仮想拘束サービスクラス
    横断性判定・ドリフト分解・制御則合成・閉ループ右辺を担当
    """

    def __init__(self, scenario: ScenarioSpec, dynamics: DynamicsService):
        if scenario.constraint is None:
            raise ConfigError("scenario", f"{scenario.name} has no constraint")
        self.scenario = scenario
        self.spec = scenario.constraint
        self.dynamics = dynamics
        self.connections = dynamics.connections
        self.vertical = scenario.structure.vertical
        self.signature = scenario.signature
        self._vertical_covectors = (self.connections.metric.gram @ self.vertical.basis).T
        # 𝔡 が状態に依存しない場合のみ使う（初回計算時に確定）
        self._constant_annihilator: Optional[np.ndarray] = None
        self._constant_decoupling: Optional[Tuple[np.ndarray, np.ndarray]] = None

    # ===================
    # 零化余ベクトル
    # ===================

    def constraint_subspace(self, state: State) -> Subspace:
        return self.spec.d_of_state(state)

    def input_subspace(self, state: State) -> Subspace:
        return self.spec.f_of_state(state)

    def input_directions(self, state: State) -> np.ndarray:
        """入力方向 f_b を列に持つ行列（正規化しない）"""
        if self.spec.inputs_of_state is not None:
            return np.asarray(self.spec.inputs_of_state(state), dtype=float).reshape(self.signature.dim, -1)
        return self.input_subspace(state).spanning

    def annihilator_within_horizontal(self, state: State) -> np.ndarray:
        """𝔡 ⊕ 𝔰 の零化余ベクトル（行）"""
        if self._constant_annihilator is not None:
            return self._constant_annihilator
        if self.spec.annihilator_of_state is not None:
            annihilator = np.atleast_2d(np.asarray(self.spec.annihilator_of_state(state), dtype=float))
        else:
            d = self.constraint_subspace(state)
            annihilator = self.connections.span_sum(d, self.vertical).annihilator
        if not self.spec.state_dependent:
            self._constant_annihilator = frozen_array(annihilator)
        return annihilator

    def constraint_rate(self, state: State, step: float = None) -> np.ndarray:
        """
        流れに沿った μ̇ᵃ
        差分では g·exp(±hξ) での基底を現在の基底へ整列（行空間への射影）してから差を取る
        """
        if self.spec.analytic:
            return np.atleast_2d(np.asarray(self.spec.annihilator_rate(state), dtype=float))
        current = self.annihilator_within_horizontal(state)
        if not self.spec.state_dependent:
            return np.zeros_like(current)

        step = settings.finite_difference_step if step is None else step
        aligned = []
        for sign in (1.0, -1.0):
            moved = State(compose(state.g, exp(sign * step * state.xi)), state.xi, state.t + sign * step)
            basis = self.annihilator_within_horizontal(moved)
            aligned.append(current @ (pinv(basis) @ basis))
        return (aligned[0] - aligned[1]) / (2.0 * step)

    def constraint_residuals(self, state: State) -> np.ndarray:
        """μᵃ(ξ)"""
        return self.annihilator_within_horizontal(state) @ state.xi.coeffs

    # ===================
    # 横断性・分解
    # ===================

    def check_transversality(self, state: State, tolerance: float = None) -> TransversalityReport:
        """𝔥 = 𝔡 ⊕ 𝔣 と [μᵃ(f_b)] の可逆性（報告のみ）"""
        tolerance = settings.transversality_tolerance if tolerance is None else tolerance
        d = self.constraint_subspace(state)
        f = self.input_subspace(state)
        annihilator = self.annihilator_within_horizontal(state)
        horizontal_dim = self.signature.dim - self.vertical.dim

        stacked = np.hstack([d.basis, f.basis])
        stacked_values = self.connections.weighted_singular_values(stacked)
        stacked_smallest = float(stacked_values[-1]) if stacked.shape[1] <= self.signature.dim else 0.0
        if stacked.shape[1] < horizontal_dim:
            stacked_smallest = 0.0

        decoupling = annihilator @ self.input_directions(state)
        if decoupling.shape[0] == decoupling.shape[1] and decoupling.size:
            decoupling_smallest = float(svdvals(decoupling)[-1])
        else:
            decoupling_smallest = 0.0

        return TransversalityReport(
            stacked_singular_value=stacked_smallest,
            decoupling_singular_value=decoupling_smallest,
            tolerance=tolerance,
            constraint_dim=d.dim,
            input_dim=f.dim,
            horizontal_dim=horizontal_dim,
        )

    def decompose_drift(self, state: State, v: AlgebraVector) -> DriftDecomposition:
        """v = η + τᵇ f_b (+ 鉛直成分)、η ∈ 𝔡"""
        return self._decompose(self.constraint_subspace(state), self.input_directions(state), v)

    def _decompose(self, d: Subspace, inputs: np.ndarray, v: AlgebraVector) -> DriftDecomposition:
        stacked = np.hstack([d.basis, inputs, self.vertical.basis])
        if stacked.shape[1] != self.signature.dim:
            raise NotComplementaryError(
                f"𝔡 ⊕ 𝔣 ⊕ 𝔰 の次元 {stacked.shape[1]} が {self.signature.dim} と一致しません",
                singular_value=0.0,
            )
        # 直和判定は f_b を計量で正規化した基底で行う
        lengths = np.sqrt(np.sum(inputs * (self.connections.metric.gram @ inputs), axis=0))
        lengths = np.where(lengths > 0.0, lengths, 1.0)
        normalized = np.hstack([d.basis, inputs / lengths, self.vertical.basis])
        smallest = float(self.connections.weighted_singular_values(normalized)[-1])
        if smallest <= self.connections.rank_tolerance:
            raise NotComplementaryError(
                f"直和が成立しません: 最小特異値 {smallest:.3e}", singular_value=smallest
            )

        coefficients = lu_solve(lu_factor(stacked), v.coeffs)
        k_d, k_f = d.dim, inputs.shape[1]
        return DriftDecomposition(
            eta=AlgebraVector(self.signature, d.basis @ coefficients[:k_d]),
            tau=coefficients[k_d:k_d + k_f],
            vertical=AlgebraVector(self.signature, self.vertical.basis @ coefficients[k_d + k_f:]),
        )

    # ===================
    # 制御則
    # ===================

    def drift(self, state: State) -> AlgebraVector:
        """∇^𝔤_ξ ξ + T_g L_{g⁻¹}(grad Ṽ)"""
        return self.dynamics.drift(state)

    def _require_invertible(self, decoupling: np.ndarray) -> float:
        smallest = float(svdvals(decoupling)[-1]) if decoupling.size else 0.0
        if decoupling.shape[0] != decoupling.shape[1] or smallest <= settings.rank_tolerance:
            raise SingularDecouplingError(
                f"[μᵃ(f_b)] が特異です: 最小特異値 {smallest:.3e}", singular_value=smallest
            )
        return smallest

    def _factor_decoupling(self, annihilator: np.ndarray, inputs: np.ndarray, check: bool):
        """
        [μᵃ(f_b)] の LU 分解
        特異値は check=True と定数分解の初回に確認し、それ以外はピボットの大きさで判定
        """
        if self._constant_decoupling is not None:
            return self._constant_decoupling
        decoupling = annihilator @ inputs
        constant = not self.spec.state_dependent
        if check or constant or decoupling.shape[0] != decoupling.shape[1] or not decoupling.size:
            self._require_invertible(decoupling)
        factor = lu_factor(decoupling, check_finite=False)
        if np.min(np.abs(np.diag(factor[0]))) <= settings.rank_tolerance:
            self._require_invertible(decoupling)
        if constant:
            self._constant_decoupling = factor
        return factor

    def _control_law(self, state: State, check: bool = False) -> Tuple[np.ndarray, AlgebraVector, np.ndarray]:
        """[μᵃ(f_b)] u = μᵃ(drift) − μ̇ᵃ(ξ) を解き、(u, drift, f_b) を返す"""
        annihilator = self.annihilator_within_horizontal(state)
        inputs = self.input_directions(state)
        factor = self._factor_decoupling(annihilator, inputs, check)
        drift = self.drift(state)
        target = annihilator @ drift.coeffs - self.constraint_rate(state) @ state.xi.coeffs
        return lu_solve(factor, target, check_finite=False), drift, inputs

    def solve_control(self, state: State, strict: bool = True) -> ControlOutput:
        """
        一意な制御則 ũ*
        strict=False なら 𝔡 からの微小なずれを許す
        """
        d = self.constraint_subspace(state)
        if strict:
            residual = self.connections.membership_residual(d, state.xi)
            if residual > settings.membership_tolerance:
                raise NotOnConstraintError(f"ξ が 𝔡 上にありません: 残差 {residual:.3e}", residual=residual)

        u, drift, inputs = self._control_law(state, check=True)
        xi_dot = inputs @ u - drift.coeffs
        annihilator = self.annihilator_within_horizontal(state)
        rate = self.constraint_rate(state)
        residual = float(np.max(np.abs(annihilator @ xi_dot + rate @ state.xi.coeffs)))
        return ControlOutput(u=u, residual=residual, decomposition=self._decompose(d, inputs, drift))

    def closed_loop_rhs(self) -> RightHandSide:
        """
        入力付き右辺 ξ̇ = −drift + ũᵇ f_b に ũ* を代入した閉ループ系
        RK の中間段の ξ は 𝔡 への所属を確認しない
        """

        def rhs(state: State) -> AlgebraVector:
            u, drift, inputs = self._control_law(state)
            return self.dynamics.apply_control(state, u, inputs, drift)

        return rhs

    # ===================
    # 物理的な非ホロノミック系
    # ===================

    def full_annihilator(self, state: State) -> np.ndarray:
        """𝔡 の 𝔤 内の零化余ベクトル: 𝔥 内の μᵃ と ♭(𝔰 の基底)"""
        return np.vstack([self.annihilator_within_horizontal(state), self._vertical_covectors])

    def nonholonomic_rhs(self) -> RightHandSide:
        """
        反力 λ_a ♯μᵃ で拘束を実現する（入力なし）
        (N G⁻¹ Nᵀ) λ = N·drift − Ṅ ξ
        """
        inverse = self.connections.metric.inverse

        def rhs(state: State) -> AlgebraVector:
            covectors = self.full_annihilator(state)
            rate = np.vstack([self.constraint_rate(state), np.zeros((self.vertical.dim, self.signature.dim))])
            drift = self.drift(state)
            forces = inverse @ covectors.T
            multipliers = np.linalg.solve(
                covectors @ forces, covectors @ drift.coeffs - rate @ state.xi.coeffs
            )
            return AlgebraVector(self.signature, -drift.coeffs + forces @ multipliers)

        return rhs

    # ===================
    # 再構成チェック
    # ===================

    def reconstruction_check(self, trajectory: Optional[Trajectory]) -> ReconstructionReport:
        """軌道全体での鉛直残差と拘束残差の最大値"""
        if trajectory is None or len(trajectory) == 0:
            return ReconstructionReport(samples=0, max_vertical_residual=0.0, max_constraint_residual=0.0)

        homogeneous = self.dynamics.homogeneous
        worst_vertical = 0.0
        worst_constraint = 0.0
        for sample in trajectory.samples:
            state = sample.state
            worst_vertical = max(worst_vertical, homogeneous.vertical_residual(state.xi))
            residuals = np.abs(self.constraint_residuals(state))
            if residuals.size:
                worst_constraint = max(worst_constraint, float(np.max(residuals)))

        report = ReconstructionReport(
            samples=len(trajectory),
            max_vertical_residual=worst_vertical,
            max_constraint_residual=worst_constraint,
        )
        logger.debug("再構成チェック", scenario=self.scenario.name, **report.__dict__)
        return report
