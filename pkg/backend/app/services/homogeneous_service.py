# -*- coding: utf-8 -*-
"""
等質空間サービス

H = G/K の構造:
- 射影 π: G → H と作用 Φ（因子ごとの射影規則から構成）
- 速度の左自明化 ξ = T_g L_{g⁻¹}(ġ) とその逆
- 水平性判定、水平射影 ℋ
- 左自明化されたポテンシャル勾配（解析解 / 中心差分）
- T_e π の差分行列（𝔰 = ker T_e π の確認用）
"""

from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.linalg import svdvals

from app.core.config import settings
from app.core.exceptions import NotTangentError
from app.core.lie_algebra import compose, exp, hat, identity, vee
from app.models.geometry import (
    HomogeneousPoint,
    HomogeneousStructure,
    Metric,
    PotentialSpec,
    ProjectionRule,
)
from app.models.lie_group import AlgebraVector, FactorKind, GroupElement
from app.services.connection_service import ConnectionService

E3 = np.array([0.0, 0.0, 1.0])

TANGENT_TOLERANCE = 1e-9


class HorizontalityReport(NamedTuple):
    """水平性判定結果"""
    is_horizontal: bool
    residual: float


class HomogeneousService:
    """
    等質空間サービスクラス
    射影・作用・水平分解を担当
    """

    def __init__(self, structure: HomogeneousStructure, metric: Metric):
        self.structure = structure
        self.signature = structure.signature
        self.connections = ConnectionService(metric)

    # ===================
    # 射影・作用
    # ===================

    def pi(self, g: GroupElement) -> HomogeneousPoint:
        """射影 π: G → H"""
        self.signature.require(g.signature)
        factors = []
        for rule, value in zip(self.structure.rules, g.factors):
            if rule is ProjectionRule.SPHERE:
                factors.append(value @ E3)
            elif rule is ProjectionRule.QUOTIENT:
                continue
            else:
                # ROTATION / TRANSLATION（R·0 + r = r）/ ANGLE
                factors.append(value)
        return HomogeneousPoint(self.structure.point_kinds, tuple(factors))

    def action(self, a: GroupElement, q: HomogeneousPoint) -> HomogeneousPoint:
        """作用 Φ_a(q)"""
        self.signature.require(a.signature)
        factors = []
        point_index = 0
        for index, rule in enumerate(self.structure.rules):
            value = a.factors[index]
            if rule is ProjectionRule.QUOTIENT:
                continue
            current = q.factors[point_index]
            if rule in (ProjectionRule.SPHERE, ProjectionRule.ROTATION):
                factors.append(value @ current)
            elif rule is ProjectionRule.TRANSLATION:
                # Ψ_(R,r)(x) = Rx + r
                rotation = a.factors[index - 1] if self.signature.is_semidirect(index) else np.eye(3)
                factors.append(rotation @ current + value)
            else:
                factors.append(value + current)
            point_index += 1
        return HomogeneousPoint(q.kinds, tuple(factors))

    def base_point(self) -> HomogeneousPoint:
        """π(e)"""
        return self.pi(identity(self.signature))

    # ===================
    # 左自明化
    # ===================

    def left_trivialize(self, g: GroupElement, gdot: Tuple) -> AlgebraVector:
        """
        ξ = T_g L_{g⁻¹}(ġ)
        回転: vee(RᵀṘ) / 半直積並進: Rᵀṙ / 角度: ϑ̇
        """
        self.signature.require(g.signature)
        parts = []
        for index, kind in enumerate(self.signature.kinds):
            value = g.factors[index]
            velocity = gdot[index]
            if kind is FactorKind.SO3:
                body = value.T @ np.asarray(velocity, dtype=float).reshape(3, 3)
                asymmetry = float(np.linalg.norm(body + body.T))
                if asymmetry > TANGENT_TOLERANCE:
                    raise NotTangentError(f"因子 {index} の速度が接空間にありません: {asymmetry:.3e}")
                parts.append(vee(body))
            elif kind is FactorKind.R3:
                velocity = np.asarray(velocity, dtype=float).reshape(3)
                if self.signature.is_semidirect(index):
                    parts.append(g.factors[index - 1].T @ velocity)
                else:
                    parts.append(velocity)
            else:
                parts.append(np.array([float(np.asarray(velocity).reshape(-1)[0])]))
        return AlgebraVector(self.signature, np.concatenate(parts))

    def tangent_from_algebra(self, g: GroupElement, xi: AlgebraVector) -> Tuple:
        """ġ = T_e L_g(ξ)（left_trivialize の逆写像）"""
        self.signature.require(xi.signature)
        tangents = []
        for index, kind in enumerate(self.signature.kinds):
            coeffs = xi.factor(index)
            if kind is FactorKind.SO3:
                tangents.append(g.factors[index] @ hat(coeffs))
            elif kind is FactorKind.R3:
                if self.signature.is_semidirect(index):
                    tangents.append(g.factors[index - 1] @ coeffs)
                else:
                    tangents.append(coeffs.copy())
            else:
                tangents.append(float(coeffs[0]))
        return tuple(tangents)

    # ===================
    # 水平分解
    # ===================

    def vertical_part(self, xi: AlgebraVector) -> AlgebraVector:
        return self.connections.project(self.structure.vertical, xi)

    def horizontal_projection(self, xi: AlgebraVector) -> AlgebraVector:
        """水平射影 ℋ"""
        return self.connections.project(self.structure.horizontal, xi)

    def vertical_residual(self, xi: AlgebraVector) -> float:
        return self.connections.norm(self.vertical_part(xi))

    def is_horizontal(self, xi: AlgebraVector, tol: float = None) -> HorizontalityReport:
        """‖𝔓_𝔰 ξ‖ ≤ tol"""
        tol = settings.horizontality_tolerance if tol is None else tol
        residual = self.vertical_residual(xi)
        return HorizontalityReport(residual <= tol, residual)

    # ===================
    # ポテンシャル勾配
    # ===================

    def trivialized_gradient(
        self, potential: Optional[PotentialSpec], g: GroupElement, step: float = None
    ) -> AlgebraVector:
        """
        T_g L_{g⁻¹}(grad Ṽ), Ṽ = V∘π
        解析解がなければ指数座標での中心差分 + ♯
        """
        if potential is None:
            return AlgebraVector.zero(self.signature)
        if potential.gradient is not None:
            return potential.gradient(g)

        step = settings.finite_difference_step if step is None else step
        differential = np.zeros(self.signature.dim)
        for index in range(self.signature.dim):
            direction = AlgebraVector.basis(self.signature, index) * step
            forward = potential.value(self.pi(compose(g, exp(direction))))
            backward = potential.value(self.pi(compose(g, exp(-direction))))
            differential[index] = (forward - backward) / (2.0 * step)
        return AlgebraVector(self.signature, self.connections.metric.inverse @ differential)

    # ===================
    # T_e π
    # ===================

    def pushforward_matrix(self, step: float = None) -> np.ndarray:
        """T_e π の埋め込み座標での中心差分行列（列 = 基底ベクトルの像）"""
        step = settings.finite_difference_step if step is None else step
        columns = []
        for index in range(self.signature.dim):
            direction = AlgebraVector.basis(self.signature, index) * step
            forward = self.pi(exp(direction))
            backward = self.pi(exp(-direction))
            columns.append(forward.difference(backward) / (2.0 * step))
        return np.column_stack(columns)

    def vertical_kernel_residual(self, step: float = None) -> float:
        """
        ker T_e π と 𝔰 の一致度
        𝔰 の像のノルムの最大値（𝔥 上でランクが落ちていれば 1 − 最小特異値）
        """
        matrix = self.pushforward_matrix(step)
        vertical = self.structure.vertical.basis
        horizontal = self.structure.horizontal.basis
        vertical_image = float(np.max(np.linalg.norm(matrix @ vertical, axis=0))) if vertical.shape[1] else 0.0
        smallest = float(svdvals(matrix @ horizontal)[-1]) if horizontal.shape[1] else 1.0
        return max(vertical_image, 0.0 if smallest > 1e-3 else 1.0 - smallest)
