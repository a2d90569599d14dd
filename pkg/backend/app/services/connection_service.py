# -*- coding: utf-8 -*-
"""
接続サービス

リー代数上の計量構造:
- flat / sharp（音楽同型）
- 計量グラム・シュミット正規直交化、零化余ベクトル
- 直交射影 𝔓 と斜交射影 𝔭（直和 𝔥 = 𝔡 ⊕ 𝔣 用）
- 𝔤-接続・𝔡-接続・(𝔡,𝔣)-接続
"""

from typing import Sequence, Union

import numpy as np
from scipy.linalg import null_space, qr, solve_triangular, svdvals

from app.core.config import settings
from app.core.exceptions import NotComplementaryError, NotInSubspaceError, RankDeficientError
from app.core.lie_algebra import ad_matrix
from app.models.geometry import Metric, Subspace
from app.models.lie_group import AlgebraVector, CoAlgebraVector, Signature

RawBasis = Union[Sequence[AlgebraVector], np.ndarray]


class ConnectionService:
    """
    接続サービスクラス
    計量 ⟨·,·⟩_𝔤 に依存する演算をまとめて担当
    """

    def __init__(self, metric: Metric, rank_tolerance: float = None):
        self.metric = metric
        self.signature: Signature = metric.signature
        self.rank_tolerance = rank_tolerance if rank_tolerance is not None else settings.rank_tolerance

    # ===================
    # 内積・音楽同型
    # ===================

    def inner(self, xi: AlgebraVector, eta: AlgebraVector) -> float:
        """⟨ξ, η⟩_𝔤"""
        xi.signature.require(eta.signature)
        return float(xi.coeffs @ self.metric.gram @ eta.coeffs)

    def norm(self, xi: AlgebraVector) -> float:
        return float(np.sqrt(max(self.inner(xi, xi), 0.0)))

    def flat(self, xi: AlgebraVector) -> CoAlgebraVector:
        """♭: 𝔤 → 𝔤*"""
        return CoAlgebraVector(self.signature, self.metric.gram @ xi.coeffs)

    def sharp(self, mu: CoAlgebraVector) -> AlgebraVector:
        """♯: 𝔤* → 𝔤"""
        return AlgebraVector(self.signature, self.metric.inverse @ mu.coeffs)

    # ===================
    # 部分空間
    # ===================

    def _raw_matrix(self, raw_basis: RawBasis) -> np.ndarray:
        if isinstance(raw_basis, np.ndarray):
            matrix = np.asarray(raw_basis, dtype=float)
            return matrix.reshape(self.signature.dim, -1) if matrix.size else np.zeros((self.signature.dim, 0))
        if len(raw_basis) == 0:
            return np.zeros((self.signature.dim, 0))
        for vector in raw_basis:
            self.signature.require(vector.signature)
        return np.column_stack([vector.coeffs for vector in raw_basis])

    def weighted_singular_values(self, matrix: np.ndarray) -> np.ndarray:
        """計量重み付き基底 Lᵀ B の特異値"""
        if matrix.shape[1] == 0:
            return np.array([])
        return svdvals(self.metric.lower.T @ matrix)

    def orthonormalize(self, raw_basis: RawBasis) -> Subspace:
        """
        計量 ⟨·,·⟩_𝔤 でのグラム・シュミット
        零化余ベクトルはペアリング行列の零空間として計算
        """
        raw = self._raw_matrix(raw_basis)
        dim = self.signature.dim
        if raw.shape[1] == 0:
            return Subspace(self.signature, np.zeros((dim, 0)), np.eye(dim), raw)

        singular_values = self.weighted_singular_values(raw)
        smallest = float(singular_values[-1]) if raw.shape[1] <= dim else 0.0
        if raw.shape[1] > dim or smallest <= self.rank_tolerance:
            raise RankDeficientError(
                f"基底が一次従属です: 最小特異値 {smallest:.3e}", singular_value=smallest
            )

        # Lᵀ B = Q R より B R⁻¹ は計量正規直交
        _, upper = qr(self.metric.lower.T @ raw, mode="economic")
        basis = solve_triangular(upper, raw.T, trans="T").T
        if basis.shape[1] == dim:
            annihilator = np.zeros((0, dim))
        else:
            annihilator = null_space(basis.T).T
        return Subspace(self.signature, basis, annihilator, raw)

    def complement(self, sub: Subspace) -> Subspace:
        """計量直交補空間（零化余ベクトルの ♯ で張る）"""
        if sub.annihilator.shape[0] == 0:
            return self.orthonormalize([])
        return self.orthonormalize(self.metric.inverse @ sub.annihilator.T)

    def span_sum(self, first: Subspace, second: Subspace) -> Subspace:
        """部分空間の和（直和であること）"""
        return self.orthonormalize(np.hstack([first.basis, second.basis]))

    def project(self, sub: Subspace, xi: AlgebraVector) -> AlgebraVector:
        """直交射影 𝔓: 𝔤 → sub"""
        self.signature.require(xi.signature)
        coefficients = sub.basis.T @ (self.metric.gram @ xi.coeffs)
        return AlgebraVector(self.signature, sub.basis @ coefficients)

    def membership_residual(self, sub: Subspace, xi: AlgebraVector) -> float:
        """‖ξ − 𝔓ξ‖_𝔤"""
        return self.norm(xi - self.project(sub, xi))

    def _require_member(self, sub: Subspace, xi: AlgebraVector, tolerance: float) -> None:
        residual = self.membership_residual(sub, xi)
        if residual > tolerance:
            raise NotInSubspaceError(f"部分空間に属しません: 残差 {residual:.3e}", residual=residual)

    def check_complementary(self, onto: Subspace, along: Subspace) -> float:
        """直和判定（結合基底の最小特異値を返す）"""
        stacked = np.hstack([onto.basis, along.basis])
        if stacked.shape[1] == 0:
            return float("inf")
        if stacked.shape[1] > self.signature.dim:
            raise NotComplementaryError("部分空間の次元和が 𝔤 の次元を超えています", singular_value=0.0)
        smallest = float(self.weighted_singular_values(stacked)[-1])
        if smallest <= self.rank_tolerance:
            raise NotComplementaryError(
                f"直和が成立しません: 最小特異値 {smallest:.3e}", singular_value=smallest
            )
        return smallest

    def oblique_project(self, onto: Subspace, along: Subspace, xi: AlgebraVector) -> AlgebraVector:
        """
        斜交射影 𝔭_onto（核は along）
        ξ = p_onto + p_along の onto 成分を返す
        """
        self.signature.require(xi.signature)
        self.check_complementary(onto, along)
        stacked = np.hstack([onto.basis, along.basis])
        coefficients, *_ = np.linalg.lstsq(stacked, xi.coeffs, rcond=None)
        return AlgebraVector(self.signature, onto.basis @ coefficients[: onto.dim])

    # ===================
    # 接続
    # ===================

    def g_connection(self, xi: AlgebraVector, eta: AlgebraVector) -> AlgebraVector:
        """
        𝔤-接続
        ∇^𝔤_ξ η = ½([ξ, η] − ♯ad*_ξ ♭η − ♯ad*_η ♭ξ)
        """
        xi.signature.require(eta.signature)
        gram = self.metric.gram
        ad_xi = ad_matrix(xi)
        ad_eta = ad_matrix(eta)
        bracket = ad_xi @ eta.coeffs
        dual = ad_xi.T @ (gram @ eta.coeffs) + ad_eta.T @ (gram @ xi.coeffs)
        return AlgebraVector(self.signature, 0.5 * (bracket - self.metric.inverse @ dual))

    def self_connection(self, xi: AlgebraVector) -> AlgebraVector:
        """∇^𝔤_ξ ξ = −♯ad*_ξ ♭ξ（g_connection(ξ, ξ) と同値）"""
        self.signature.require(xi.signature)
        dual = ad_matrix(xi).T @ (self.metric.gram @ xi.coeffs)
        return AlgebraVector(self.signature, -(self.metric.inverse @ dual))

    def d_connection(
        self, d: Subspace, xi: AlgebraVector, eta: AlgebraVector, tolerance: float = 1e-10
    ) -> AlgebraVector:
        """𝔡-接続 ∇^𝔡_ξ η = 𝔓(∇^𝔤_ξ η)（ξ, η ∈ 𝔡）"""
        self._require_member(d, xi, tolerance)
        self._require_member(d, eta, tolerance)
        return self.project(d, self.g_connection(xi, eta))

    def df_connection(
        self,
        d: Subspace,
        f_plus_s: Subspace,
        xi: AlgebraVector,
        eta: AlgebraVector,
        tolerance: float = 1e-10,
    ) -> AlgebraVector:
        """
        (𝔡,𝔣)-接続
        ∇^{𝔡,𝔣}_ξ η = ∇^𝔤_ξ η + (∇^𝔤_ξ 𝔭_𝔣)(η)
        ξ, η ∈ 𝔡 のときは 𝔭_𝔡(∇^𝔤_ξ η) に一致
        """
        self.check_complementary(d, f_plus_s)
        connection = self.g_connection(xi, eta)
        if (
            self.membership_residual(d, xi) <= tolerance
            and self.membership_residual(d, eta) <= tolerance
        ):
            return self.oblique_project(d, f_plus_s, connection)

        # (∇_ξ 𝔭_𝔣)(η) = ∇_ξ(𝔭_𝔣 η) − 𝔭_𝔣(∇_ξ η)
        projected_eta = self.oblique_project(f_plus_s, d, eta)
        derivative = self.g_connection(xi, projected_eta) - self.oblique_project(f_plus_s, d, connection)
        return connection + derivative
