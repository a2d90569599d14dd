# -*- coding: utf-8 -*-
"""
接続サービステスト

- flat / sharp
- 正規直交化と零化余ベクトル
- 直交射影・斜交射影
- 𝔤-接続・𝔡-接続・(𝔡,𝔣)-接続
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.exceptions import NotComplementaryError, NotInSubspaceError, RankDeficientError
from app.core.lie_algebra import ad, random_algebra
from app.models.geometry import Metric
from app.models.lie_group import SO3_S1, SO3_SO3, AlgebraVector
from app.services.connection_service import ConnectionService

INERTIA = np.array([1.0, 2.0, 3.0])


@pytest.fixture
def sphere_metric():
    return Metric.block_diagonal(SO3_SO3, np.concatenate([np.ones(3), INERTIA]))


@pytest.fixture
def service(sphere_metric):
    return ConnectionService(sphere_metric)


def rolling_constraint(service: ConnectionService):
    eye = np.eye(6)
    return service.orthonormalize(np.array([-eye[0] + eye[3], -eye[1] + eye[4], eye[5]]).T)


class TestMusicalIsomorphisms:
    """flat / sharp テスト"""

    def test_identity_metric_flat(self, rng):
        """単位計量では flat は係数をそのまま返す"""
        service = ConnectionService(Metric.identity(SO3_S1))
        xi = random_algebra(SO3_S1, rng)
        assert_allclose(service.flat(xi).coeffs, xi.coeffs)

    def test_block_metric_flat(self, service):
        """flat(Π, Ω) = (Π, 𝕁Ω)"""
        xi = AlgebraVector(SO3_SO3, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        assert_allclose(service.flat(xi).coeffs, [1.0, 2.0, 3.0, 4.0, 10.0, 18.0])

    def test_sharp_inverts_flat(self, service, rng):
        """sharp(flat(ξ)) = ξ（1000サンプル）"""
        for _ in range(1000):
            xi = random_algebra(SO3_SO3, rng)
            assert np.max(np.abs(service.sharp(service.flat(xi)).coeffs - xi.coeffs)) <= 1e-12


class TestOrthonormalize:
    """正規直交化テスト"""

    def test_orthonormal_basis(self, service, rng):
        """basisᵀ G basis = I、元の基底は新基底から再構成できる"""
        raw = rng.standard_normal((6, 3))
        sub = service.orthonormalize(raw)
        gram = service.metric.gram
        assert_allclose(sub.basis.T @ gram @ sub.basis, np.eye(3), atol=1e-10)
        coefficients = np.linalg.lstsq(sub.basis, raw, rcond=None)[0]
        assert_allclose(sub.basis @ coefficients, raw, atol=1e-10)
        assert_allclose(sub.annihilator @ sub.basis, 0.0, atol=1e-10)
        assert sub.annihilator.shape == (3, 6)

    def test_fixed_point(self):
        """正規直交な入力は同じ部分空間を返す"""
        service = ConnectionService(Metric.identity(SO3_SO3))
        sub = service.orthonormalize(np.eye(6)[:, :2])
        assert_allclose(np.abs(sub.basis), np.eye(6)[:, :2], atol=1e-12)

    def test_rolling_constraint_annihilator(self):
        """𝕁 = I での 𝔡 ⊕ 𝔰 の零化余ベクトルは (e₁,e₁), (e₂,e₂) の張る空間"""
        service = ConnectionService(Metric.identity(SO3_SO3))
        d = rolling_constraint(service)
        vertical = service.orthonormalize(np.eye(6)[:, [2]])
        annihilator = service.span_sum(d, vertical).annihilator
        expected = np.array([[1.0, 0.0, 0.0, 1.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0, 1.0, 0.0]])
        assert annihilator.shape == (2, 6)
        assert np.linalg.matrix_rank(np.vstack([annihilator, expected]), tol=1e-10) == 2
        assert d.dim == 3

    def test_duplicated_column_rejected(self, service):
        """一次従属な入力は RankDeficientError"""
        column = np.array([1.0, 0.0, 0.0, 1.0, 0.0, 0.0])
        with pytest.raises(RankDeficientError) as exc_info:
            service.orthonormalize(np.column_stack([column, column]))
        assert exc_info.value.singular_value <= 1e-10

    def test_spanning_kept(self, service):
        """入力方向は正規化せずに保持"""
        raw = np.array([[2.0, 0.0, 0.0, 2.0, 0.0, 0.0]]).T
        sub = service.orthonormalize(raw)
        assert_allclose(sub.spanning, raw)

    def test_complement(self, service, rng):
        """補空間は計量直交で、次元の和が dim 𝔤"""
        sub = service.orthonormalize(rng.standard_normal((6, 2)))
        complement = service.complement(sub)
        assert complement.dim == 4
        assert_allclose(sub.basis.T @ service.metric.gram @ complement.basis, 0.0, atol=1e-10)


class TestProjection:
    """射影テスト"""

    def test_projector_identities(self, service, rng):
        """冪等・自己随伴・補空間との和が恒等写像（1000サンプル）"""
        d = rolling_constraint(service)
        complement = service.complement(d)
        for _ in range(1000):
            xi, eta = random_algebra(SO3_SO3, rng), random_algebra(SO3_SO3, rng)
            p_xi = service.project(d, xi)
            assert np.max(np.abs(service.project(d, p_xi).coeffs - p_xi.coeffs)) <= 1e-11
            assert abs(service.inner(p_xi, eta) - service.inner(xi, service.project(d, eta))) <= 1e-11
            total = p_xi + service.project(complement, xi) - xi
            assert np.max(np.abs(total.coeffs)) <= 1e-11

    def test_member_unchanged(self, service):
        """部分空間の元は射影で変わらない"""
        d = rolling_constraint(service)
        xi = AlgebraVector(SO3_SO3, [-0.1, -0.2, 0.0, 0.1, 0.2, 0.3])
        assert_allclose(service.project(d, xi).coeffs, xi.coeffs, atol=1e-12)

    def test_horizontal_projection_kills_vertical_component(self, service):
        """𝔥 への射影は第1因子の ê₃ 成分を消す"""
        vertical = service.orthonormalize(np.eye(6)[:, [2]])
        horizontal = service.complement(vertical)
        xi = AlgebraVector(SO3_SO3, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        assert_allclose(service.project(horizontal, xi).coeffs, [1.0, 2.0, 0.0, 4.0, 5.0, 6.0], atol=1e-12)


class TestObliqueProjection:
    """斜交射影テスト"""

    def test_decomposition(self, service, rng):
        """p_onto + p_along = id、p_onto∘p_along = 0"""
        onto = service.orthonormalize(rng.standard_normal((6, 2)))
        along = service.orthonormalize(rng.standard_normal((6, 4)))
        for _ in range(100):
            xi = random_algebra(SO3_SO3, rng)
            p = service.oblique_project(onto, along, xi)
            q = service.oblique_project(along, onto, xi)
            assert np.max(np.abs((p + q - xi).coeffs)) <= 1e-12
            assert np.max(np.abs(service.oblique_project(onto, along, q).coeffs)) <= 1e-12

    def test_members(self, service, rng):
        """onto の元は不変、along の元は 0"""
        onto = service.orthonormalize(rng.standard_normal((6, 3)))
        along = service.orthonormalize(rng.standard_normal((6, 3)))
        member = onto.vectors()[0]
        other = along.vectors()[1]
        assert_allclose(service.oblique_project(onto, along, member).coeffs, member.coeffs, atol=1e-12)
        assert_allclose(service.oblique_project(onto, along, other).coeffs, 0.0, atol=1e-12)

    def test_not_complementary(self, service, rng):
        """重なる部分空間は NotComplementaryError"""
        onto = service.orthonormalize(rng.standard_normal((6, 2)))
        with pytest.raises(NotComplementaryError):
            service.oblique_project(onto, onto, random_algebra(SO3_SO3, rng))


class TestGConnection:
    """𝔤-接続テスト"""

    def test_rolling_sphere_formula(self, service, rng):
        """第1因子 ½Π₁×Π₂、第2因子 ½(Ω₁×Ω₂ − 𝕁⁻¹(𝕁Ω₂×Ω₁ + 𝕁Ω₁×Ω₂))"""
        xi, eta = random_algebra(SO3_SO3, rng), random_algebra(SO3_SO3, rng)
        Pi1, Omega1 = xi.factor(0), xi.factor(1)
        Pi2, Omega2 = eta.factor(0), eta.factor(1)
        second = 0.5 * (
            np.cross(Omega1, Omega2)
            - (np.cross(INERTIA * Omega2, Omega1) + np.cross(INERTIA * Omega1, Omega2)) / INERTIA
        )
        expected = np.concatenate([0.5 * np.cross(Pi1, Pi2), second])
        assert_allclose(service.g_connection(xi, eta).coeffs, expected, atol=1e-13)

    def test_blade_formula(self, rng):
        """𝔰𝔬(3)×ℝ、単位計量: (½Π₁×Π₂, 0)"""
        service = ConnectionService(Metric.identity(SO3_S1))
        xi, eta = random_algebra(SO3_S1, rng), random_algebra(SO3_S1, rng)
        expected = np.concatenate([0.5 * np.cross(xi.factor(0), eta.factor(0)), [0.0]])
        assert_allclose(service.g_connection(xi, eta).coeffs, expected, atol=1e-14)

    def test_bi_invariant_metric(self, rng):
        """両側不変計量では ∇_ξ ξ = 0"""
        service = ConnectionService(Metric.identity(SO3_SO3))
        for _ in range(10):
            xi = random_algebra(SO3_SO3, rng)
            assert_allclose(service.g_connection(xi, xi).coeffs, 0.0, atol=1e-14)

    def test_self_connection(self, service, rng):
        """self_connection(ξ) は g_connection(ξ, ξ) と一致"""
        for _ in range(100):
            xi = random_algebra(SO3_SO3, rng)
            assert_allclose(service.self_connection(xi).coeffs, service.g_connection(xi, xi).coeffs, atol=1e-13)

    def test_metric_compatibility(self, service, rng):
        """⟨∇_ξ η, ζ⟩ + ⟨η, ∇_ξ ζ⟩ = 0（1000サンプル）"""
        for _ in range(1000):
            x, y, z = (random_algebra(SO3_SO3, rng) for _ in range(3))
            value = service.inner(service.g_connection(x, y), z) + service.inner(y, service.g_connection(x, z))
            assert abs(value) <= 1e-11

    def test_torsion_free(self, service, rng):
        """∇_ξ η − ∇_η ξ = [ξ, η]（1000サンプル）"""
        for _ in range(1000):
            x, y = random_algebra(SO3_SO3, rng), random_algebra(SO3_SO3, rng)
            difference = service.g_connection(x, y) - service.g_connection(y, x) - ad(x, y)
            assert np.max(np.abs(difference.coeffs)) <= 1e-11


class TestConstrainedConnections:
    """𝔡-接続・(𝔡,𝔣)-接続テスト"""

    def _in_d(self, d, rng):
        return AlgebraVector(SO3_SO3, d.basis @ rng.standard_normal(d.dim))

    def test_d_connection_is_projected(self, service, rng):
        """∇^𝔡 = 𝔓∘∇^𝔤、結果は 𝔡 に属し ξ と直交"""
        d = rolling_constraint(service)
        for _ in range(100):
            xi, eta = self._in_d(d, rng), self._in_d(d, rng)
            result = service.d_connection(d, xi, eta)
            assert_allclose(result.coeffs, service.project(d, service.g_connection(xi, eta)).coeffs, atol=1e-14)
            assert service.membership_residual(d, result) <= 1e-12
            assert abs(service.inner(service.d_connection(d, xi, xi), xi)) <= 1e-11

    def test_d_connection_full_space(self, service, rng):
        """𝔡 = 𝔤 なら 𝔤-接続に一致"""
        full = service.orthonormalize(np.eye(6))
        xi, eta = random_algebra(SO3_SO3, rng), random_algebra(SO3_SO3, rng)
        assert_allclose(service.d_connection(full, xi, eta).coeffs, service.g_connection(xi, eta).coeffs, atol=1e-12)

    def test_d_connection_rejects_outside(self, service):
        """𝔡 外の引数は NotInSubspaceError"""
        d = rolling_constraint(service)
        outside = AlgebraVector(SO3_SO3, [1.0, 0.0, 0.0, 1.0, 0.0, 0.0])
        with pytest.raises(NotInSubspaceError):
            service.d_connection(d, outside, outside)

    def _inputs_plus_vertical(self, service):
        eye = np.eye(6)
        inputs = [AlgebraVector(SO3_SO3, eye[0] + eye[3] / INERTIA[0]), AlgebraVector(SO3_SO3, eye[1] + eye[4] / INERTIA[1])]
        f = service.orthonormalize(inputs)
        vertical = service.orthonormalize(eye[:, [2]])
        return f, service.span_sum(f, vertical)

    def test_df_connection_on_constraint(self, service, rng):
        """ξ, η ∈ 𝔡 では 𝔭_𝔡(∇^𝔤_ξ η)"""
        d = rolling_constraint(service)
        _, f_plus_s = self._inputs_plus_vertical(service)
        xi, eta = self._in_d(d, rng), self._in_d(d, rng)
        expected = service.oblique_project(d, f_plus_s, service.g_connection(xi, eta))
        assert_allclose(service.df_connection(d, f_plus_s, xi, eta).coeffs, expected.coeffs, atol=1e-14)

    def test_df_connection_expansion(self, service, rng):
        """η ∈ 𝔣: ∇^𝔤_ξ η + ∇^𝔤_ξ(𝔭_𝔣 η) − 𝔭_𝔣(∇^𝔤_ξ η)"""
        d = rolling_constraint(service)
        f, f_plus_s = self._inputs_plus_vertical(service)
        xi = random_algebra(SO3_SO3, rng)
        eta = f.vectors()[0]
        connection = service.g_connection(xi, eta)
        expected = connection + service.g_connection(xi, eta) - service.oblique_project(f_plus_s, d, connection)
        assert_allclose(service.df_connection(d, f_plus_s, xi, eta).coeffs, expected.coeffs, atol=1e-12)

    def test_df_connection_without_inputs(self, service, rng):
        """𝔣 = {0}, 𝔰 = {0} なら 𝔤-接続に一致"""
        full = service.orthonormalize(np.eye(6))
        empty = service.orthonormalize([])
        xi, eta = random_algebra(SO3_SO3, rng), random_algebra(SO3_SO3, rng)
        assert_allclose(
            service.df_connection(full, empty, xi, eta).coeffs,
            service.g_connection(xi, eta).coeffs,
            atol=1e-12,
        )
