# -*- coding: utf-8 -*-
"""
仮想非ホロノミック拘束サービステスト

- 閉形式の制御則との一致（球面上の球・ナイフエッジ）
- 横断性判定とドリフト分解
- 状態依存拘束の μ̇ 差分近似
- 物理的な非ホロノミック系との関係
"""

from dataclasses import replace
import time

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.exceptions import ConfigError, NotOnConstraintError, SingularDecouplingError
from app.core.lie_algebra import exp_so3, identity, random_element
from app.models.dynamics import State, Trajectory
from app.models.lie_group import SO3_S1, SO3_SO3, AlgebraVector, GroupElement

INERTIA = np.array([1.0, 2.0, 3.0])
from app.services.virtual_constraint_service import VirtualConstraintService


def on_constraint(services, rng, g=None):
    """𝔡 上のランダムな状態"""
    signature = services.spec.signature
    g = random_element(signature, rng) if g is None else g
    at_rest = State(g, AlgebraVector.zero(signature))
    d = services.constraints.constraint_subspace(at_rest)
    return State(g, AlgebraVector(signature, d.basis @ rng.standard_normal(d.dim)))


def blade_state(Pi, theta, omega):
    return State(GroupElement(SO3_S1, (np.eye(3), theta)), AlgebraVector(SO3_S1, np.concatenate([Pi, [omega]])))


def with_constraint(services, **changes):
    """拘束仕様の一部を差し替えたサービス"""
    spec = replace(services.spec, constraint=replace(services.spec.constraint, **changes))
    return VirtualConstraintService(spec, services.dynamics)


class TestConstruction:
    """生成テスト"""

    def test_requires_constraint(self, se3):
        """拘束のないシナリオは ConfigError"""
        with pytest.raises(ConfigError) as exc_info:
            VirtualConstraintService(se3.spec, se3.dynamics)
        assert exc_info.value.key == "scenario"


class TestAnnihilators:
    """零化余ベクトルテスト"""

    def test_sphere_annihilator(self, sphere, rng):
        """μᵃ は 𝔡 と 𝔰 を零化"""
        state = on_constraint(sphere, rng)
        annihilator = sphere.constraints.annihilator_within_horizontal(state)
        d = sphere.constraints.constraint_subspace(state)
        assert annihilator.shape == (2, 6)
        assert_allclose(annihilator @ d.basis, 0.0, atol=1e-14)
        assert_allclose(annihilator @ sphere.spec.structure.vertical.basis, 0.0, atol=1e-14)

    def test_numeric_annihilator(self, sphere, rng):
        """解析解がなくても 𝔡 ⊕ 𝔰 の零化余ベクトルを計算"""
        service = with_constraint(sphere, annihilator_of_state=None)
        state = on_constraint(sphere, rng)
        annihilator = service.annihilator_within_horizontal(state)
        assert annihilator.shape == (2, 6)
        assert_allclose(service.constraint_residuals(state), 0.0, atol=1e-12)

    def test_left_invariant_rate_is_zero(self, sphere, rng):
        """左不変な 𝔡 では μ̇ = 0"""
        service = with_constraint(sphere, annihilator_of_state=None)
        assert_allclose(service.constraint_rate(on_constraint(sphere, rng)), 0.0)

    def test_blade_rate_finite_difference(self, blade, rng):
        """整列した中心差分の μ̇ は解析解と一致"""
        numeric = with_constraint(blade, annihilator_rate=None)
        for _ in range(20):
            state = State(random_element(SO3_S1, rng), AlgebraVector(SO3_S1, rng.standard_normal(4)))
            assert_allclose(
                numeric.constraint_rate(state),
                blade.constraints.constraint_rate(state),
                atol=1e-7,
            )


class TestTransversality:
    """横断性テスト"""

    @pytest.mark.parametrize("scenario", ["sphere", "blade"])
    def test_scenarios_are_transversal(self, scenario, request, rng):
        """𝔥 = 𝔡 ⊕ 𝔣 かつ [μᵃ(f_b)] 可逆"""
        services = request.getfixturevalue(scenario)
        report = services.constraints.check_transversality(on_constraint(services, rng))
        assert report.dimensions_match
        assert report.passed
        assert report.decoupling_singular_value > 1e-8

    def test_inputs_inside_constraint(self, sphere, rng):
        """𝔣 ⊂ 𝔡 は横断性を満たさず、制御則は SingularDecouplingError"""
        d = sphere.spec.constraint.d_of_state(None)
        bad_inputs = sphere.connections.orthonormalize(d.basis[:, :2])
        service = with_constraint(sphere, f_of_state=lambda state: bad_inputs, inputs_of_state=None)
        state = on_constraint(sphere, rng)
        report = service.check_transversality(state)
        assert not report.passed
        assert report.stacked_singular_value <= 1e-10
        with pytest.raises(SingularDecouplingError):
            service.solve_control(state)

    def test_decompose_drift(self, sphere, rng):
        """v = η + τᵇ f_b + 鉛直成分、η ∈ 𝔡"""
        state = on_constraint(sphere, rng)
        v = AlgebraVector(SO3_SO3, rng.standard_normal(6))
        decomposition = sphere.constraints.decompose_drift(state, v)
        inputs = sphere.constraints.input_subspace(state).spanning
        total = decomposition.eta.coeffs + inputs @ decomposition.tau + decomposition.vertical.coeffs
        assert_allclose(total, v.coeffs, atol=1e-12)
        d = sphere.constraints.constraint_subspace(state)
        assert sphere.connections.membership_residual(d, decomposition.eta) <= 1e-12


class TestSolveControl:
    """制御則テスト"""

    def test_sphere_closed_form(self, sphere, rng):
        """u₁ = (J₃−J₂)/(J₁+1)·Ω₂Ω₃、u₂ = (J₁−J₃)/(J₂+1)·Ω₁Ω₃（1000状態、1秒未満）"""
        states = [on_constraint(sphere, rng) for _ in range(1000)]
        started = time.perf_counter()
        outputs = [sphere.constraints.solve_control(state) for state in states]
        elapsed = time.perf_counter() - started
        for state, output in zip(states, outputs):
            expected = sphere.spec.closed_form_control(state)
            assert np.max(np.abs(output.u - expected)) <= 1e-10
            assert output.residual <= 1e-12
        assert elapsed < 1.0

    def test_sphere_reference_value(self, sphere):
        """Ω = (0.1, 0.2, 0.3), 𝕁 = (1, 2, 3) で u = (0.03, −0.02)"""
        state = State(identity(SO3_SO3), AlgebraVector(SO3_SO3, [-0.1, -0.2, 0.0, 0.1, 0.2, 0.3]))
        assert_allclose(sphere.constraints.solve_control(state).u, [0.03, -0.02], atol=1e-14)

    def test_blade_closed_form(self, blade, rng):
        """u = ω(Π₁ sinϑ − Π₂ cosϑ)（1000状態、1秒未満）"""
        states = [on_constraint(blade, rng) for _ in range(1000)]
        started = time.perf_counter()
        outputs = [blade.constraints.solve_control(state) for state in states]
        elapsed = time.perf_counter() - started
        for state, output in zip(states, outputs):
            assert_allclose(output.u, blade.spec.closed_form_control(state), atol=1e-10)
        assert elapsed < 1.0

    def test_blade_reference_value(self, blade):
        """Π = (0.2, −0.1, 0), ϑ = π/6, ω = 2 で u ≈ 0.37320508"""
        state = blade_state(np.array([0.2, -0.1, 0.0]), np.pi / 6, 2.0)
        output = blade.constraints.solve_control(state, strict=False)
        assert output.u[0] == pytest.approx(0.2 + np.sqrt(3.0) / 10.0, abs=1e-12)
        assert output.u[0] == pytest.approx(0.37320508, abs=1e-8)

    def test_blade_numeric_rate(self, blade, rng):
        """μ̇ を差分で求めても閉形式と一致"""
        numeric = with_constraint(blade, annihilator_of_state=None, annihilator_rate=None)
        for _ in range(20):
            state = on_constraint(blade, rng)
            assert_allclose(numeric.solve_control(state).u, blade.spec.closed_form_control(state), atol=1e-6)

    def test_annihilator_scaling_invariance(self, sphere, rng):
        """零化余ベクトルの定数倍で制御則は変わらない"""
        scaled = with_constraint(
            sphere,
            annihilator_of_state=lambda state: 2.5 * sphere.spec.constraint.annihilator_of_state(state),
        )
        state = on_constraint(sphere, rng)
        assert_allclose(scaled.solve_control(state).u, sphere.constraints.solve_control(state).u, atol=1e-13)

    @pytest.mark.parametrize("scenario", ["sphere", "blade"])
    def test_input_scaling_covariance(self, scenario, request, rng):
        """f_b を c 倍すると u は 1/c 倍になり、閉ループ右辺は変わらない"""
        services = request.getfixturevalue(scenario)
        base = services.constraints
        c = 3.0
        scaled = with_constraint(
            services,
            f_of_state=lambda state: services.connections.orthonormalize(c * base.input_directions(state)),
            inputs_of_state=None,
        )
        base_rhs, scaled_rhs = base.closed_loop_rhs(), scaled.closed_loop_rhs()
        for _ in range(100):
            state = on_constraint(services, rng)
            assert_allclose(scaled.input_directions(state), c * base.input_directions(state), atol=1e-15)
            assert_allclose(scaled.solve_control(state).u * c, base.solve_control(state).u, atol=1e-12)
            assert_allclose(scaled_rhs(state).coeffs, base_rhs(state).coeffs, atol=1e-12)

    def test_not_on_constraint(self, sphere):
        """ξ ∉ 𝔡 は NotOnConstraintError"""
        state = State(identity(SO3_SO3), AlgebraVector(SO3_SO3, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]))
        with pytest.raises(NotOnConstraintError) as exc_info:
            sphere.constraints.solve_control(state)
        assert exc_info.value.residual > 0.5

    def test_relaxed_off_constraint(self, sphere):
        """strict=False なら 𝔡 外でも計算"""
        state = State(identity(SO3_SO3), AlgebraVector(SO3_SO3, [1.0, 0.0, 0.0, 0.1, 0.2, 0.3]))
        output = sphere.constraints.solve_control(state, strict=False)
        assert output.u.shape == (2,)

    def test_closed_loop_keeps_constraint_rate_zero(self, blade, rng):
        """閉ループ右辺で d/dt μᵃ(ξ) = 0"""
        rhs = blade.constraints.closed_loop_rhs()
        for _ in range(20):
            state = on_constraint(blade, rng)
            xi_dot = rhs(state).coeffs
            annihilator = blade.constraints.annihilator_within_horizontal(state)
            rate = blade.constraints.constraint_rate(state)
            assert np.max(np.abs(annihilator @ xi_dot + rate @ state.xi.coeffs)) <= 1e-12


class TestClosedLoopEquations:
    """閉ループ右辺と閉形式の閉ループ方程式の一致"""

    def test_sphere_equations(self, sphere, rng):
        """Π̇ = (u₁, u₂, 0)、𝕁Ω̇ = 𝕁Ω×Ω + (u₁, u₂, 0)（1000状態）"""
        rhs = sphere.constraints.closed_loop_rhs()
        for _ in range(1000):
            state = on_constraint(sphere, rng)
            xi_dot = rhs(state)
            forcing = np.append(sphere.spec.closed_form_control(state), 0.0)
            omega = state.xi.factor(1)
            assert_allclose(xi_dot.factor(0), forcing, atol=1e-12)
            assert_allclose(INERTIA * xi_dot.factor(1), np.cross(INERTIA * omega, omega) + forcing, atol=1e-12)

    def test_blade_equations(self, blade, rng):
        """Π̇ = u(cosϑ, sinϑ, 0)、ω̇ = 0（1000状態）"""
        rhs = blade.constraints.closed_loop_rhs()
        for _ in range(1000):
            state = on_constraint(blade, rng)
            xi_dot = rhs(state)
            theta = state.g.factors[1]
            u = blade.spec.closed_form_control(state)[0]
            assert_allclose(xi_dot.factor(0), u * np.array([np.cos(theta), np.sin(theta), 0.0]), atol=1e-12)
            assert abs(xi_dot.factor(1)[0]) <= 1e-12

    def test_constant_decoupling_reused(self, sphere, rng):
        """状態に依存しない拘束では [μᵃ(f_b)] の分解を使い回す"""
        constraints = with_constraint(sphere)
        rhs = constraints.closed_loop_rhs()
        first = on_constraint(sphere, rng)
        rhs(first)
        factor = constraints._constant_decoupling
        assert factor is not None
        rhs(on_constraint(sphere, rng))
        assert constraints._constant_decoupling is factor

    def test_input_directions_fallback(self, sphere, rng):
        """inputs_of_state がなければ 𝔣 の spanning を使う"""
        service = with_constraint(sphere, inputs_of_state=None)
        state = on_constraint(sphere, rng)
        assert_allclose(service.input_directions(state), sphere.constraints.input_directions(state))


class TestIntrinsicForm:
    """(𝔡,𝔣)-接続による閉ループ表現テスト"""

    def test_matches_closed_loop(self, sphere, rng):
        """V = 0、𝔡 固定なら −∇^{𝔡,𝔣}_ξ ξ は閉ループ右辺に一致"""
        d = sphere.spec.constraint.d_of_state(None)
        f = sphere.spec.constraint.f_of_state(None)
        f_plus_s = sphere.connections.span_sum(f, sphere.spec.structure.vertical)
        intrinsic = sphere.dynamics.intrinsic_rhs(d, f_plus_s)
        closed_loop = sphere.constraints.closed_loop_rhs()
        for _ in range(100):
            state = on_constraint(sphere, rng)
            assert_allclose(intrinsic(state).coeffs, closed_loop(state).coeffs, atol=1e-12)


class TestPhysicalNonholonomic:
    """反力による非ホロノミック系テスト"""

    def test_sphere_matches_d_connection(self, sphere, rng):
        """左不変 𝔡 では −∇^𝔡_ξ ξ に一致"""
        d = sphere.spec.constraint.d_of_state(None)
        physical = sphere.constraints.nonholonomic_rhs()
        projected = sphere.dynamics.nonholonomic_rhs(d)
        for _ in range(100):
            state = on_constraint(sphere, rng)
            assert_allclose(physical(state).coeffs, projected(state).coeffs, atol=1e-12)

    def test_blade_preserves_constraint(self, blade, rng):
        """状態依存 𝔡 でも μᵃ(ξ̇) + μ̇ᵃ(ξ) = 0、鉛直成分なし"""
        rhs = blade.constraints.nonholonomic_rhs()
        for _ in range(20):
            state = on_constraint(blade, rng)
            xi_dot = rhs(state)
            annihilator = blade.constraints.annihilator_within_horizontal(state)
            rate = blade.constraints.constraint_rate(state)
            assert abs(float(annihilator @ xi_dot.coeffs + rate @ state.xi.coeffs)) <= 1e-12
            assert blade.homogeneous.vertical_residual(xi_dot) <= 1e-12


class TestReconstruction:
    """再構成チェックテスト"""

    def test_empty_trajectory(self, sphere):
        """空の軌道は残差 0"""
        report = sphere.constraints.reconstruction_check(Trajectory(samples=[], step=0.1))
        assert report.samples == 0
        assert report.within(0.0)

    def test_short_closed_loop_run(self, sphere):
        """閉ループ軌道は拘束上に留まる"""
        initial = State(GroupElement(SO3_SO3, (exp_so3([0.1, 0.0, 0.0]), np.eye(3))), AlgebraVector(SO3_SO3, [-0.1, -0.2, 0.0, 0.1, 0.2, 0.3]))
        trajectory = sphere.dynamics.simulate(sphere.constraints.closed_loop_rhs(), initial, 1.0, 0.01)
        report = sphere.constraints.reconstruction_check(trajectory)
        assert report.samples == 101
        assert report.within(1e-10)

    def test_vertical_initial_flagged(self, sphere, rng):
        """鉛直成分を持つ ξ(0) は鉛直成分の大きさで検出される"""
        state = on_constraint(sphere, rng)
        vertical = sphere.spec.structure.vertical.basis[:, 0]
        tilted = State(state.g, AlgebraVector(SO3_SO3, state.xi.coeffs + 0.1 * vertical))
        trajectory = sphere.dynamics.simulate(sphere.constraints.closed_loop_rhs(), tilted, 1.0, 0.01)
        report = sphere.constraints.reconstruction_check(trajectory)
        assert report.max_vertical_residual == pytest.approx(0.1, abs=1e-10)
        assert report.max_constraint_residual <= 1e-10
        assert not report.within(1e-3)
