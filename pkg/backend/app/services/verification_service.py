# -*- coding: utf-8 -*-
"""
シナリオ性質検証サービス

シード付き乱数サンプルで各モジュールの性質を検査し、
項目ごとの許容誤差と最悪残差をレポートにまとめる（同じシードなら同一レポート）
"""

from typing import Callable, List

import numpy as np
import structlog

from app.core.config import settings
from app.core.exceptions import SimulationError
from app.core.lie_algebra import (
    ad,
    ad_star,
    compose,
    group_distance,
    hat,
    identity,
    inverse,
    orthonormality_defect,
    random_algebra,
    random_element,
    vee,
)
from app.models.dynamics import State
from app.models.lie_group import AlgebraVector, CoAlgebraVector
from app.models.scenario import ScenarioSpec
from app.schemas.run import PropertyResult, VerificationReport
from app.services.dynamics_service import DynamicsService
from app.services.homogeneous_service import HomogeneousService
from app.services.virtual_constraint_service import VirtualConstraintService

logger = structlog.get_logger(__name__)

ALGEBRA_TOLERANCE = 1e-11
GROUP_TOLERANCE = 1e-11
KERNEL_TOLERANCE = 1e-6
CONTROL_TOLERANCE = 1e-10


class VerificationService:
    """
    性質検証サービスクラス
    1シナリオに対して全性質を順に評価
    """

    def __init__(self, scenario: ScenarioSpec, n_samples: int = 100, seed: int = 0):
        if n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        self.scenario = scenario
        self.n_samples = n_samples
        self.seed = seed
        self.signature = scenario.signature
        self.results: List[PropertyResult] = []

    # ===================
    # 集計
    # ===================

    def _record(self, name: str, tolerance: float, worst: float, comparison: str = "max") -> None:
        worst = float(worst)
        if comparison == "max":
            passed = bool(np.isfinite(worst) and worst <= tolerance)
        else:
            passed = bool(np.isfinite(worst) and worst > tolerance)
        self.results.append(
            PropertyResult(name=name, tolerance=tolerance, worst=worst, comparison=comparison, passed=passed)
        )
        if not passed:
            logger.warning("性質検証失敗", scenario=self.scenario.name, property=name, worst=worst, tolerance=tolerance)

    def _worst(self, rng: np.random.Generator, check: Callable[[np.random.Generator], float]) -> float:
        return max(float(check(rng)) for _ in range(self.n_samples))

    def _on_constraint_state(self, vc: VirtualConstraintService, rng: np.random.Generator) -> State:
        g = random_element(self.signature, rng)
        d = vc.constraint_subspace(State(g, AlgebraVector.zero(self.signature)))
        return State(g, AlgebraVector(self.signature, d.basis @ rng.standard_normal(d.dim)))

    # ===================
    # 検証
    # ===================

    def run(self) -> VerificationReport:
        rng = np.random.default_rng(self.seed)
        metric = self.scenario.metric

        # 計量が不正なら以降の検証は意味を持たない
        min_eigenvalue = metric.min_eigenvalue
        self._record("metric symmetric", 1e-12, metric.asymmetry)
        self._record("metric positive definite", 0.0, min_eigenvalue, comparison="min")
        if self.results[-1].passed and self.results[-2].passed:
            self._run_suites(rng)
        return self._report()

    def _report(self) -> VerificationReport:
        passed = all(item.passed for item in self.results)
        logger.info(
            "性質検証完了",
            scenario=self.scenario.name,
            passed=passed,
            properties=len(self.results),
            failures=sum(not item.passed for item in self.results),
        )
        return VerificationReport(
            scenario=self.scenario.name,
            seed=self.seed,
            samples=self.n_samples,
            passed=passed,
            properties=list(self.results),
        )

    def _run_suites(self, rng: np.random.Generator) -> None:
        homogeneous = HomogeneousService(self.scenario.structure, self.scenario.metric)
        dynamics = DynamicsService(self.scenario.metric, homogeneous, self.scenario.potential)
        self._lie_suite(rng)
        self._connection_suite(rng, homogeneous)
        self._homogeneous_suite(rng, homogeneous)
        if self.scenario.constraint is not None:
            self._constraint_suite(rng, VirtualConstraintService(self.scenario, dynamics))

    def _lie_suite(self, rng: np.random.Generator) -> None:
        sig = self.signature

        def hat_vee(rng):
            v = rng.standard_normal(3)
            return np.max(np.abs(vee(hat(v)) - v))

        def jacobi(rng):
            x, y, z = (random_algebra(sig, rng) for _ in range(3))
            total = ad(x, ad(y, z)) + ad(y, ad(z, x)) + ad(z, ad(x, y))
            return np.max(np.abs(total.coeffs))

        def duality(rng):
            x, y = random_algebra(sig, rng), random_algebra(sig, rng)
            mu = rng.standard_normal(sig.dim)
            covector = CoAlgebraVector(sig, mu)
            return abs(ad_star(x, covector).pair(y) - covector.pair(ad(x, y)))

        def orthonormal(rng):
            return orthonormality_defect(random_element(sig, rng, scale=2.0))

        def inverse_law(rng):
            g = random_element(sig, rng)
            product = compose(g, inverse(g))
            return group_distance(product, identity(sig))

        self._record("hat/vee round trip", ALGEBRA_TOLERANCE, self._worst(rng, hat_vee))
        self._record("jacobi identity", ALGEBRA_TOLERANCE, self._worst(rng, jacobi))
        self._record("ad/ad* duality", ALGEBRA_TOLERANCE, self._worst(rng, duality))
        self._record("exp orthonormality", 1e-12, self._worst(rng, orthonormal))
        self._record("compose with inverse", GROUP_TOLERANCE, self._worst(rng, inverse_law))

    def _connection_suite(self, rng: np.random.Generator, homogeneous: HomogeneousService) -> None:
        sig = self.signature
        connections = homogeneous.connections
        vertical = homogeneous.structure.vertical
        horizontal = homogeneous.structure.horizontal

        def flat_sharp(rng):
            x = random_algebra(sig, rng)
            return np.max(np.abs(connections.sharp(connections.flat(x)).coeffs - x.coeffs))

        def compatibility(rng):
            x, y, z = (random_algebra(sig, rng) for _ in range(3))
            return abs(
                connections.inner(connections.g_connection(x, y), z)
                + connections.inner(y, connections.g_connection(x, z))
            )

        def torsion(rng):
            x, y = random_algebra(sig, rng), random_algebra(sig, rng)
            difference = connections.g_connection(x, y) - connections.g_connection(y, x) - ad(x, y)
            return np.max(np.abs(difference.coeffs))

        def projectors(rng):
            x, y = random_algebra(sig, rng), random_algebra(sig, rng)
            px = connections.project(horizontal, x)
            idempotent = np.max(np.abs(connections.project(horizontal, px).coeffs - px.coeffs))
            adjoint = abs(connections.inner(px, y) - connections.inner(x, connections.project(horizontal, y)))
            total = connections.project(vertical, x) + px - x
            return max(idempotent, adjoint, float(np.max(np.abs(total.coeffs))))

        self._record("flat/sharp round trip", ALGEBRA_TOLERANCE, self._worst(rng, flat_sharp))
        self._record("metric compatibility", ALGEBRA_TOLERANCE, self._worst(rng, compatibility))
        self._record("torsion free", ALGEBRA_TOLERANCE, self._worst(rng, torsion))
        self._record("projector identities", ALGEBRA_TOLERANCE, self._worst(rng, projectors))

    def _homogeneous_suite(self, rng: np.random.Generator, homogeneous: HomogeneousService) -> None:
        sig = self.signature

        def equivariance(rng):
            a, g = random_element(sig, rng), random_element(sig, rng)
            left = homogeneous.pi(compose(a, g))
            right = homogeneous.action(a, homogeneous.pi(g))
            return np.max(np.abs(left.difference(right)))

        def action_composition(rng):
            a, b, g = (random_element(sig, rng) for _ in range(3))
            q = homogeneous.pi(g)
            twice = homogeneous.action(a, homogeneous.action(b, q))
            once = homogeneous.action(compose(a, b), q)
            return np.max(np.abs(twice.difference(once)))

        self._record("projection equivariance", GROUP_TOLERANCE, self._worst(rng, equivariance))
        self._record("action composition", GROUP_TOLERANCE, self._worst(rng, action_composition))
        self._record("kernel of T_e pi equals vertical", KERNEL_TOLERANCE, homogeneous.vertical_kernel_residual())

        if self.scenario.potential is not None:
            def gradient_horizontal(rng):
                g = random_element(sig, rng)
                gradient = homogeneous.trivialized_gradient(self.scenario.potential, g)
                return homogeneous.vertical_residual(gradient)

            self._record("gradient horizontal", settings.horizontality_tolerance, self._worst(rng, gradient_horizontal))

    def _constraint_suite(self, rng: np.random.Generator, vc: VirtualConstraintService) -> None:
        connections = vc.connections

        def transversality(rng):
            report = vc.check_transversality(self._on_constraint_state(vc, rng))
            return min(report.stacked_singular_value, report.decoupling_singular_value)

        self._record(
            "transversality",
            settings.transversality_tolerance,
            min(transversality(rng) for _ in range(self.n_samples)),
            comparison="min",
        )

        def oblique(rng):
            state = self._on_constraint_state(vc, rng)
            d = vc.constraint_subspace(state)
            rest = connections.span_sum(vc.input_subspace(state), vc.vertical)
            x = random_algebra(self.signature, rng)
            p_d = connections.oblique_project(d, rest, x)
            p_rest = connections.oblique_project(rest, d, x)
            composed = connections.oblique_project(d, rest, p_rest)
            return max(float(np.max(np.abs((p_d + p_rest - x).coeffs))), float(np.max(np.abs(composed.coeffs))))

        def energy(rng):
            state = self._on_constraint_state(vc, rng)
            d = vc.constraint_subspace(state)
            return abs(connections.inner(connections.d_connection(d, state.xi, state.xi), state.xi))

        def residual(rng):
            return vc.solve_control(self._on_constraint_state(vc, rng)).residual

        self._record("oblique projector identities", ALGEBRA_TOLERANCE, self._worst(rng, oblique))
        self._record("d-connection orthogonal to velocity", ALGEBRA_TOLERANCE, self._worst(rng, energy))
        self._record("constraint rate under control", CONTROL_TOLERANCE, self._worst(rng, residual))

        if self.scenario.closed_form_control is not None:
            def agreement(rng):
                state = self._on_constraint_state(vc, rng)
                generic = vc.solve_control(state).u
                return np.max(np.abs(generic - self.scenario.closed_form_control(state)))

            self._record("closed-form control agreement", CONTROL_TOLERANCE, self._worst(rng, agreement))


def verify_scenario(spec: ScenarioSpec, n_samples: int = 100, seed: int = 0) -> VerificationReport:
    """シナリオの性質検証（シード固定で決定的）"""
    try:
        return VerificationService(spec, n_samples, seed).run()
    except SimulationError as e:
        logger.error("性質検証中に例外", scenario=spec.name, error_code=e.error_code, message=e.message)
        raise
