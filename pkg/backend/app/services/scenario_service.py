# -*- coding: utf-8 -*-
"""
シナリオ構築サービス

登録済みシナリオ:
- se3_r3: ℝ³ ≅ SE(3)/SO(3)（任意で調和ポテンシャル ½k‖r‖²）
- sphere_on_sphere: 球面上を転がる球（G = SO(3)×SO(3)、H = 𝕊²×SO(3)）
- blade_on_sphere: 球面上のナイフエッジ（G = SO(3)×S¹、H = 𝕊²×S¹、状態依存の 𝔡）
"""

from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import ConfigError, NonPositiveInertiaError
from app.core.lie_algebra import exp_so3
from app.models.dynamics import State
from app.models.geometry import HomogeneousStructure, Metric, PotentialSpec, ProjectionRule, Subspace
from app.models.lie_group import SE3, SO3_S1, SO3_SO3, AlgebraVector, CoAlgebraVector, GroupElement
from app.models.scenario import ConstraintSpec, ParameterSchema, ScenarioSpec, SimulationMode
from app.services.connection_service import ConnectionService

DEFAULT_INERTIA = (1.0, 2.0, 3.0)
DEFAULT_RADIUS_RATIO = 2.0


def _structure(connections: ConnectionService, rules, vertical_raw) -> HomogeneousStructure:
    """鉛直部分空間 𝔰 とその計量直交補空間 𝔥 から等質空間構造を作る"""
    vertical = connections.orthonormalize(np.asarray(vertical_raw, dtype=float).T)
    horizontal = connections.complement(vertical)
    return HomogeneousStructure(connections.signature, tuple(rules), vertical, horizontal)


def _field(fields: Mapping[str, np.ndarray], name: str) -> np.ndarray:
    return np.asarray(fields.get(name, ()), dtype=float).reshape(-1)


# ===================
# ℝ³ ≅ SE(3)/SO(3)
# ===================

def build_se3_r3(k: float = 0.0) -> ScenarioSpec:
    """
    ℝ³ を SE(3)/SO(3) とみなすシナリオ
    係数の並びは (回転, 並進) なので 𝔰 = 回転成分、𝔥 = 並進成分
    """
    if k < 0.0:
        raise ConfigError("parameters.k", "must be non-negative")

    metric = Metric.identity(SE3).validate()
    connections = ConnectionService(metric)
    vertical_raw = np.eye(6)[:3]
    structure = _structure(connections, (ProjectionRule.QUOTIENT, ProjectionRule.TRANSLATION), vertical_raw)

    potential = None
    if k > 0.0:
        def value(q) -> float:
            position = q.factors[0]
            return 0.5 * k * float(position @ position)

        def gradient(g: GroupElement) -> AlgebraVector:
            rotation, position = g.factors
            return AlgebraVector(SE3, np.concatenate([np.zeros(3), k * (rotation.T @ position)]))

        potential = PotentialSpec(value=value, gradient=gradient)

    def state_builder(fields: Mapping[str, np.ndarray]) -> State:
        g = GroupElement(SE3, (exp_so3(_field(fields, "rotation")), _field(fields, "position")))
        return State(g, AlgebraVector(SE3, _field(fields, "xi")))

    return ScenarioSpec(
        name="se3_r3",
        description="ℝ³ ≅ SE(3)/SO(3) の自由粒子（k > 0 で調和ポテンシャル）",
        structure=structure,
        metric=metric,
        modes=(SimulationMode.GEODESIC, SimulationMode.MECHANICAL),
        state_builder=state_builder,
        potential=potential,
        parameters={"k": float(k)},
        parameter_schema=(ParameterSchema("k", (0.0,), "ばね定数 k ≥ 0（V = ½k‖r‖²）"),),
        initial_schema=(
            ParameterSchema("rotation", (0.0, 0.0, 0.0), "R の指数座標"),
            ParameterSchema("position", (0.0, 0.0, 0.0), "位置 r"),
            ParameterSchema("xi", (0.0, 0.0, 0.0, 1.0, 0.0, 0.0), "ξ = (Ω, Rᵀṙ)"),
        ),
    )


# ===================
# 球面上を転がる球
# ===================

def sphere_on_sphere_control(inertia: Sequence[float]) -> Callable[[State], np.ndarray]:
    """閉形式の制御則 u₁ = (J₃−J₂)/(J₁+1)·Ω₂Ω₃, u₂ = (J₁−J₃)/(J₂+1)·Ω₁Ω₃"""
    J1, J2, J3 = inertia

    def control(state: State) -> np.ndarray:
        omega = state.xi.factor(1)
        return np.array([
            (J3 - J2) / (J1 + 1.0) * omega[1] * omega[2],
            (J1 - J3) / (J2 + 1.0) * omega[0] * omega[2],
        ])

    return control


def build_sphere_on_sphere(J: Sequence[float] = DEFAULT_INERTIA, rho: float = DEFAULT_RADIUS_RATIO) -> ScenarioSpec:
    """
    球面上を転がる球
    計量 Π₁ᵀΠ₂ + Ω₁ᵀ𝕁Ω₂、𝔰 = span{(ê₃, 0)}
    入力方向 f_a = ♯(e_a, e_a)（閉ループ 𝕁Ω̇ = 𝕁Ω×Ω + u の形になる）
    rho は半径比として保持するのみ
    """
    inertia = tuple(float(value) for value in np.ravel(J))
    if len(inertia) != 3 or min(inertia) <= 0.0:
        raise NonPositiveInertiaError(f"慣性モーメントは正の3成分が必要です: {inertia}")

    metric = Metric.block_diagonal(SO3_SO3, (1.0, 1.0, 1.0) + inertia).validate()
    connections = ConnectionService(metric)
    eye = np.eye(6)
    structure = _structure(connections, (ProjectionRule.SPHERE, ProjectionRule.ROTATION), [eye[2]])

    constraint_raw = np.array([
        -eye[0] + eye[3],
        -eye[1] + eye[4],
        eye[5],
    ])
    d = connections.orthonormalize(constraint_raw.T)
    input_covectors = [CoAlgebraVector(SO3_SO3, eye[0] + eye[3]), CoAlgebraVector(SO3_SO3, eye[1] + eye[4])]
    f = connections.orthonormalize([connections.sharp(mu) for mu in input_covectors])
    annihilator = np.array([eye[0] + eye[3], eye[1] + eye[4]])

    constraint = ConstraintSpec(
        d_of_state=lambda state: d,
        f_of_state=lambda state: f,
        annihilator_of_state=lambda state: annihilator,
        inputs_of_state=lambda state: f.spanning,
        state_dependent=False,
    )

    def state_builder(fields: Mapping[str, np.ndarray]) -> State:
        omega = _field(fields, "Omega")
        pi = _field(fields, "Pi")
        if pi.size == 0:
            pi = -np.array([omega[0], omega[1], 0.0])
        g = GroupElement(SO3_SO3, (exp_so3(_field(fields, "S")), exp_so3(_field(fields, "R"))))
        return State(g, AlgebraVector(SO3_SO3, np.concatenate([pi, omega])))

    return ScenarioSpec(
        name="sphere_on_sphere",
        description="球面上を転がる球（H = 𝕊²×SO(3)）",
        structure=structure,
        metric=metric,
        modes=(SimulationMode.GEODESIC, SimulationMode.NONHOLONOMIC, SimulationMode.CLOSED_LOOP),
        state_builder=state_builder,
        constraint=constraint,
        closed_form_control=sphere_on_sphere_control(inertia),
        parameters={"J1": inertia[0], "J2": inertia[1], "J3": inertia[2], "rho": float(rho)},
        parameter_schema=(
            ParameterSchema("J1", (DEFAULT_INERTIA[0],), "慣性モーメント J₁ > 0"),
            ParameterSchema("J2", (DEFAULT_INERTIA[1],), "慣性モーメント J₂ > 0"),
            ParameterSchema("J3", (DEFAULT_INERTIA[2],), "慣性モーメント J₃ > 0"),
            ParameterSchema("rho", (DEFAULT_RADIUS_RATIO,), "半径比（力学には現れない）"),
        ),
        initial_schema=(
            ParameterSchema("S", (0.0, 0.0, 0.0), "S の指数座標"),
            ParameterSchema("R", (0.0, 0.0, 0.0), "R の指数座標"),
            ParameterSchema("Omega", (0.1, 0.2, 0.3), "角速度 Ω"),
            ParameterSchema("Pi", (), "Π（省略時は −(Ω₁, Ω₂, 0) で 𝔡 上）"),
        ),
    )


# ===================
# 球面上のナイフエッジ
# ===================

def _heading(state: State) -> float:
    return float(state.g.factors[1])


def blade_control(state: State) -> np.ndarray:
    """閉形式の制御則 u = ω(Π₁ sinϑ − Π₂ cosϑ)"""
    theta = _heading(state)
    pi = state.xi.factor(0)
    omega = float(state.xi.factor(1)[0])
    return np.array([omega * (pi[0] * np.sin(theta) - pi[1] * np.cos(theta))])


def build_blade_on_sphere() -> ScenarioSpec:
    """
    球面上のナイフエッジ
    𝔡(ϑ) = span{(−sinϑ ê₁ + cosϑ ê₂, 0), (0, 1)}、𝔣(ϑ) = span{(cosϑ ê₁ + sinϑ ê₂, 0)}
    """
    metric = Metric.identity(SO3_S1).validate()
    connections = ConnectionService(metric)
    structure = _structure(connections, (ProjectionRule.SPHERE, ProjectionRule.ANGLE), [np.eye(4)[2]])
    e3, e4 = np.eye(4)[2], np.eye(4)[3]

    def across(theta: float) -> np.ndarray:
        return np.array([-np.sin(theta), np.cos(theta), 0.0, 0.0])

    def direction(theta: float) -> np.ndarray:
        return np.array([np.cos(theta), np.sin(theta), 0.0, 0.0])

    # 単位計量なので生の基底がそのまま正規直交
    def d_of_state(state: State) -> Subspace:
        theta = _heading(state)
        basis = np.column_stack([across(theta), e4])
        return Subspace(SO3_S1, basis, np.vstack([direction(theta), e3]), basis)

    def f_of_state(state: State) -> Subspace:
        theta = _heading(state)
        basis = direction(theta).reshape(4, 1)
        return Subspace(SO3_S1, basis, np.vstack([across(theta), e3, e4]), basis)

    def inputs(state: State) -> np.ndarray:
        return direction(_heading(state)).reshape(4, 1)

    def annihilator(state: State) -> np.ndarray:
        return direction(_heading(state)).reshape(1, 4)

    def annihilator_rate(state: State) -> np.ndarray:
        # ϑ̇ = ω
        omega = float(state.xi.factor(1)[0])
        return omega * across(_heading(state)).reshape(1, 4)

    constraint = ConstraintSpec(
        d_of_state=d_of_state,
        f_of_state=f_of_state,
        annihilator_of_state=annihilator,
        annihilator_rate=annihilator_rate,
        inputs_of_state=inputs,
        state_dependent=True,
    )

    def state_builder(fields: Mapping[str, np.ndarray]) -> State:
        theta = float(_field(fields, "theta")[0])
        pi = _field(fields, "Pi")
        if pi.size == 0:
            speed = float(_field(fields, "speed")[0])
            pi = speed * np.array([-np.sin(theta), np.cos(theta), 0.0])
        g = GroupElement(SO3_S1, (exp_so3(_field(fields, "S")), theta))
        return State(g, AlgebraVector(SO3_S1, np.concatenate([pi, _field(fields, "omega")])))

    return ScenarioSpec(
        name="blade_on_sphere",
        description="球面上のナイフエッジ（H = 𝕊²×S¹、向き ϑ に依存する拘束）",
        structure=structure,
        metric=metric,
        modes=(SimulationMode.GEODESIC, SimulationMode.NONHOLONOMIC, SimulationMode.CLOSED_LOOP),
        state_builder=state_builder,
        constraint=constraint,
        closed_form_control=blade_control,
        initial_schema=(
            ParameterSchema("S", (0.0, 0.0, 0.0), "S の指数座標"),
            ParameterSchema("theta", (0.0,), "向き ϑ₀ [rad]"),
            ParameterSchema("omega", (1.0,), "回転速度 ω"),
            ParameterSchema("speed", (0.3,), "Π 省略時の速さ（Π = speed·(−sinϑ₀, cosϑ₀, 0)）"),
            ParameterSchema("Pi", (), "Π（省略時は speed から 𝔡 上に生成）"),
        ),
    )


# ===================
# レジストリ
# ===================

ScenarioBuilder = Callable[[Dict[str, float]], ScenarioSpec]

SCENARIO_BUILDERS: Dict[str, ScenarioBuilder] = {
    "se3_r3": lambda params: build_se3_r3(k=params.get("k", 0.0)),
    "sphere_on_sphere": lambda params: build_sphere_on_sphere(
        J=(
            params.get("J1", DEFAULT_INERTIA[0]),
            params.get("J2", DEFAULT_INERTIA[1]),
            params.get("J3", DEFAULT_INERTIA[2]),
        ),
        rho=params.get("rho", DEFAULT_RADIUS_RATIO),
    ),
    "blade_on_sphere": lambda params: build_blade_on_sphere(),
}


class ScenarioService:
    """
    シナリオサービスクラス
    名前からの構築・パラメータ上書き・初期状態生成を担当
    """

    def list_names(self) -> Tuple[str, ...]:
        return tuple(SCENARIO_BUILDERS)

    def build(self, name: str, overrides: Optional[Mapping[str, float]] = None) -> ScenarioSpec:
        """名前とパラメータ上書きからシナリオを構築"""
        if name not in SCENARIO_BUILDERS:
            raise ConfigError("scenario", f"unknown scenario '{name}'")
        overrides = dict(overrides or {})
        known = {item.name for item in SCENARIO_BUILDERS[name]({}).parameter_schema}
        for key in overrides:
            if key not in known:
                raise ConfigError(f"parameters.{key}", "unknown parameter")
        return SCENARIO_BUILDERS[name]({key: float(value) for key, value in overrides.items()})

    def describe(self) -> Dict[str, dict]:
        """list-scenarios 用のパラメータ・初期状態スキーマ"""
        result = {}
        for name in SCENARIO_BUILDERS:
            spec = self.build(name)
            result[name] = {
                "description": spec.description,
                "group": spec.signature.name,
                "modes": [mode.value for mode in spec.modes],
                "parameters": {
                    item.name: {"default": list(item.default), "description": item.description}
                    for item in spec.parameter_schema
                },
                "initial": {
                    item.name: {"default": list(item.default), "description": item.description}
                    for item in spec.initial_schema
                },
            }
        return result

    def initial_state(self, spec: ScenarioSpec, fields: Optional[Mapping[str, Sequence[float]]] = None) -> State:
        """既定値に上書きを重ねて初期状態を生成"""
        values = spec.initial_defaults()
        schema = {item.name: item for item in spec.initial_schema}
        for key, value in (fields or {}).items():
            if key not in schema:
                raise ConfigError(f"initial.{key}", "unknown field")
            array = np.asarray(value, dtype=float).reshape(-1)
            expected = len(schema[key].default) or 3
            if array.size != expected:
                raise ConfigError(f"initial.{key}", f"expected {expected} values")
            values[key] = array
        return spec.state_builder(values)


scenario_service = ScenarioService()


def build_scenario(name: str, overrides: Optional[Mapping[str, float]] = None) -> ScenarioSpec:
    return scenario_service.build(name, overrides)


def initial_state(spec: ScenarioSpec, fields: Optional[Mapping[str, Sequence[float]]] = None) -> State:
    return scenario_service.initial_state(spec, fields)
