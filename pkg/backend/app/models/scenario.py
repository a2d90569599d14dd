# -*- coding: utf-8 -*-
"""
シナリオ・拘束仕様データモデル

- SimulationMode: 運動方程式の種別
- ConstraintSpec: 拘束部分空間 𝔡 と入力部分空間 𝔣（状態依存可）
- ScenarioSpec: 群・計量・等質空間構造・拘束・ポテンシャル・閉形式制御則の束
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from app.models.dynamics import State
from app.models.geometry import HomogeneousStructure, Metric, PotentialSpec, Subspace


class SimulationMode(str, Enum):
    """シミュレーションモード"""
    GEODESIC = "geodesic"
    MECHANICAL = "mechanical"
    NONHOLONOMIC = "nonholonomic"
    CLOSED_LOOP = "closed_loop"


SubspaceMap = Callable[[State], Subspace]
CovectorMap = Callable[[State], np.ndarray]
DirectionMap = Callable[[State], np.ndarray]
ControlLaw = Callable[[State], np.ndarray]
StateBuilder = Callable[[Mapping[str, np.ndarray]], State]


@dataclass(frozen=True)
class ConstraintSpec:
    """
    拘束仕様
    d_of_state: 状態 → 𝔡、f_of_state: 状態 → 𝔣（spanning に入力方向 f_b をそのまま保持）
    annihilator_of_state: 𝔥 内の零化余ベクトル μᵃ（行、𝔰 上で 0）。未指定なら数値計算
    annihilator_rate: 流れに沿った μ̇ᵃ。未指定かつ state_dependent なら中心差分
    inputs_of_state: 入力方向 f_b を列に持つ行列（正規化なし）。未指定なら f_of_state の spanning
    """
    d_of_state: SubspaceMap
    f_of_state: SubspaceMap
    annihilator_of_state: Optional[CovectorMap] = None
    annihilator_rate: Optional[CovectorMap] = None
    inputs_of_state: Optional[DirectionMap] = None
    state_dependent: bool = False

    @property
    def analytic(self) -> bool:
        """μ̇ᵃ が解析的に与えられているか"""
        return self.annihilator_rate is not None


@dataclass(frozen=True)
class ParameterSchema:
    """シナリオパラメータの説明（list-scenarios 用）"""
    name: str
    default: Tuple[float, ...]
    description: str


@dataclass(frozen=True)
class ScenarioSpec:
    """
    シナリオ仕様
    生成後は不変、コールバックは純関数であること
    """
    name: str
    description: str
    structure: HomogeneousStructure
    metric: Metric
    modes: Tuple[SimulationMode, ...]
    state_builder: StateBuilder
    constraint: Optional[ConstraintSpec] = None
    potential: Optional[PotentialSpec] = None
    closed_form_control: Optional[ControlLaw] = None
    parameters: Dict[str, float] = field(default_factory=dict)
    parameter_schema: Tuple[ParameterSchema, ...] = ()
    initial_schema: Tuple[ParameterSchema, ...] = ()

    @property
    def signature(self):
        return self.structure.signature

    def supports(self, mode: SimulationMode) -> bool:
        return mode in self.modes

    def initial_defaults(self) -> Dict[str, np.ndarray]:
        return {item.name: np.array(item.default, dtype=float) for item in self.initial_schema}
