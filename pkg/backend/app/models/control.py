# -*- coding: utf-8 -*-
"""
仮想非ホロノミック拘束の制御則データモデル
"""

from dataclasses import dataclass

import numpy as np

from app.models.lie_group import AlgebraVector, frozen_array


@dataclass(frozen=True)
class TransversalityReport:
    """
    横断性判定結果
    𝔥 = 𝔡 ⊕ 𝔣 の結合基底と [μᵃ(f_b)] の最小特異値
    """
    stacked_singular_value: float
    decoupling_singular_value: float
    tolerance: float
    constraint_dim: int
    input_dim: int
    horizontal_dim: int

    @property
    def dimensions_match(self) -> bool:
        return self.constraint_dim + self.input_dim == self.horizontal_dim

    @property
    def passed(self) -> bool:
        return (
            self.dimensions_match
            and self.stacked_singular_value > self.tolerance
            and self.decoupling_singular_value > self.tolerance
        )


@dataclass(frozen=True)
class DriftDecomposition:
    """v = η + τᵇ f_b + 鉛直成分"""
    eta: AlgebraVector
    tau: np.ndarray
    vertical: AlgebraVector

    def __post_init__(self):
        object.__setattr__(self, "tau", frozen_array(np.ravel(self.tau)))


@dataclass(frozen=True)
class ControlOutput:
    """
    制御則の計算結果
    residual は閉ループでの max_a |d/dt μᵃ(ξ)|
    """
    u: np.ndarray
    residual: float
    decomposition: DriftDecomposition

    def __post_init__(self):
        object.__setattr__(self, "u", frozen_array(np.ravel(self.u)))


@dataclass(frozen=True)
class ReconstructionReport:
    """閉ループ軌道の再構成チェック結果"""
    samples: int
    max_vertical_residual: float
    max_constraint_residual: float

    def within(self, tolerance: float) -> bool:
        return self.max_vertical_residual <= tolerance and self.max_constraint_residual <= tolerance
