# -*- coding: utf-8 -*-
"""
力学状態・診断値・軌道データモデル
"""

from dataclasses import dataclass, field
from typing import Callable, List, Tuple

import numpy as np

from app.models.geometry import HomogeneousPoint
from app.models.lie_group import AlgebraVector, GroupElement, frozen_array

INTEGRATION_SCHEME = "rkmk4"


@dataclass(frozen=True)
class State:
    """
    状態 (g, ξ, t)
    ġ = T_e L_g ξ
    """
    g: GroupElement
    xi: AlgebraVector
    t: float = 0.0

    def __post_init__(self):
        self.g.signature.require(self.xi.signature)
        object.__setattr__(self, "t", float(self.t))

    def is_finite(self) -> bool:
        return self.g.is_finite() and self.xi.is_finite() and bool(np.isfinite(self.t))


RightHandSide = Callable[[State], AlgebraVector]


@dataclass(frozen=True)
class Diagnostics:
    """
    各時刻の診断値
    energy = ½⟨ξ,ξ⟩ + V(π(g))
    constraint_residuals は零化余ベクトルごとの |μᵃ(ξ)|
    """
    energy: float
    kinetic_energy: float
    vertical_residual: float
    constraint_residuals: np.ndarray = field(default_factory=lambda: frozen_array([]))
    orthonormality_defect: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "constraint_residuals", frozen_array(np.ravel(self.constraint_residuals)))

    @property
    def max_constraint_residual(self) -> float:
        if self.constraint_residuals.size == 0:
            return 0.0
        return float(np.max(self.constraint_residuals))


@dataclass(frozen=True)
class Sample:
    """軌道の1サンプル"""
    t: float
    g: GroupElement
    xi: AlgebraVector
    q: HomogeneousPoint
    diagnostics: Diagnostics

    @property
    def state(self) -> State:
        return State(self.g, self.xi, self.t)


@dataclass
class Trajectory:
    """
    時刻順のサンプル列
    刻み幅は一定（最終ステップのみ T に合わせて短縮）
    """
    samples: List[Sample]
    step: float
    scheme: str = INTEGRATION_SCHEME

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return np.array([sample.t for sample in self.samples])

    @property
    def final(self) -> Sample:
        return self.samples[-1]

    def column_names(self) -> Tuple[str, ...]:
        """CSV ヘッダー: t, xi_*, g_*, q_*, energy, vertical_residual, mu_*"""
        if not self.samples:
            return ()
        first = self.samples[0]
        names = ["t"]
        names.extend(f"xi_{i}" for i in range(first.xi.coeffs.shape[0]))
        names.extend(first.g.column_names())
        names.extend(first.q.column_names())
        names.extend(["energy", "vertical_residual"])
        names.extend(f"mu_{i}" for i in range(first.diagnostics.constraint_residuals.shape[0]))
        return tuple(names)

    def rows(self) -> List[np.ndarray]:
        """column_names と同じ順序の数値行"""
        result = []
        for sample in self.samples:
            result.append(np.concatenate([
                [sample.t],
                sample.xi.coeffs,
                sample.g.flatten(),
                sample.q.flatten(),
                [sample.diagnostics.energy, sample.diagnostics.vertical_residual],
                sample.diagnostics.constraint_residuals,
            ]))
        return result
