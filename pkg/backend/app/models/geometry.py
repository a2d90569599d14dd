# -*- coding: utf-8 -*-
"""
計量・部分空間・等質空間データモデル

- Metric: リー代数基底上のグラム行列（⟨·,·⟩_𝔤）
- Subspace: 計量正規直交基底 + 零化余ベクトル（𝔥, 𝔰, 𝔡, 𝔣）
- HomogeneousPoint / HomogeneousStructure: 等質空間 H = G/K の点と構造
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from app.core.exceptions import NotPositiveDefiniteError
from app.models.lie_group import (
    AlgebraVector,
    FactorValue,
    GroupElement,
    Signature,
    frozen_array,
    normalize_angle,
)

SYMMETRY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Metric:
    """
    左不変計量
    グラム行列は対称正定値であること（validate で確認）
    """
    signature: Signature
    gram: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gram", frozen_array(self.gram))

    @classmethod
    def identity(cls, signature: Signature) -> "Metric":
        return cls(signature, np.eye(signature.dim))

    @classmethod
    def block_diagonal(cls, signature: Signature, diagonal) -> "Metric":
        return cls(signature, np.diag(np.asarray(diagonal, dtype=float)))

    @property
    def asymmetry(self) -> float:
        return float(np.linalg.norm(self.gram - self.gram.T))

    @property
    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(0.5 * (self.gram + self.gram.T))))

    def validate(self) -> "Metric":
        """対称正定値チェック"""
        if self.gram.shape != (self.signature.dim, self.signature.dim):
            raise NotPositiveDefiniteError(f"グラム行列の形状が不正です: {self.gram.shape}")
        if self.asymmetry > SYMMETRY_TOLERANCE:
            raise NotPositiveDefiniteError(f"グラム行列が対称ではありません: {self.asymmetry:.3e}")
        if self.min_eigenvalue <= 0.0:
            raise NotPositiveDefiniteError(f"グラム行列が正定値ではありません: 最小固有値 {self.min_eigenvalue:.3e}")
        return self

    @cached_property
    def cholesky(self):
        return cho_factor(self.gram)

    @cached_property
    def lower(self) -> np.ndarray:
        """gram = L Lᵀ の L"""
        return np.linalg.cholesky(self.gram)

    @cached_property
    def inverse(self) -> np.ndarray:
        return cho_solve(self.cholesky, np.eye(self.signature.dim))


def _as_columns(values, dim: int, rows: bool = False) -> np.ndarray:
    """dim×k（rows=True なら k×dim）の2次元配列に整形（k = 0 も許容）"""
    array = np.asarray(values, dtype=float)
    if array.size == 0:
        return np.zeros((0, dim)) if rows else np.zeros((dim, 0))
    if array.ndim == 1:
        return array.reshape(1, dim) if rows else array.reshape(dim, 1)
    return array


@dataclass(frozen=True)
class Subspace:
    """
    リー代数の線形部分空間
    basis: dim×k の計量正規直交基底
    annihilator: (dim−k)×dim の零化余ベクトル（行）
    spanning: 生成に使った元の基底（入力方向 f_b の係数を保持するため正規化しない）
    """
    signature: Signature
    basis: np.ndarray
    annihilator: np.ndarray
    spanning: np.ndarray

    def __post_init__(self):
        dim = self.signature.dim
        object.__setattr__(self, "basis", frozen_array(_as_columns(self.basis, dim)))
        object.__setattr__(self, "annihilator", frozen_array(_as_columns(self.annihilator, dim, rows=True)))
        object.__setattr__(self, "spanning", frozen_array(_as_columns(self.spanning, dim)))

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    def vectors(self) -> Tuple[AlgebraVector, ...]:
        return tuple(AlgebraVector(self.signature, column) for column in self.basis.T)


class PointKind(str, Enum):
    """等質空間の点の因子種別"""
    SPHERE = "sphere"
    EUCLIDEAN = "euclidean"
    ROTATION = "rotation"
    ANGLE = "angle"

    @property
    def embedding_dim(self) -> int:
        return {"sphere": 3, "euclidean": 3, "rotation": 9, "angle": 1}[self.value]


class ProjectionRule(str, Enum):
    """
    群因子ごとの射影規則
    SPHERE: S ↦ S e₃ / ROTATION: R ↦ R / QUOTIENT: 回転因子を商で消去（直後の並進に作用）
    TRANSLATION: (R, r) ↦ R·0 + r / ANGLE: φ ↦ φ
    """
    SPHERE = "sphere"
    ROTATION = "rotation"
    QUOTIENT = "quotient"
    TRANSLATION = "translation"
    ANGLE = "angle"

    @property
    def point_kind(self) -> Optional[PointKind]:
        return {
            "sphere": PointKind.SPHERE,
            "rotation": PointKind.ROTATION,
            "quotient": None,
            "translation": PointKind.EUCLIDEAN,
            "angle": PointKind.ANGLE,
        }[self.value]


@dataclass(frozen=True)
class HomogeneousPoint:
    """等質空間の点 q ∈ H"""
    kinds: Tuple[PointKind, ...]
    factors: Tuple[FactorValue, ...]

    def __post_init__(self):
        normalized = []
        for kind, value in zip(self.kinds, self.factors):
            if kind is PointKind.ANGLE:
                normalized.append(normalize_angle(float(value)))
            elif kind is PointKind.ROTATION:
                normalized.append(frozen_array(np.reshape(value, (3, 3))))
            else:
                normalized.append(frozen_array(np.reshape(value, 3)))
        object.__setattr__(self, "factors", tuple(normalized))

    def flatten(self) -> np.ndarray:
        """埋め込み座標（球面3・ユークリッド3・回転9・角度1）"""
        return np.concatenate([np.ravel(np.asarray(value, dtype=float)) for value in self.factors])

    def column_names(self) -> Tuple[str, ...]:
        names = []
        for factor_index, kind in enumerate(self.kinds):
            names.extend(f"q_{factor_index}_{i}" for i in range(kind.embedding_dim))
        return tuple(names)

    def difference(self, other: "HomogeneousPoint") -> np.ndarray:
        """埋め込み座標の差（角度は (−π, π] に折り返す）"""
        parts = []
        for kind, a, b in zip(self.kinds, self.factors, other.factors):
            if kind is PointKind.ANGLE:
                parts.append(np.array([np.angle(np.exp(1j * (a - b)))]))
            else:
                parts.append(np.ravel(np.asarray(a) - np.asarray(b)))
        return np.concatenate(parts)


@dataclass(frozen=True)
class HomogeneousStructure:
    """
    等質空間構造
    射影 π: G → H、作用 Φ、鉛直部分空間 𝔰 と水平部分空間 𝔥（𝔤 = 𝔰 ⊕ 𝔥、計量直交）
    """
    signature: Signature
    rules: Tuple[ProjectionRule, ...]
    vertical: Subspace
    horizontal: Subspace

    @property
    def point_kinds(self) -> Tuple[PointKind, ...]:
        return tuple(rule.point_kind for rule in self.rules if rule.point_kind is not None)


Potential = Callable[[HomogeneousPoint], float]
PotentialGradient = Callable[[GroupElement], AlgebraVector]


@dataclass(frozen=True)
class PotentialSpec:
    """
    ポテンシャル V: H → ℝ
    value は必須、gradient（左自明化勾配）は解析解がある場合のみ
    """
    value: Potential
    gradient: Optional[PotentialGradient] = field(default=None)
