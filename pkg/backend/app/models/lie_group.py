# -*- coding: utf-8 -*-
"""
リー群・リー代数データモデル

対応する群シグネチャ（3種類）:
- SE(3)          = SO(3) ⋉ ℝ³   （回転因子の直後の並進因子は半直積）
- SO(3) × SO(3)
- SO(3) × S¹

すべての値は生成後に不変（numpy 配列は書き込み禁止に設定）
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Tuple, Union

import numpy as np

from app.core.exceptions import SignatureMismatchError


class FactorKind(str, Enum):
    """群因子の種別"""
    SO3 = "so3"
    R3 = "r3"
    S1 = "s1"

    @property
    def dim(self) -> int:
        """リー代数での係数の数"""
        return 1 if self is FactorKind.S1 else 3


@dataclass(frozen=True)
class Signature:
    """
    群シグネチャ
    因子種別の順序付きリスト
    """
    name: str
    kinds: Tuple[FactorKind, ...]

    @cached_property
    def dim(self) -> int:
        return sum(kind.dim for kind in self.kinds)

    @cached_property
    def _slices(self) -> Tuple[slice, ...]:
        result = []
        offset = 0
        for kind in self.kinds:
            result.append(slice(offset, offset + kind.dim))
            offset += kind.dim
        return tuple(result)

    def slices(self) -> Tuple[slice, ...]:
        """因子ごとの係数スライス"""
        return self._slices

    def is_semidirect(self, index: int) -> bool:
        """並進因子が直前の回転因子に作用されるか（SE(3) 型）"""
        return (
            self.kinds[index] is FactorKind.R3
            and index > 0
            and self.kinds[index - 1] is FactorKind.SO3
        )

    def require(self, other: "Signature") -> None:
        """シグネチャ一致確認"""
        if self is not other and self != other:
            raise SignatureMismatchError(f"シグネチャ不一致: {self.name} と {other.name}")


SE3 = Signature("SE(3)", (FactorKind.SO3, FactorKind.R3))
SO3_SO3 = Signature("SO(3)xSO(3)", (FactorKind.SO3, FactorKind.SO3))
SO3_S1 = Signature("SO(3)xS1", (FactorKind.SO3, FactorKind.S1))

SIGNATURES = {sig.name: sig for sig in (SE3, SO3_SO3, SO3_S1)}


FactorValue = Union[np.ndarray, float]

TWO_PI = 2.0 * np.pi


def frozen_array(values) -> np.ndarray:
    """書き込み禁止の float64 配列を生成"""
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


def normalize_angle(angle: float) -> float:
    """角度を [0, 2π) に正規化"""
    wrapped = float(np.mod(angle, TWO_PI))
    # mod が 2π ちょうどを返す丸めケース
    return 0.0 if wrapped >= TWO_PI else wrapped


@dataclass(frozen=True)
class GroupElement:
    """
    群の元 g ∈ G
    因子値（3×3 回転行列 / 3 ベクトル / 角度）の積
    """
    signature: Signature
    factors: Tuple[FactorValue, ...]

    def __post_init__(self):
        if len(self.factors) != len(self.signature.kinds):
            raise SignatureMismatchError(
                f"因子数 {len(self.factors)} がシグネチャ {self.signature.name} と一致しません"
            )
        normalized = []
        for kind, value in zip(self.signature.kinds, self.factors):
            if kind is FactorKind.S1:
                normalized.append(normalize_angle(float(value)))
            elif kind is FactorKind.SO3:
                normalized.append(frozen_array(np.reshape(value, (3, 3))))
            else:
                normalized.append(frozen_array(np.reshape(value, 3)))
        object.__setattr__(self, "factors", tuple(normalized))

    def rotations(self) -> Tuple[np.ndarray, ...]:
        """回転因子のみ取得"""
        return tuple(
            value for kind, value in zip(self.signature.kinds, self.factors)
            if kind is FactorKind.SO3
        )

    def flatten(self) -> np.ndarray:
        """行優先で平坦化（回転は9成分、並進は3成分、角度は1成分）"""
        parts = [np.ravel(np.asarray(value, dtype=float)) for value in self.factors]
        return np.concatenate(parts)

    def column_names(self) -> Tuple[str, ...]:
        """CSV 列名 g_<factor>_<index>"""
        names = []
        for factor_index, kind in enumerate(self.signature.kinds):
            size = {FactorKind.SO3: 9, FactorKind.R3: 3, FactorKind.S1: 1}[kind]
            names.extend(f"g_{factor_index}_{i}" for i in range(size))
        return tuple(names)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.flatten())))


@dataclass(frozen=True)
class AlgebraVector:
    """
    リー代数の元 ξ ∈ 𝔤
    固定基底での係数ベクトル（so(3)・ℝ³ は3係数、S¹ は1係数）
    """
    signature: Signature
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if coeffs.shape[0] != self.signature.dim:
            raise SignatureMismatchError(
                f"係数長 {coeffs.shape[0]} が {self.signature.name} の次元 {self.signature.dim} と一致しません"
            )
        if coeffs.flags.writeable:
            coeffs = coeffs.copy()
            coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zero(cls, signature: Signature) -> "AlgebraVector":
        return cls(signature, np.zeros(signature.dim))

    @classmethod
    def basis(cls, signature: Signature, index: int) -> "AlgebraVector":
        coeffs = np.zeros(signature.dim)
        coeffs[index] = 1.0
        return cls(signature, coeffs)

    def factor(self, index: int) -> np.ndarray:
        """因子ごとの係数取得"""
        return self.coeffs[self.signature.slices()[index]]

    def _check(self, other: "AlgebraVector") -> None:
        self.signature.require(other.signature)

    def __add__(self, other: "AlgebraVector") -> "AlgebraVector":
        self._check(other)
        return AlgebraVector(self.signature, self.coeffs + other.coeffs)

    def __sub__(self, other: "AlgebraVector") -> "AlgebraVector":
        self._check(other)
        return AlgebraVector(self.signature, self.coeffs - other.coeffs)

    def __neg__(self) -> "AlgebraVector":
        return AlgebraVector(self.signature, -self.coeffs)

    def __mul__(self, scalar: float) -> "AlgebraVector":
        return AlgebraVector(self.signature, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.coeffs)))


@dataclass(frozen=True)
class CoAlgebraVector:
    """
    双対空間の元 μ ∈ 𝔤*
    代数ベクトルとのペアリングは係数ベクトルの内積
    """
    signature: Signature
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if coeffs.shape[0] != self.signature.dim:
            raise SignatureMismatchError(
                f"係数長 {coeffs.shape[0]} が {self.signature.name} の次元 {self.signature.dim} と一致しません"
            )
        if coeffs.flags.writeable:
            coeffs = coeffs.copy()
            coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def pair(self, xi: AlgebraVector) -> float:
        """双対ペアリング ⟨μ, ξ⟩"""
        self.signature.require(xi.signature)
        return float(self.coeffs @ xi.coeffs)
