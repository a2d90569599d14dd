# -*- coding: utf-8 -*-
"""
行列リー群・リー代数の基本演算

SO(3)・ℝ³ 並進・S¹ 因子の積に対する:
- hat / vee（hat(x)·y = x × y の符号規約）
- 因子ごとの指数写像・対数写像（Rodrigues 公式、小角度は級数展開）
- 合成・逆元・単位元
- 随伴作用 ad / 余随伴作用 ad*
- dexp⁻¹ の Bernoulli 級数（積分器用）

すべて純関数
"""

import math

import numpy as np

from app.core.exceptions import NotSkewError
from app.models.lie_group import (
    AlgebraVector,
    CoAlgebraVector,
    FactorKind,
    FactorValue,
    GroupElement,
    Signature,
    normalize_angle,
)

# Rodrigues 係数を級数で評価する閾値
SMALL_ANGLE = 1e-4

# 対数写像で π 近傍の分岐に切り替える閾値
NEAR_PI = 1e-3

SKEW_TOLERANCE = 1e-9

EYE3 = np.eye(3)
EYE3.setflags(write=False)


# ===================
# hat / vee
# ===================

def hat(v) -> np.ndarray:
    """ℝ³ → so(3)"""
    x, y, z = np.asarray(v, dtype=float).reshape(3)
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def vee(matrix) -> np.ndarray:
    """so(3) → ℝ³（歪対称部分のみ使用）"""
    matrix = np.asarray(matrix, dtype=float).reshape(3, 3)
    asymmetry = np.linalg.norm(matrix + matrix.T)
    if asymmetry > SKEW_TOLERANCE:
        raise NotSkewError(f"歪対称ではありません: ‖A + Aᵀ‖_F = {asymmetry:.3e}")
    skew = 0.5 * (matrix - matrix.T)
    return np.array([skew[2, 1], skew[0, 2], skew[1, 0]])


# ===================
# 指数写像・対数写像
# ===================

def _rodrigues_coefficients(theta: float):
    """sinθ/θ と (1 − cosθ)/θ²"""
    if theta < SMALL_ANGLE:
        t2 = theta * theta
        return 1.0 - t2 / 6.0 + t2 * t2 / 120.0, 0.5 - t2 / 24.0 + t2 * t2 / 720.0
    return math.sin(theta) / theta, (1.0 - math.cos(theta)) / (theta * theta)


def left_jacobian(omega) -> np.ndarray:
    """SO(3) の左ヤコビアン V(Ω)（SE(3) 指数写像の並進部分）"""
    omega = np.asarray(omega, dtype=float).reshape(3)
    theta = float(np.linalg.norm(omega))
    K = hat(omega)
    if theta < SMALL_ANGLE:
        t2 = theta * theta
        b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0
        c = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0
    else:
        b = (1.0 - np.cos(theta)) / (theta * theta)
        c = (theta - np.sin(theta)) / (theta ** 3)
    return np.eye(3) + b * K + c * (K @ K)


def exp_so3(omega) -> np.ndarray:
    """Rodrigues 公式"""
    omega = np.asarray(omega, dtype=float).reshape(3)
    theta = math.sqrt(float(omega @ omega))
    a, b = _rodrigues_coefficients(theta)
    K = hat(omega)
    return EYE3 + a * K + b * (K @ K)


def log_so3(rotation) -> np.ndarray:
    """SO(3) → so(3) の主値（回転角 ∈ [0, π]）"""
    R = np.asarray(rotation, dtype=float).reshape(3, 3)
    cos_theta = np.clip(0.5 * (np.trace(R) - 1.0), -1.0, 1.0)
    theta = float(np.arccos(cos_theta))
    skew = 0.5 * (R - R.T)
    axis_sin = np.array([skew[2, 1], skew[0, 2], skew[1, 0]])

    if theta < SMALL_ANGLE:
        return (1.0 + theta * theta / 6.0) * axis_sin

    if np.pi - theta < NEAR_PI:
        # nnᵀ = (R + Rᵀ − 2cosθ I) / (2(1 − cosθ))
        outer = (R + R.T - 2.0 * cos_theta * np.eye(3)) / (2.0 * (1.0 - cos_theta))
        column = int(np.argmax(np.diag(outer)))
        axis = outer[:, column] / np.sqrt(max(outer[column, column], 1e-300))
        axis /= np.linalg.norm(axis)
        if axis @ axis_sin < 0.0:
            axis = -axis
        return theta * axis

    return theta / np.sin(theta) * axis_sin


def exp_factor(kind: FactorKind, v) -> FactorValue:
    """
    因子ごとの指数写像
    so(3): Rodrigues / ℝ³: 恒等 / S¹: 角度の加法
    """
    if kind is FactorKind.SO3:
        return exp_so3(v)
    if kind is FactorKind.R3:
        return np.asarray(v, dtype=float).reshape(3).copy()
    return normalize_angle(float(np.asarray(v, dtype=float).reshape(-1)[0]))


def log_factor(kind: FactorKind, value: FactorValue) -> np.ndarray:
    """因子ごとの対数写像（角度は (−π, π] の代表元）"""
    if kind is FactorKind.SO3:
        return log_so3(value)
    if kind is FactorKind.R3:
        return np.asarray(value, dtype=float).reshape(3).copy()
    angle = normalize_angle(float(value))
    return np.array([angle - 2.0 * np.pi if angle > np.pi else angle])


def exp(xi: AlgebraVector) -> GroupElement:
    """
    群の指数写像
    SE(3) の並進は左ヤコビアン V(Ω) を掛ける（行列指数と一致）
    """
    signature = xi.signature
    factors = []
    slices = signature.slices()
    for index, kind in enumerate(signature.kinds):
        coeffs = xi.coeffs[slices[index]]
        if signature.is_semidirect(index):
            factors.append(left_jacobian(xi.coeffs[slices[index - 1]]) @ coeffs)
        else:
            factors.append(exp_factor(kind, coeffs))
    return GroupElement(signature, tuple(factors))


def log(g: GroupElement) -> AlgebraVector:
    """群の対数写像（exp の主値逆写像）"""
    signature = g.signature
    parts = []
    for index, kind in enumerate(signature.kinds):
        if signature.is_semidirect(index):
            omega = parts[index - 1]
            parts.append(np.linalg.solve(left_jacobian(omega), g.factors[index]))
        else:
            parts.append(log_factor(kind, g.factors[index]))
    return AlgebraVector(signature, np.concatenate(parts))


# ===================
# 群演算
# ===================

def identity(signature: Signature) -> GroupElement:
    """単位元"""
    factors = []
    for kind in signature.kinds:
        if kind is FactorKind.SO3:
            factors.append(np.eye(3))
        elif kind is FactorKind.R3:
            factors.append(np.zeros(3))
        else:
            factors.append(0.0)
    return GroupElement(signature, tuple(factors))


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    """
    群の積 g·h
    SE(3): (R₁, r₁)(R₂, r₂) = (R₁R₂, R₁r₂ + r₁)
    """
    g.signature.require(h.signature)
    signature = g.signature
    factors = []
    for index, kind in enumerate(signature.kinds):
        a, b = g.factors[index], h.factors[index]
        if kind is FactorKind.SO3:
            factors.append(a @ b)
        elif kind is FactorKind.R3:
            if signature.is_semidirect(index):
                factors.append(g.factors[index - 1] @ b + a)
            else:
                factors.append(a + b)
        else:
            factors.append(a + b)
    return GroupElement(signature, tuple(factors))


def inverse(g: GroupElement) -> GroupElement:
    """逆元（SE(3): (Rᵀ, −Rᵀr)）"""
    signature = g.signature
    factors = []
    for index, kind in enumerate(signature.kinds):
        value = g.factors[index]
        if kind is FactorKind.SO3:
            factors.append(value.T)
        elif kind is FactorKind.R3:
            if signature.is_semidirect(index):
                factors.append(-(g.factors[index - 1].T @ value))
            else:
                factors.append(-value)
        else:
            factors.append(-value)
    return GroupElement(signature, tuple(factors))


def group_distance(g: GroupElement, h: GroupElement) -> float:
    """因子値の差の最大ノルム（角度は 2π を法として比較）"""
    g.signature.require(h.signature)
    worst = 0.0
    for kind, a, b in zip(g.signature.kinds, g.factors, h.factors):
        if kind is FactorKind.S1:
            diff = abs(np.angle(np.exp(1j * (a - b))))
        else:
            diff = float(np.linalg.norm(np.asarray(a) - np.asarray(b)))
        worst = max(worst, diff)
    return worst


# ===================
# 随伴作用
# ===================

def ad_matrix(xi: AlgebraVector) -> np.ndarray:
    """
    ad_ξ の行列表現
    so(3): hat(Π) / 𝔰𝔢(3): [[hat(Π), 0], [hat(t), hat(Π)]] / S¹: 0
    """
    signature = xi.signature
    dim = signature.dim
    matrix = np.zeros((dim, dim))
    slices = signature.slices()
    for index, kind in enumerate(signature.kinds):
        block = slices[index]
        if kind is FactorKind.SO3:
            matrix[block, block] = hat(xi.coeffs[block])
        elif kind is FactorKind.R3 and signature.is_semidirect(index):
            rot = slices[index - 1]
            matrix[block, block] = hat(xi.coeffs[rot])
            matrix[block, rot] = hat(xi.coeffs[block])
    return matrix


def ad(xi: AlgebraVector, eta: AlgebraVector) -> AlgebraVector:
    """リー括弧 [ξ, η]"""
    xi.signature.require(eta.signature)
    return AlgebraVector(xi.signature, ad_matrix(xi) @ eta.coeffs)


def ad_star(xi: AlgebraVector, mu: CoAlgebraVector) -> CoAlgebraVector:
    """余随伴作用 ad*_ξ μ（⟨ad*_ξ μ, η⟩ = ⟨μ, ad_ξ η⟩）"""
    xi.signature.require(mu.signature)
    return CoAlgebraVector(xi.signature, ad_matrix(xi).T @ mu.coeffs)


def dexpinv(u: AlgebraVector, v: AlgebraVector, order: int = 2) -> AlgebraVector:
    """
    dexp⁻¹_u(v) の Bernoulli 級数
    v − ½[u, v] + (1/12)[u, [u, v]]（order で打ち切り）
    """
    u.signature.require(v.signature)
    matrix = ad_matrix(u)
    first = matrix @ v.coeffs
    result = v.coeffs.copy()
    if order >= 1:
        result = result - 0.5 * first
    if order >= 2:
        result = result + (matrix @ first) / 12.0
    return AlgebraVector(v.signature, result)


# ===================
# サンプリング
# ===================

def random_algebra(
    signature: Signature, rng: np.random.Generator, scale: float = 1.0
) -> AlgebraVector:
    """正規分布に従う代数ベクトル"""
    return AlgebraVector(signature, scale * rng.standard_normal(signature.dim))


def random_element(
    signature: Signature, rng: np.random.Generator, scale: float = 1.0
) -> GroupElement:
    """ランダムな群の元（exp によるサンプル）"""
    return exp(random_algebra(signature, rng, scale))


def orthonormality_defect(g: GroupElement) -> float:
    """回転因子の ‖RᵀR − I‖_F の最大値"""
    rotations = g.rotations()
    if not rotations:
        return 0.0
    return max(float(np.linalg.norm(R.T @ R - EYE3)) for R in rotations)
