# -*- coding: utf-8 -*-
"""
カスタム例外クラス定義

幾何力学シミュレーションのエラーハンドリング
- 入力データ不正エラー（シグネチャ不一致・非歪対称・非接ベクトル）
- 数値条件エラー（ランク落ち・直和不成立・非有限値）
- 制御則合成エラー（デカップリング行列特異・入力長不一致・拘束外状態）
- 設定エラー（CLI終了コード2）
"""

from typing import Optional


class SimulationError(Exception):
    """シミュレーションの基本例外クラス"""

    def __init__(self, message: str, error_code: str = None, exit_code: int = 1):
        self.message = message
        self.error_code = error_code
        self.exit_code = exit_code
        super().__init__(self.message)


class SignatureMismatchError(SimulationError):
    """群シグネチャ不一致エラー"""

    def __init__(self, message: str, error_code: str = "SIGNATURE_MISMATCH"):
        super().__init__(message, error_code)


class NotSkewError(SimulationError):
    """歪対称でない行列が入力されたエラー"""

    def __init__(self, message: str, error_code: str = "NOT_SKEW"):
        super().__init__(message, error_code)


class NotTangentError(SimulationError):
    """接空間に属さない速度が入力されたエラー"""

    def __init__(self, message: str, error_code: str = "NOT_TANGENT"):
        super().__init__(message, error_code)


class RankDeficientError(SimulationError):
    """基底のランク落ちエラー"""

    def __init__(self, message: str, singular_value: float = 0.0, error_code: str = "RANK_DEFICIENT"):
        self.singular_value = singular_value
        super().__init__(message, error_code)


class NotComplementaryError(SimulationError):
    """部分空間の直和が成立しないエラー"""

    def __init__(self, message: str, singular_value: float = 0.0, error_code: str = "NOT_COMPLEMENTARY"):
        self.singular_value = singular_value
        super().__init__(message, error_code)


class NotInSubspaceError(SimulationError):
    """部分空間に属さないベクトルが入力されたエラー"""

    def __init__(self, message: str, residual: float = 0.0, error_code: str = "NOT_IN_SUBSPACE"):
        self.residual = residual
        super().__init__(message, error_code)


class NotPositiveDefiniteError(SimulationError):
    """計量が対称正定値でないエラー"""

    def __init__(self, message: str, error_code: str = "NOT_POSITIVE_DEFINITE"):
        super().__init__(message, error_code)


class NonPositiveInertiaError(SimulationError):
    """慣性モーメントが正でないエラー"""

    def __init__(self, message: str, error_code: str = "NON_POSITIVE_INERTIA"):
        super().__init__(message, error_code)


class NonFiniteError(SimulationError):
    """積分中に非有限値が発生したエラー"""

    def __init__(self, message: str, step_index: int, error_code: str = "NON_FINITE"):
        self.step_index = step_index
        super().__init__(message, error_code)


class SingularDecouplingError(SimulationError):
    """デカップリング行列 [μᵃ(f_b)] が特異なエラー"""

    def __init__(self, message: str, singular_value: float, error_code: str = "SINGULAR_DECOUPLING"):
        self.singular_value = singular_value
        super().__init__(message, error_code)


class ControlDimensionError(SimulationError):
    """制御入力の長さが入力方向の数と一致しないエラー"""

    def __init__(self, message: str, expected: int, actual: int, error_code: str = "CONTROL_DIMENSION"):
        self.expected = expected
        self.actual = actual
        super().__init__(message, error_code)


class NotOnConstraintError(SimulationError):
    """状態が拘束部分空間上にないエラー"""

    def __init__(self, message: str, residual: float = 0.0, error_code: str = "NOT_ON_CONSTRAINT"):
        self.residual = residual
        super().__init__(message, error_code)


class ConfigError(SimulationError):
    """実行設定エラー"""

    def __init__(self, key: str, reason: str, error_code: str = "CONFIG_ERROR"):
        self.key = key
        self.reason = reason
        super().__init__(f"{key}: {reason}", error_code, exit_code=2)


class OutputError(SimulationError):
    """出力ファイル書き込みエラー"""

    def __init__(self, message: str, path: Optional[str] = None, error_code: str = "IO_ERROR"):
        self.path = path
        super().__init__(message, error_code)
