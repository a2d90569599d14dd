# -*- coding: utf-8 -*-
"""
アプリケーション設定

環境変数（接頭辞 NHVC_）と .env ファイルから読み込む
- 既定の積分時間・刻み幅
- 数値許容誤差（ランク判定・横断性・水平性・拘束所属）
- 診断バジェット（--strict 判定に使用）
"""

from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """プロセス全体の既定値"""

    model_config = SettingsConfigDict(
        env_prefix="NHVC_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # アプリケーション情報
    app_name: str = Field(default="NHVC SIM", description="アプリケーション名")
    version: str = Field(default="1.0.0", description="バージョン")

    # ロギング
    log_level: str = Field(default="INFO", description="ログレベル")
    log_format: Literal["console", "json"] = Field(default="console", description="ログ出力形式")

    # 積分既定値
    default_horizon: float = Field(default=10.0, gt=0, description="既定の積分時間 T [s]")
    default_step: float = Field(default=1e-3, gt=0, description="既定の刻み幅 h [s]")

    # 数値許容誤差
    rank_tolerance: float = Field(default=1e-10, description="ランク判定の最小特異値")
    transversality_tolerance: float = Field(default=1e-8, description="横断性判定の最小特異値")
    horizontality_tolerance: float = Field(default=1e-8, description="水平性判定の許容誤差")
    membership_tolerance: float = Field(default=1e-8, description="ξ ∈ 𝔡 判定の許容誤差")
    finite_difference_step: float = Field(default=1e-6, description="中心差分の刻み")

    # 診断バジェット
    constraint_budget: float = Field(default=1e-6, description="拘束残差の上限")
    vertical_budget: float = Field(default=1e-7, description="鉛直残差の上限")
    energy_drift_budget: float = Field(default=1e-8, description="エネルギー相対ドリフトの上限")
    orthonormality_budget: float = Field(default=1e-10, description="回転行列の直交性欠損の上限")


@lru_cache()
def get_settings() -> Settings:
    """設定取得（キャッシュ済み）"""
    return Settings()


settings = get_settings()
