# -*- coding: utf-8 -*-
"""
実行設定・実行結果スキーマ

プロセス境界を越えるデータ
- RunConfig: 実行設定（セクション付き key=value テキスト / JSON + --set 上書き）
- RunSummary: 実行結果（summary.json）
- VerificationReport: 性質検証レポート（verification_<scenario>.json）
"""

import configparser
import json
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from app.core.config import settings
from app.core.exceptions import ConfigError
from app.models.scenario import SimulationMode

OutputFormat = Literal["csv", "json"]

# [run] 以外のセクションはそのまま同名のキーに入る
RUN_SECTION = "run"
OUTPUT_SECTION = "output"
VECTOR_SECTIONS = ("initial",)
SCALAR_SECTIONS = ("parameters",)


class RunConfig(BaseModel):
    """
    実行設定
    未知のキーは拒否
    """
    model_config = ConfigDict(extra="forbid")

    scenario: str = Field(description="シナリオ名")
    mode: SimulationMode = Field(description="運動方程式の種別")
    T: float = Field(default=settings.default_horizon, gt=0, description="積分時間 [s]")
    h: float = Field(default=settings.default_step, gt=0, description="刻み幅 [s]")
    initial: Dict[str, List[float]] = Field(default_factory=dict, description="初期状態フィールドの上書き")
    parameters: Dict[str, float] = Field(default_factory=dict, description="シナリオパラメータの上書き")
    output: str = Field(default="output", description="出力ディレクトリ")
    formats: List[OutputFormat] = Field(default_factory=lambda: ["csv", "json"], description="軌道の出力形式")
    strict: bool = Field(default=False, description="診断バジェット超過を失敗とする")

    @model_validator(mode="after")
    def check_step(self) -> "RunConfig":
        """0 < h ≤ T"""
        if self.h > self.T:
            raise ConfigError("h", "exceeds horizon")
        return self


# ===================
# 設定の読み込み
# ===================

def _floats(text: str) -> List[float]:
    return [float(item) for item in text.replace(",", " ").split()]


def _read_sectioned(text: str) -> dict:
    """セクション付き key=value テキストを入れ子の辞書に変換"""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser.read_string(text)
    data: dict = {}
    for section in parser.sections():
        items = dict(parser.items(section))
        if section == RUN_SECTION:
            data.update(items)
        elif section == OUTPUT_SECTION:
            for key, value in items.items():
                if key == "dir":
                    data["output"] = value
                elif key == "formats":
                    data["formats"] = [item for item in value.replace(",", " ").split()]
                else:
                    data[f"output.{key}"] = value
        elif section in VECTOR_SECTIONS:
            data[section] = {key: _floats(value) for key, value in items.items()}
        elif section in SCALAR_SECTIONS:
            data[section] = {key: float(value) for key, value in items.items()}
        else:
            raise ConfigError(section, "unknown section")
    return data


def _apply_override(data: dict, assignment: str) -> None:
    """--set key=value（キーはドット区切り）"""
    if "=" not in assignment:
        raise ConfigError(assignment, "expected key=value")
    key, value = (part.strip() for part in assignment.split("=", 1))
    path = key.split(".")
    if path[0] == RUN_SECTION:
        path = path[1:]
    if path == [OUTPUT_SECTION, "dir"]:
        path = [OUTPUT_SECTION]
    if not path or not path[0]:
        raise ConfigError(key, "empty key")

    try:
        if len(path) == 2 and path[0] in VECTOR_SECTIONS:
            data.setdefault(path[0], {})[path[1]] = _floats(value)
        elif len(path) == 2 and path[0] in SCALAR_SECTIONS:
            data.setdefault(path[0], {})[path[1]] = float(value)
        elif len(path) == 1 and path[0] == "formats":
            data["formats"] = [item for item in value.replace(",", " ").split()]
        elif len(path) == 1:
            data[path[0]] = value
        else:
            raise ConfigError(key, "unknown key")
    except ValueError:
        raise ConfigError(key, f"invalid number '{value}'")


def parse_config(path: Optional[str] = None, overrides: Sequence[str] = ()) -> RunConfig:
    """
    設定ファイル（.json またはセクション付きテキスト）を読み、--set で上書きして検証
    エラーはすべて ConfigError(キーパス, 理由)
    """
    data: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError("config", f"cannot read {path}: {e}")
        try:
            data = json.loads(text) if Path(path).suffix == ".json" else _read_sectioned(text)
        except (json.JSONDecodeError, configparser.Error, ValueError) as e:
            raise ConfigError("config", f"malformed file: {e}")
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be an object")

    for assignment in overrides:
        _apply_override(data, assignment)

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        error = e.errors()[0]
        key = ".".join(str(part) for part in error["loc"]) or "config"
        raise ConfigError(key, error["msg"])


# ===================
# 実行結果
# ===================

class DiagnosticStats(BaseModel):
    """診断値の統計"""
    max: float = Field(description="最大値")
    mean: float = Field(description="平均値")


class FinalState(BaseModel):
    """最終状態"""
    t: float = Field(description="時刻 [s]")
    xi: List[float] = Field(description="ξ の係数")
    g: List[float] = Field(description="g の因子値（回転は行優先9成分）")
    q: List[float] = Field(description="π(g) の埋め込み座標")


class ReconstructionSummary(BaseModel):
    """閉ループ軌道の再構成チェック"""
    max_vertical_residual: float
    max_constraint_residual: float


class RunSummary(BaseModel):
    """
    実行結果サマリー
    wall_time は再現性のため summary.json には含めない
    """
    version: str = Field(default=settings.version, description="バージョン")
    scenario: str = Field(description="シナリオ名")
    mode: SimulationMode = Field(description="運動方程式の種別")
    steps: int = Field(ge=1, description="積分ステップ数")
    scheme: str = Field(description="積分スキーム")
    final_state: FinalState = Field(description="最終状態")
    diagnostics: Dict[str, DiagnosticStats] = Field(description="診断値ごとの最大・平均")
    energy_drift: float = Field(description="エネルギーの相対ドリフト（最大）")
    reconstruction: Optional[ReconstructionSummary] = Field(default=None, description="再構成チェック")
    violations: List[str] = Field(default_factory=list, description="超過した診断バジェット")
    parameters: Dict[str, float] = Field(default_factory=dict, description="使用したシナリオパラメータ")
    config: RunConfig = Field(description="実行設定")
    wall_time: float = Field(default=0.0, exclude=True, description="実行時間 [s]")


class PropertyResult(BaseModel):
    """
    性質検証の1項目
    comparison が max なら worst ≤ tolerance、min なら worst > tolerance で合格
    """
    name: str
    tolerance: float
    worst: float
    comparison: Literal["max", "min"] = "max"
    passed: bool


class VerificationReport(BaseModel):
    """性質検証レポート"""
    version: str = Field(default=settings.version, description="バージョン")
    scenario: str
    seed: int
    samples: int = Field(ge=1)
    passed: bool
    properties: List[PropertyResult] = Field(default_factory=list)

    @property
    def failures(self) -> List[PropertyResult]:
        return [item for item in self.properties if not item.passed]
