# -*- coding: utf-8 -*-
"""
軌道・結果ファイル出力サービス

- trajectory.csv: 1行1サンプル、浮動小数は17桁
- trajectory.json: 同じ内容のサンプル配列
- summary.json / verification_<scenario>.json: pydantic モデルの JSON
同じ入力からは常にバイト単位で同一のファイルを出力する
"""

import csv
import io
import json
from pathlib import Path
from typing import Iterable, List

import structlog
from pydantic import BaseModel

from app.core.exceptions import OutputError
from app.models.dynamics import Trajectory
from app.schemas.run import RunSummary, VerificationReport

logger = structlog.get_logger(__name__)

TRAJECTORY_CSV = "trajectory.csv"
TRAJECTORY_JSON = "trajectory.json"
SUMMARY_JSON = "summary.json"


def format_float(value: float) -> str:
    """17 有効桁（往復で値が変わらない）"""
    return format(float(value), ".17g")


class ExportService:
    """
    出力サービスクラス
    出力ディレクトリを受け取り、ファイル生成を担当
    """

    def __init__(self, output_dir):
        self.output_dir = Path(output_dir)

    # ===================
    # 内容生成
    # ===================

    def trajectory_csv(self, trajectory: Trajectory) -> str:
        """CSV 文字列（ヘッダー + 数値行、列数一定）"""
        output = io.StringIO()
        writer = csv.writer(output, lineterminator="\n")
        writer.writerow(trajectory.column_names())
        for row in trajectory.rows():
            writer.writerow([format_float(value) for value in row])
        return output.getvalue()

    def trajectory_json(self, trajectory: Trajectory) -> str:
        samples = []
        for sample in trajectory.samples:
            diagnostics = sample.diagnostics
            samples.append({
                "t": sample.t,
                "xi": sample.xi.coeffs.tolist(),
                "g": sample.g.flatten().tolist(),
                "q": sample.q.flatten().tolist(),
                "energy": diagnostics.energy,
                "kinetic_energy": diagnostics.kinetic_energy,
                "vertical_residual": diagnostics.vertical_residual,
                "mu": diagnostics.constraint_residuals.tolist(),
                "orthonormality_defect": diagnostics.orthonormality_defect,
            })
        document = {
            "scheme": trajectory.scheme,
            "step": trajectory.step,
            "columns": list(trajectory.column_names()),
            "samples": samples,
        }
        return json.dumps(document, ensure_ascii=False) + "\n"

    def model_json(self, model: BaseModel) -> str:
        return json.dumps(model.model_dump(mode="json"), ensure_ascii=False, indent=2) + "\n"

    # ===================
    # 書き込み
    # ===================

    def write_text(self, name: str, content: str) -> Path:
        path = self.output_dir / name
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
            path.write_text(content, encoding="utf-8")
        except OSError as e:
            raise OutputError(f"ファイルを書き込めません: {e}", path=str(path))
        logger.debug("ファイル出力", path=str(path), size=len(content))
        return path

    def export_run(self, trajectory: Trajectory, summary: RunSummary, formats: Iterable[str]) -> List[Path]:
        """軌道（指定形式）と summary.json を出力"""
        paths = []
        formats = set(formats)
        if "csv" in formats:
            paths.append(self.write_text(TRAJECTORY_CSV, self.trajectory_csv(trajectory)))
        if "json" in formats:
            paths.append(self.write_text(TRAJECTORY_JSON, self.trajectory_json(trajectory)))
        paths.append(self.write_text(SUMMARY_JSON, self.model_json(summary)))
        logger.info("結果ファイル出力完了", output=str(self.output_dir), files=[path.name for path in paths])
        return paths

    def export_report(self, report: VerificationReport) -> Path:
        return self.write_text(f"verification_{report.scenario}.json", self.model_json(report))
