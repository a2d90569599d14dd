# -*- coding: utf-8 -*-
"""
コマンドライン インターフェース

サブコマンド:
- simulate --config <path> [--set key=value ...] [--strict] --out <dir>
- verify --scenario <name> [--seed N] [--samples N] --out <dir>
- list-scenarios（JSON を標準出力へ）

終了コード: 0 正常 / 1 実行時エラー・--strict でのバジェット超過・検証失敗 / 2 使用法・設定エラー
"""

import argparse
import json
import sys
from typing import Optional, Sequence

import structlog

from app.core.config import settings
from app.core.exceptions import ConfigError, SimulationError
from app.core.logging import configure_logging
from app.schemas.run import parse_config
from app.services.export_service import ExportService
from app.services.scenario_service import SCENARIO_BUILDERS, scenario_service
from app.services.simulation_service import SimulationService
from app.services.verification_service import verify_scenario

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nhvc",
        description=f"{settings.app_name}: 等質空間上の力学系・仮想非ホロノミック拘束シミュレータ",
    )
    parser.add_argument("--log-level", default=None, help="ログレベル（既定: 設定値）")
    parser.add_argument("--log-format", choices=("console", "json"), default=None, help="ログ出力形式")
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.version}")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="実行設定に従って積分し、軌道と結果を出力")
    simulate.add_argument("--config", default=None, help="設定ファイル（.json またはセクション付きテキスト）")
    simulate.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="設定の上書き（例: parameters.J2=5, initial.Omega=0.1,0.2,0.3）",
    )
    simulate.add_argument("--strict", action="store_true", help="診断バジェット超過を失敗とする")
    simulate.add_argument("--out", default=None, help="出力ディレクトリ（設定の output を上書き）")

    verify = commands.add_parser("verify", help="シナリオの性質検証")
    verify.add_argument("--scenario", required=True, choices=sorted(SCENARIO_BUILDERS), help="シナリオ名")
    verify.add_argument("--seed", type=int, default=0, help="乱数シード")
    verify.add_argument("--samples", type=int, default=100, help="性質ごとのサンプル数")
    verify.add_argument("--out", default="output", help="出力ディレクトリ")

    commands.add_parser("list-scenarios", help="シナリオ名とパラメータスキーマを JSON で出力")
    return parser


# ===================
# サブコマンド
# ===================

def run_simulate(args: argparse.Namespace) -> int:
    overrides = list(args.overrides)
    if args.strict:
        overrides.append("strict=true")
    if args.out is not None:
        overrides.append(f"output={args.out}")
    config = parse_config(args.config, overrides)

    summary, _ = SimulationService().run(config)
    if config.strict and summary.violations:
        logger.error("診断バジェット超過（--strict）", violations=summary.violations)
        return EXIT_FAILURE
    return EXIT_OK


def run_verify(args: argparse.Namespace) -> int:
    if args.samples < 1:
        raise ConfigError("samples", "must be at least 1")
    report = verify_scenario(scenario_service.build(args.scenario), args.samples, args.seed)
    ExportService(args.out).export_report(report)
    return EXIT_OK if report.passed else EXIT_FAILURE


def run_list_scenarios(args: argparse.Namespace) -> int:
    sys.stdout.write(json.dumps(scenario_service.describe(), ensure_ascii=False, indent=2) + "\n")
    return EXIT_OK


COMMANDS = {
    "simulate": run_simulate,
    "verify": run_verify,
    "list-scenarios": run_list_scenarios,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    configure_logging(args.log_level, args.log_format)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        logger.error("設定エラー", key=e.key, reason=e.reason)
        return e.exit_code
    except SimulationError as e:
        logger.error("実行時エラー", error_code=e.error_code, message=e.message)
        return e.exit_code
