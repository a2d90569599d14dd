# -*- coding: utf-8 -*-
"""
ロギング設定

structlog を標準 logging の上に構成する
標準出力は機械可読出力（list-scenarios）専用のため、ログは標準エラーへ出す
"""

import logging
import sys

import structlog

from app.core.config import settings


def configure_logging(level: str = None, fmt: str = None) -> None:
    """ロギング初期化（プロセス起動時に一度だけ呼ぶ）"""
    level_name = (level or settings.log_level).upper()
    fmt = fmt or settings.log_format

    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format="%(message)s",
        stream=sys.stderr,
        force=True,
    )

    renderer = (
        structlog.processors.JSONRenderer(ensure_ascii=False)
        if fmt == "json"
        else structlog.dev.ConsoleRenderer(colors=False)
    )

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.format_exc_info,
            renderer,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )
