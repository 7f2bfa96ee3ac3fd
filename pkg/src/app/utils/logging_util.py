import json
import logging
import os
from datetime import datetime, timezone
from typing import Any, Dict

from src.app.config.settings import settings

# LogRecord attributes that are not user-supplied ``extra`` fields
_RECORD_FIELDS = set(
    logging.LogRecord("", 0, "", 0, "", (), None).__dict__
) | {"message", "asctime"}


class JSONFormatter(logging.Formatter):
    """One JSON object per line, with ``extra=`` fields and tracebacks inlined."""

    def format(self, record: logging.LogRecord) -> str:
        entry: Dict[str, Any] = {
            "timestamp": datetime.fromtimestamp(record.created, timezone.utc).isoformat(
                timespec="milliseconds"
            ),
            "level": record.levelname,
            "logger": record.name,
            "where": f"{record.module}.{record.funcName}:{record.lineno}",
            "message": record.getMessage(),
        }
        extra = {
            k: v for k, v in record.__dict__.items() if k not in _RECORD_FIELDS
        }
        if extra:
            entry["extra"] = extra
        if record.exc_info:
            entry["exception"] = self.formatException(record.exc_info)
        return json.dumps(entry, ensure_ascii=False, default=str)


def setup_logger(
    name: str,
    log_file: str,
    log_dir: str = settings.LOG_DIR,
    level: str = settings.LOG_LEVEL,
) -> logging.Logger:
    """
    File logger writing JSON lines to ``<log_dir>/<log_file>``.

    Calling it again for the same name and file returns the configured logger
    without adding a second handler.
    """
    os.makedirs(log_dir, exist_ok=True)
    log_path = os.path.abspath(os.path.join(log_dir, log_file))

    logger = logging.getLogger(name)
    logger.setLevel(level)
    logger.propagate = False
    if any(
        isinstance(h, logging.FileHandler) and h.baseFilename == log_path
        for h in logger.handlers
    ):
        return logger

    handler = logging.FileHandler(log_path, encoding="utf-8")
    handler.setFormatter(JSONFormatter())
    logger.addHandler(handler)
    return logger


loggers = {
    "main": setup_logger("slope_lab", "slope_lab.log"),
    "slopes": setup_logger("slope_lab.slopes", "slopes.log"),
    "mappings": setup_logger("slope_lab.mappings", "mappings.log"),
    "oracle": setup_logger("slope_lab.oracle", "oracle.log"),
    "verify": setup_logger("slope_lab.verify", "verify.log"),
    "time_tracker": setup_logger("slope_lab.time_tracker", "time_tracker.log"),
    "requests": setup_logger("slope_lab.requests", "requests.log"),
}
