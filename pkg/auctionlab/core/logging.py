import json
import logging
import sys
import time
import uuid
from contextlib import contextmanager
from contextvars import ContextVar
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Dict, Iterator, Optional

from .config import settings

# Custom log levels
LOG_LEVELS = {
    "debug": logging.DEBUG,
    "info": logging.INFO,
    "warning": logging.WARNING,
    "error": logging.ERROR,
    "critical": logging.CRITICAL,
}

# Attributes every LogRecord has; anything else came in through ``extra=``.
_RESERVED_ATTRS = set(vars(logging.makeLogRecord({}))) | {"message", "asctime", "run_id"}

_run_id: ContextVar[Optional[str]] = ContextVar("auctionlab_run_id", default=None)


class JSONFormatter(logging.Formatter):
    """Custom JSON formatter for structured logging."""

    def format(self, record: logging.LogRecord) -> str:
        """Format log record as JSON string."""
        log_record: Dict[str, Any] = {
            "timestamp": self.formatTime(record, self.datefmt),
            "level": record.levelname.lower(),
            "name": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }

        run_id = getattr(record, "run_id", None)
        if run_id is not None:
            log_record["run_id"] = run_id

        if record.exc_info:
            log_record["exception"] = self.formatException(record.exc_info)
        if record.stack_info:
            log_record["stack_info"] = self.formatStack(record.stack_info)
        for key, value in record.__dict__.items():
            if key not in _RESERVED_ATTRS and not key.startswith("_"):
                log_record[key] = value

        return json.dumps(log_record, ensure_ascii=False, default=str)


class RunContextFilter(logging.Filter):
    """Add the current run_id to log records."""

    def filter(self, record: logging.LogRecord) -> bool:
        if getattr(record, "run_id", None) is None:
            record.run_id = _run_id.get()
        return True


@contextmanager
def run_context(run_id: Optional[str] = None) -> Iterator[str]:
    """
    Bind a run identifier to every record logged inside the block.

    Args:
        run_id: Identifier to bind; a random one is generated when omitted.

    Yields:
        The bound run identifier.
    """
    rid = run_id or uuid.uuid4().hex[:12]
    token = _run_id.set(rid)
    start_time = time.time()
    log = logging.getLogger("auctionlab.run")
    log.info("Run started", extra={"run_id": rid})
    try:
        yield rid
    except Exception as exc:
        log.error(
            "Run failed",
            exc_info=exc,
            extra={"run_id": rid, "duration": time.time() - start_time},
        )
        raise
    else:
        log.info(
            "Run completed",
            extra={"run_id": rid, "duration": round((time.time() - start_time) * 1000)},
        )
    finally:
        _run_id.reset(token)


def setup_logging() -> None:
    """Configure logging for the application."""
    # Configure root logger
    root = logging.getLogger()
    root.setLevel(LOG_LEVELS.get(settings.LOG_LEVEL.lower(), logging.INFO))

    # Clear existing handlers
    root.handlers.clear()
    root.filters.clear()

    if settings.LOG_FORMAT.lower() == "json":
        formatter: logging.Formatter = JSONFormatter(
            fmt="%(message)s", datefmt="%Y-%m-%dT%H:%M:%S%z"
        )
    else:
        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )

    context_filter = RunContextFilter()

    # Console handler (always enabled)
    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setFormatter(formatter)
    console_handler.addFilter(context_filter)
    root.addHandler(console_handler)

    # File handler (if LOG_FILE is configured)
    if settings.LOG_FILE:
        log_path = Path(settings.LOG_FILE)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = RotatingFileHandler(
            log_path,
            maxBytes=10 * 1024 * 1024,  # 10MB
            backupCount=5,
            encoding="utf-8",
        )
        file_handler.setFormatter(formatter)
        file_handler.addFilter(context_filter)
        root.addHandler(file_handler)

    # Configure third-party loggers
    for name in ("numba", "matplotlib", "joblib"):
        logging.getLogger(name).setLevel(logging.WARNING)

    root.debug(
        "Logging configured",
        extra={
            "log_level": settings.LOG_LEVEL,
            "log_format": settings.LOG_FORMAT,
            "environment": settings.APP_ENV,
            "log_file": str(settings.LOG_FILE) if settings.LOG_FILE else None,
        },
    )


# Create and export logger instance
logger = logging.getLogger("auctionlab")

__all__ = [
    "logger",
    "setup_logging",
    "run_context",
    "JSONFormatter",
    "RunContextFilter",
    "LOG_LEVELS",
]
