"""JSON-line logging for the heatcurve pipeline.

Every module logs through a child of the ``minimal_heatcurve`` logger. Entries
carry ``ts``, ``level``, ``action`` and ``message`` plus optional pipeline
context (``cluster``, ``tOut``, ``ms``) and free-form extras.
"""
from __future__ import annotations

import json
import logging
import time
from collections.abc import Iterator
from contextlib import contextmanager
from datetime import datetime, timezone
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any

LOGGER_NAME = "minimal_heatcurve"

ROTATE_BYTES = 5 * 1024 * 1024
BACKUP_COUNT = 3


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds").replace("+00:00", "Z")


class JsonLineFormatter(logging.Formatter):
    """Render records as one JSON object per line.

    Records emitted through :func:`log_event` carry their payload in the
    ``event`` attribute. Plain ``logger.info(...)`` calls are wrapped with an
    ``action`` of ``log``.
    """

    def format(self, record: logging.LogRecord) -> str:
        payload = getattr(record, "event", None)
        if payload is None:
            payload = {
                "ts": _utc_now(),
                "level": record.levelname,
                "action": "log",
                "message": record.getMessage(),
            }
        return json.dumps(payload, ensure_ascii=False, default=str)


def configure_logging(log_path: Path | None = None, level: int = logging.INFO) -> logging.Logger:
    """Attach one handler to the package logger and return it.

    Repeated calls keep the first handler. A file that already exceeds
    :data:`ROTATE_BYTES` is rolled over to ``<name>.1`` on the first write.
    """

    logger = logging.getLogger(LOGGER_NAME)
    if logger.handlers:
        return logger

    logger.setLevel(level)
    logger.propagate = False
    handler: logging.Handler
    if log_path is not None:
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handler = RotatingFileHandler(
            log_path, maxBytes=ROTATE_BYTES, backupCount=BACKUP_COUNT, encoding="utf-8"
        )
    else:
        handler = logging.StreamHandler()
    handler.setFormatter(JsonLineFormatter())
    logger.addHandler(handler)
    return logger


def get_logger(component: str) -> logging.Logger:
    return logging.getLogger(f"{LOGGER_NAME}.{component}")


def log_dir() -> Path:
    return Path.home() / ".minimal_heatcurve" / "logs"


def next_log_path(command: str, *, base_dir: Path | None = None) -> Path:
    """Return ``<base>/<command>-<UTC timestamp>.log``, creating ``base``."""

    base = base_dir or log_dir()
    base.mkdir(parents=True, exist_ok=True)
    return base / f"{command}-{datetime.now(timezone.utc):%Y%m%d-%H%M%S}.log"


def log_event(
    logger: logging.Logger,
    *,
    level: int,
    action: str,
    message: str,
    cluster: int | None = None,
    t_out: float | None = None,
    duration_ms: float | None = None,
    extra: dict[str, Any] | None = None,
) -> None:
    if not logger.isEnabledFor(level):
        return
    event: dict[str, Any] = {
        "ts": _utc_now(),
        "level": logging.getLevelName(level),
        "action": action,
        "message": message,
    }
    context = {"cluster": cluster, "tOut": t_out, "ms": duration_ms}
    event.update({key: value for key, value in context.items() if value is not None})
    if extra:
        event.update(extra)
    logger.log(level, message, extra={"event": event})


@contextmanager
def timed(logger: logging.Logger, action: str, message: str, **context: Any) -> Iterator[dict[str, Any]]:
    """Log *action* with its wall time in ms once the block completes.

    The yielded dict may be updated inside the block; its ``message`` key
    replaces *message* and any other keys are logged as extras.
    """

    details: dict[str, Any] = {}
    started = time.perf_counter()
    yield details
    log_event(
        logger,
        level=logging.INFO,
        action=action,
        message=details.pop("message", message),
        duration_ms=round((time.perf_counter() - started) * 1000.0, 3),
        extra=details or None,
        **context,
    )


__all__ = [
    "LOGGER_NAME",
    "JsonLineFormatter",
    "configure_logging",
    "get_logger",
    "log_event",
    "next_log_path",
    "timed",
]
