from __future__ import annotations

import json
import logging

from minimal_heatcurve.logger import (
    LOGGER_NAME,
    ROTATE_BYTES,
    configure_logging,
    get_logger,
    log_event,
    next_log_path,
    timed,
)


def _entries(path) -> list[dict]:
    for handler in logging.getLogger(LOGGER_NAME).handlers:
        handler.flush()
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line]


def test_oversized_log_is_rolled_over(tmp_path) -> None:
    log_path = next_log_path("heatcurve")
    log_path.write_bytes(b"0" * (ROTATE_BYTES + 10))

    configure_logging(log_path, level=logging.DEBUG)
    get_logger("ingest").debug("first entry")

    assert log_path.parent == tmp_path / ".minimal_heatcurve" / "logs"
    assert log_path.name.startswith("heatcurve-")
    assert log_path.with_name(log_path.name + ".1").stat().st_size > ROTATE_BYTES
    assert _entries(log_path)[0]["action"] == "log"


def test_log_event_carries_pipeline_context() -> None:
    log_path = next_log_path("events")
    configure_logging(log_path)

    log_event(
        get_logger("heatcurve"),
        level=logging.WARNING,
        action="heatcurve.smoothing_skipped",
        message="window not applied",
        cluster=1,
        t_out=-4.0,
        extra={"computed": 3},
    )
    log_event(get_logger("cluster"), level=logging.DEBUG, action="cluster.iter", message="hidden")

    (entry,) = _entries(log_path)
    assert entry["level"] == "WARNING"
    assert entry["action"] == "heatcurve.smoothing_skipped"
    assert entry["cluster"] == 1
    assert entry["tOut"] == -4.0
    assert entry["computed"] == 3
    assert "ms" not in entry
    assert entry["ts"].endswith("Z")


def test_configure_logging_keeps_first_handler(tmp_path) -> None:
    first = configure_logging(tmp_path / "a.log")
    second = configure_logging(tmp_path / "b.log")

    assert first is second
    assert len(first.handlers) == 1
    assert not (tmp_path / "b.log").exists()


def test_timed_logs_duration_and_details() -> None:
    log_path = next_log_path("timed")
    configure_logging(log_path)

    with timed(get_logger("pipeline"), "heatcurve.build", "building", cluster=0) as details:
        details["message"] = "Computed 5 heatcurve point(s)"
        details["bins"] = 5

    (entry,) = _entries(log_path)
    assert entry["action"] == "heatcurve.build"
    assert entry["message"] == "Computed 5 heatcurve point(s)"
    assert entry["cluster"] == 0
    assert entry["bins"] == 5
    assert entry["ms"] >= 0.0
