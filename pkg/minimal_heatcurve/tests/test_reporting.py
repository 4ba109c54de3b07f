from __future__ import annotations

import json

from minimal_heatcurve.config import RunConfig
from minimal_heatcurve.reporting import build_summary, render_report


def make_summary() -> dict:
    return build_summary(
        "heatcurve",
        RunConfig(n_cluster=2),
        ["heatcurve_1.csv", "heatcurve_0.csv"],
        {
            "building": {"building_id": "B1", "construction_type": "MFH_F", "rooms": 60, "heaters": 64},
            "curves": {
                "0": {"computed_points": 24, "min_t_sup_C": 31.25, "max_t_sup_C": 58.5},
                "1": {"computed_points": 20, "min_t_sup_C": 29.0, "max_t_sup_C": 55.0},
            },
            "critical_room": "r-17",
            "hallway_passed": False,
        },
    )


def test_summary_is_sorted_and_versioned() -> None:
    summary = make_summary()
    assert summary["version"] == "1.0"
    assert summary["artifacts"] == ["heatcurve_0.csv", "heatcurve_1.csv"]
    assert summary["parameters"]["n_cluster"] == 2
    assert summary["parameters"]["output_range"] == [-15.0, 20.0]


def test_render_text() -> None:
    text = render_report(make_summary(), "text")
    assert text.startswith("Heatcurve Report")
    assert "Critical room: r-17" in text
    assert "Hallway assumption: VIOLATED" in text
    assert "cluster 0: 31.2 .. 58.5 C (24 computed bins)" in text


def test_render_markdown() -> None:
    markdown = render_report(make_summary(), "markdown")
    assert markdown.splitlines()[0] == "# Heatcurve Report"
    assert "| 1 | 20 | 29.0 | 55.0 |" in markdown
    assert "- Building: B1 (MFH_F, 60 rooms, 64 heaters)" in markdown


def test_render_json_and_empty_payload() -> None:
    payload = json.loads(render_report({"command": "ingest"}, "JSON"))
    assert payload == {"command": "ingest", "version": "1.0"}
    assert "(no data)" in render_report({}, "text")
