"""Run summaries and their text, markdown or JSON rendering."""
from __future__ import annotations

import json
from typing import TYPE_CHECKING, Any, Mapping, Sequence

if TYPE_CHECKING:
    from .config import RunConfig

SUMMARY_VERSION = "1.0"


def build_summary(
    command: str,
    config: "RunConfig",
    artifacts: Sequence[str],
    sections: Mapping[str, Any],
) -> dict[str, Any]:
    """Normalized payload consumed by :func:`render_report`; free of timestamps."""

    return {
        "version": SUMMARY_VERSION,
        "command": command,
        "parameters": {
            "n_cluster": config.n_cluster,
            "seed": config.seed,
            "bin_width_K": config.bin_width_K,
            "min_samples": config.min_samples,
            "hallway_assumed_t_sup_C": config.hallway_assumed_t_sup_C,
            "safety_offset_K": config.safety_offset_K,
            "output_range": list(config.output_range),
            "sg_window": config.sg_window,
            "sg_polyorder": config.sg_polyorder,
            "heater_split": config.heater_split,
        },
        "artifacts": sorted(artifacts),
        **sections,
    }


def render_report(raw: Mapping[str, Any], fmt: str) -> str:
    """Render a run summary according to *fmt*.

    ``fmt`` accepts ``"text"``, ``"markdown"`` or ``"json"``.
    """

    fmt = fmt.lower()
    if fmt == "json":
        payload = dict(raw)
        payload.setdefault("version", SUMMARY_VERSION)
        return json.dumps(payload, indent=2, ensure_ascii=False)

    curves: Mapping[str, Mapping[str, Any]] = raw.get("curves") or {}
    building: Mapping[str, Any] = raw.get("building") or {}
    evaluation: Mapping[str, Any] = raw.get("evaluation") or {}

    if fmt == "markdown":
        lines = [
            "# Heatcurve Report",
            "",
            "## Summary",
            f"- Command: {raw.get('command', '?')}",
            f"- Clusters: {raw.get('parameters', {}).get('n_cluster', '?')}",
        ]
        if building:
            lines.append(
                f"- Building: {building.get('building_id')} ({building.get('construction_type')}, "
                f"{building.get('rooms')} rooms, {building.get('heaters')} heaters)"
            )
        if "critical_room" in raw:
            lines.append(f"- Critical room: {raw.get('critical_room')}")
        if "hallway_passed" in raw:
            lines.append(f"- Hallway assumption: {'passed' if raw['hallway_passed'] else 'VIOLATED'}")
        lines.extend(["", "## Heatcurves"])
        if curves:
            lines.append("| Cluster | Computed bins | Min supply (C) | Max supply (C) |")
            lines.append("| --- | --- | --- | --- |")
            for cluster, curve in sorted(curves.items()):
                lines.append(
                    f"| {cluster} | {curve.get('computed_points')} | "
                    f"{curve.get('min_t_sup_C', 0):.1f} | {curve.get('max_t_sup_C', 0):.1f} |"
                )
        else:
            lines.append("(no heatcurve data)")
        if evaluation:
            lines.extend(
                [
                    "",
                    "## Evaluation",
                    f"- Reference window start: {evaluation.get('ref_start')}",
                    f"- Temperature RMSE: {evaluation.get('rmse_K', 0):.3f} K",
                    f"- Median valve opening delta: {evaluation.get('median_delta_pct', 0):.1f} %",
                ]
            )
        return "\n".join(lines)

    lines = [
        "Heatcurve Report",
        "================",
        f"Command: {raw.get('command', '?')}",
        f"Artifacts: {len(raw.get('artifacts', []))}",
    ]
    if building:
        lines.append(f"Building: {building.get('building_id')} ({building.get('rooms')} rooms)")
    if "critical_room" in raw:
        lines.append(f"Critical room: {raw.get('critical_room')}")
    if "hallway_passed" in raw:
        lines.append(f"Hallway assumption: {'passed' if raw['hallway_passed'] else 'VIOLATED'}")
    lines.extend(["", "Heatcurves:"])
    if curves:
        for cluster, curve in sorted(curves.items()):
            lines.append(
                f"  - cluster {cluster}: {curve.get('min_t_sup_C', 0):.1f} .. "
                f"{curve.get('max_t_sup_C', 0):.1f} C ({curve.get('computed_points')} computed bins)"
            )
    else:
        lines.append("  (no data)")
    if evaluation:
        lines.extend(
            [
                "",
                "Evaluation:",
                f"  rmse: {evaluation.get('rmse_K', 0):.3f} K",
                f"  median valve delta: {evaluation.get('median_delta_pct', 0):.1f} %",
            ]
        )
    return "\n".join(lines)


__all__ = ["build_summary", "render_report"]
