from __future__ import annotations

import json

import pandas as pd
import pytest
from conftest import START, write_dataset

from minimal_heatcurve.cli import main


def _artifacts(directory) -> dict[str, bytes]:
    return {path.name: path.read_bytes() for path in sorted(directory.iterdir())}


def test_heatcurve_run_is_byte_identical(dataset, capsys) -> None:
    first = dataset.directory / "first"
    second = dataset.directory / "second"

    assert main(["heatcurve", "--config", str(dataset.config), "--output", str(first)]) == 0
    assert main(["heatcurve", "--config", str(dataset.config), "--output", str(second)]) == 0

    assert _artifacts(first) == _artifacts(second)
    out = capsys.readouterr().out
    assert "heatcurve: artifacts written to" in out


def test_flags_override_the_config_file(dataset) -> None:
    output = dataset.directory / "offset"
    code = main(
        [
            "heatcurve",
            "--config",
            str(dataset.config),
            "--output",
            str(output),
            "--safety-offset",
            "2",
            "--output-range",
            "-15",
            "20",
        ]
    )
    assert code == 0
    summary = json.loads((output / "summary.json").read_text(encoding="utf-8"))
    assert summary["parameters"]["safety_offset_K"] == 2.0
    assert summary["parameters"]["output_range"] == [-15.0, 20.0]
    table = pd.read_csv(output / "heatcurve_0.csv")
    assert table["t_out_C"].tolist() == [float(t) for t in range(-15, 21)]


def test_missing_weather_file(dataset, capsys) -> None:
    dataset.weather.unlink()
    code = main(["ingest", "--config", str(dataset.config)])
    assert code == 1
    err = capsys.readouterr().err
    assert "weather file not found" in err
    assert str(dataset.weather) in err


def test_disjoint_series_exit_with_data_error(tmp_path, capsys) -> None:
    data = write_dataset(tmp_path / "data", days=2, weather_offset=pd.Timedelta(days=5))
    code = main(["heatcurve", "--config", str(data.config)])
    assert code == 2
    assert "[ingest]" in capsys.readouterr().err
    assert not (data.directory / "out").exists()


def test_undecodable_weather_file_is_a_data_error(dataset, capsys) -> None:
    with dataset.weather.open("ab") as handle:
        handle.write(b"2021-01-20T00:00:00Z,\xff\xfe\n")
    code = main(["ingest", "--config", str(dataset.config)])
    assert code == 2
    err = capsys.readouterr().err
    assert err.startswith("[ingest]")
    assert "invalid UTF-8" in err
    assert not (dataset.directory / "out").exists()


def test_undecodable_building_file_is_a_config_error(dataset, capsys) -> None:
    dataset.building.write_bytes(b'{\n  "building_id": "\xe9"\n}\n')
    assert main(["heatcurve", "--config", str(dataset.config)]) == 1
    err = capsys.readouterr().err
    assert "[building]" in err
    assert "(line 2, column 19)" in err


def test_invalid_flag_value(dataset) -> None:
    assert main(["heatcurve", "--config", str(dataset.config), "--sg-window", "4"]) == 1
    assert main(["heatcurve", "--config", str(dataset.config), "--n-cluster", "many"]) == 1
    assert main([]) == 1


def test_evaluate_requires_valves(tmp_path, capsys) -> None:
    data = write_dataset(tmp_path / "data")
    config = json.loads(data.config.read_text(encoding="utf-8"))
    del config["paths"]["valves"]
    data.config.write_text(json.dumps(config), encoding="utf-8")

    code = main(["evaluate", "--config", str(data.config), "--exp-range", "2021-01-12T00:00:00Z", "2021-01-13T00:00:00Z"])
    assert code == 1
    assert "valves" in capsys.readouterr().err


def test_evaluate_finds_the_repeated_weather(dataset) -> None:
    exp_start = START + pd.Timedelta(days=8)
    exp_end = exp_start + pd.Timedelta(hours=12)
    output = dataset.directory / "evaluation"
    code = main(
        [
            "evaluate",
            "--config",
            str(dataset.config),
            "--output",
            str(output),
            "--exp-range",
            exp_start.isoformat(),
            exp_end.isoformat(),
        ]
    )
    assert code == 0

    match = json.loads((output / "window_match.json").read_text(encoding="utf-8"))
    assert match["rmse_K"] == 0.0
    assert pd.Timestamp(match["ref_start"]) < exp_start
    # the outdoor temperature cycle repeats every 26 hours
    assert (exp_start - pd.Timestamp(match["ref_start"])) % pd.Timedelta(hours=26) == pd.Timedelta(0)

    stats = json.loads((output / "valve_stats.json").read_text(encoding="utf-8"))
    assert stats["median_delta_pct"] == 0.0
    assert stats["experiment"]["saturated"] == ["r4-b"]


def test_report_renders_the_summary(dataset, capsys) -> None:
    output = dataset.directory / "report-run"
    assert main(["heatcurve", "--config", str(dataset.config), "--output", str(output)]) == 0
    capsys.readouterr()

    assert main(["report", str(output)]) == 0
    text = capsys.readouterr().out
    assert "Heatcurve Report" in text
    assert "cluster 0" in text

    target = dataset.directory / "report.md"
    assert main(["report", str(output / "summary.json"), "--format", "markdown", "--output", str(target)]) == 0
    assert target.read_text(encoding="utf-8").startswith("# Heatcurve Report")

    assert main(["report", str(dataset.directory / "missing")]) == 1


@pytest.mark.parametrize(
    ("command", "expected"),
    [
        ("cluster", {"cluster_model.json", "quantiles.csv", "elbow.csv"}),
        (
            "demand",
            {"cluster_model.json", "quantiles.csv", "elbow.csv", "demand_model.json", "demand.csv"},
        ),
        (
            "loads",
            {
                "cluster_model.json",
                "quantiles.csv",
                "elbow.csv",
                "demand_model.json",
                "demand.csv",
                "room_loads.csv",
            },
        ),
    ],
)
def test_partial_commands_write_their_stage_artifacts(dataset, command, expected) -> None:
    output = dataset.directory / command

    assert main([command, "--config", str(dataset.config), "--output", str(output)]) == 0

    assert {path.name for path in output.iterdir()} == expected | {"summary.json"}
    summary = json.loads((output / "summary.json").read_text(encoding="utf-8"))
    assert summary["command"] == command


def test_rerun_with_fewer_clusters_replaces_the_previous_curves(tmp_path) -> None:
    data = write_dataset(tmp_path / "data", days=20, n_cluster=3, min_samples=1)
    output = tmp_path / "out"
    output.mkdir()
    (output / "notes.txt").write_text("kept\n", encoding="utf-8")

    assert main(["heatcurve", "--config", str(data.config), "--output", str(output)]) == 0
    assert len(list(output.glob("heatcurve_*.csv"))) == 3

    assert main(["heatcurve", "--config", str(data.config), "--output", str(output), "--n-cluster", "1"]) == 0

    assert sorted(path.name for path in output.glob("heatcurve_*.csv")) == ["heatcurve_0.csv"]
    assert sorted(path.name for path in output.glob("automation_*.csv")) == ["automation_0.csv"]
    summary = json.loads((output / "summary.json").read_text(encoding="utf-8"))
    assert sorted(summary["artifacts"]) == sorted(path.name for path in output.iterdir() if path.name != "notes.txt")
    assert (output / "notes.txt").read_text(encoding="utf-8") == "kept\n"
