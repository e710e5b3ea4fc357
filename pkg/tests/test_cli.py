"""CLI verb behavior: exit codes, formats, file artifacts."""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from spieval.cli import main

from test_store import SCOPE_PAYLOAD, SEED


@pytest.fixture
def runner():
    return CliRunner()


def _write(path: str, payload) -> None:
    Path(path).write_text(
        payload if isinstance(payload, str) else json.dumps(payload), encoding="utf-8"
    )


def _invoke(runner, *args, expect: int = 0):
    result = runner.invoke(main, list(args), catch_exceptions=False)
    assert result.exit_code == expect, result.output
    return result


def _bootstrap(runner) -> None:
    _write("seed.json", SEED)
    _invoke(runner, "--project", "p.json", "init", "--seed", "seed.json")


def test_init_creates_project_and_refuses_overwrite(runner):
    with runner.isolated_filesystem():
        _bootstrap(runner)
        assert Path("p.json").exists()
        result = runner.invoke(
            main, ["--project", "p.json", "init", "--seed", "seed.json"]
        )
        assert result.exit_code == 1
        assert "already exists" in result.output


def test_validate_reports_complete_context(runner):
    with runner.isolated_filesystem():
        _bootstrap(runner)
        result = _invoke(runner, "--project", "p.json", "validate")
        assert "complete" in result.output


def test_validate_structured_format(runner):
    with runner.isolated_filesystem():
        _bootstrap(runner)
        result = _invoke(
            runner, "--project", "p.json", "--format", "structured", "validate"
        )
        assert json.loads(result.output) == {"issues": []}


def test_scope_and_check_coverage(runner):
    with runner.isolated_filesystem():
        _bootstrap(runner)
        _write("assigns.json", SCOPE_PAYLOAD["assignments"])
        result = _invoke(
            runner,
            "--project", "p.json",
            "scope", "--levels", "Process", "--assignments", "assigns.json",
            "--gap-current", "low,low", "--gap-target", "high,high",
        )
        assert "scope set: 2 cells" in result.output
        result = _invoke(runner, "--project", "p.json", "check-coverage")
        assert "Sponsor" in result.output  # missing viewpoint warning
        result = _invoke(runner, "--project", "p.json", "report", "gap")
        assert "(low,low) -> (high,low) -> (high,high)" in result.output


def test_check_coverage_strict_exit_code(runner):
    with runner.isolated_filesystem():
        _bootstrap(runner)
        _write("assigns.json", SCOPE_PAYLOAD["assignments"])
        _invoke(
            runner,
            "--project", "p.json",
            "scope", "--levels", "Process", "--assignments", "assigns.json",
        )
        result = runner.invoke(
            main, ["--project", "p.json", "check-coverage", "--strict"]
        )
        assert result.exit_code == 1


def test_ingest_error_rows_exit_nonzero(runner):
    with runner.isolated_filesystem():
        _bootstrap(runner)
        _write(
            "obs.csv",
            "metric_id,entity_id,date,value,source\n"
            "ghost,pilot1,2023-12-01,50,historical\n",
        )
        result = runner.invoke(main, ["--project", "p.json", "ingest", "obs.csv"])
        assert result.exit_code == 1
        assert "line 2" in result.output and "ghost" in result.output


def test_full_verb_chain_with_kiviat_export(runner):
    with runner.isolated_filesystem():
        _bootstrap(runner)
        _write("assigns.json", SCOPE_PAYLOAD["assignments"])
        _invoke(runner, "--project", "p.json", "scope", "--levels", "Process",
                "--assignments", "assigns.json")
        _invoke(runner, "--project", "p.json", "derive-goals",
                "--object-label", "process of code inspections")
        _write(
            "obs.csv",
            "metric_id,entity_id,date,value,source\n"
            "pce,pilot1,2023-12-01,50,historical\n"
            "dre,pilot1,2023-12-01,70,historical\n",
        )
        _invoke(runner, "--project", "p.json", "ingest", "obs.csv")
        _invoke(
            runner,
            "--project", "p.json",
            "baseline", "--metric", "pce", "--decline", "-0.1", "--improve", "0.1",
            "--date", "2024-01-01",
        )
        result = _invoke(
            runner, "--project", "p.json",
            "plan-schedule", "--from", "2024-01-01", "--to", "2024-12-31",
        )
        assert "planned 2 evaluation instances" in result.output
        _write(
            "run1.csv",
            "metric_id,entity_id,date,value,source\n"
            "pce,pilot1,2024-04-30,55,evaluation\n"
            "dre,pilot1,2024-04-30,71,evaluation\n",
        )
        _write(
            "th.json",
            {
                "pce": {"decline_bound": "-0.1", "improve_bound": "0.1"},
                "dre": {"decline_bound": "-0.1", "improve_bound": "0.1"},
            },
        )
        _invoke(
            runner, "--project", "p.json",
            "execute", "EI01", "--observations", "run1.csv", "--thresholds", "th.json",
        )
        _write(
            "weights.json",
            [
                {"viewpoint": "Implementer", "level": "Process", "metric_id": "pce", "weight": "0.7"},
                {"viewpoint": "Implementer", "level": "Process", "metric_id": "dre", "weight": "0.3"},
            ],
        )
        _write(
            "ratings.json",
            [
                {"metric_id": "pce", "entity_id": "pilot1", "rating": 4,
                 "source_instance": "EI01", "rated_at": "2024-05-01"},
                {"metric_id": "dre", "entity_id": "pilot1", "rating": 0,
                 "source_instance": "EI01", "rated_at": "2024-05-01"},
            ],
        )
        _invoke(runner, "--project", "p.json", "rate",
                "--weights", "weights.json", "--ratings", "ratings.json")
        result = _invoke(
            runner, "--project", "p.json", "--as-of", "2024-05-02", "--format", "structured",
            "svi", "--viewpoint", "Implementer", "--level", "Process", "--entity", "pilot1",
        )
        assert json.loads(result.output)["value"] == "14/5"
        result = _invoke(
            runner, "--project", "p.json", "--as-of", "2024-05-02", "--format", "structured",
            "asvi", "--level", "Process",
        )
        assert json.loads(result.output)["value"] == "14/5"
        _invoke(
            runner, "--project", "p.json", "--as-of", "2024-05-02",
            "kiviat", "--level", "Process", "--entity", "pilot1", "--out", "chart.csv",
        )
        lines = Path("chart.csv").read_text().strip().split("\n")
        assert lines[0] == "axis,value,staleness"
        assert lines[1] == "Implementer,2.8,fresh"
        assert lines[3] == "Sponsor,,absent"
        result = _invoke(runner, "--project", "p.json", "report", "audit")
        assert "execute-evaluation" in result.output


def test_svi_what_if_leaves_store_unchanged(runner):
    with runner.isolated_filesystem():
        _bootstrap(runner)
        _write("assigns.json", SCOPE_PAYLOAD["assignments"])
        _invoke(runner, "--project", "p.json", "scope", "--levels", "Process",
                "--assignments", "assigns.json")
        _write(
            "run1.csv",
            "metric_id,entity_id,date,value,source\n"
            "pce,pilot1,2024-04-30,55,evaluation\n"
            "dre,pilot1,2024-04-30,71,evaluation\n",
        )
        _write("th.json", {
            "pce": {"decline_bound": "-0.1", "improve_bound": "0.1"},
            "dre": {"decline_bound": "-0.1", "improve_bound": "0.1"},
        })
        _invoke(runner, "--project", "p.json",
                "plan-schedule", "--from", "2024-01-01", "--to", "2024-12-31")
        _invoke(runner, "--project", "p.json",
                "execute", "EI01", "--observations", "run1.csv", "--thresholds", "th.json")
        _write("ratings.json", [
            {"metric_id": "pce", "entity_id": "pilot1", "rating": 4,
             "source_instance": "EI01", "rated_at": "2024-05-01"},
        ])
        _invoke(runner, "--project", "p.json", "rate", "--ratings", "ratings.json")
        before = Path("p.json").read_text()
        result = _invoke(
            runner, "--project", "p.json", "--as-of", "2024-05-02", "--format", "structured",
            "svi", "--viewpoint", "Implementer", "--level", "Process", "--entity", "pilot1",
            "--what-if", "pce=1",
        )
        assert json.loads(result.output)["value"] == "4"
        assert Path("p.json").read_text() == before


def test_delimited_format_for_goals(runner):
    with runner.isolated_filesystem():
        _bootstrap(runner)
        _write("assigns.json", SCOPE_PAYLOAD["assignments"])
        _invoke(runner, "--project", "p.json", "scope", "--levels", "Process",
                "--assignments", "assigns.json")
        result = _invoke(
            runner, "--project", "p.json", "--format", "delimited", "derive-goals",
        )
        lines = result.output.strip().split("\n")
        assert lines[0] == "goal_id,level,viewpoint,indicator,statement"
        assert lines[1].startswith("MG01,Process,Implementer,process.effectiveness,")
