import json
import logging

import pytest
from click.testing import CliRunner

from modules.audit.cli import cli
from modules.audit.settings import get_settings
from modules.fixtures.generator import SNAPSHOT_FILE, load_truth
from modules.fixtures.server import FixtureServer
from modules.fixtures.tests.conftest import SMALL_SPEC
from modules.report.store import RunStore

QUIET = [
    {"plugin_id": "q1", "name": "Weather Pal", "description": "Daily weather forecasts for Japan.",
     "legal_url": None, "contact_email": "dev@q1.test"},
    {"plugin_id": "q2", "name": "Recipe Owl", "description": "Recipes and cooking tips.",
     "legal_url": None, "contact_email": None},
]


@pytest.fixture
def runner(data_dir):
    yield CliRunner()
    # the CLI points the plugaudit logger at the runner's stderr
    root = logging.getLogger("plugaudit")
    root.handlers.clear()
    root.propagate = True


@pytest.fixture
def quiet_snapshot(tmp_path):
    path = tmp_path / "quiet.jsonl"
    path.write_text("\n".join(json.dumps(r) for r in QUIET) + "\n")
    return path


def _ingest(runner, path):
    result = runner.invoke(cli, ["ingest", str(path)])
    assert result.exit_code == 0, result.output
    return result


def test_ingest_reports_count(runner, quiet_snapshot):
    result = _ingest(runner, quiet_snapshot)
    assert "ingested 2 listings as snapshot 'quiet'" in result.output


def test_ingest_errors_exit_1(runner, tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    result = runner.invoke(cli, ["ingest", str(empty)])
    assert result.exit_code == 1
    assert "MalformedSnapshot" in result.output

    dup = tmp_path / "dup.jsonl"
    dup.write_text(json.dumps(QUIET[0]) + "\n" + json.dumps(QUIET[0]) + "\n")
    result = runner.invoke(cli, ["ingest", str(dup)])
    assert result.exit_code == 1
    assert "DuplicateId" in result.output and "q1" in result.output


def test_audit_without_snapshot_exits_1(runner):
    result = runner.invoke(cli, ["audit"])
    assert result.exit_code == 1
    assert "no snapshot" in result.output


def test_clean_audit_exits_0_and_persists(runner, quiet_snapshot):
    _ingest(runner, quiet_snapshot)
    result = runner.invoke(cli, ["audit", "--run-id", "clean", "--per-host-interval", "0", "--workers", "2"])
    assert result.exit_code == 0, result.output
    assert "clean" in result.output

    run = RunStore(get_settings().runs_dir).load("clean")
    assert [r.plugin_id for r in run.reports] == ["q1", "q2"]
    assert all(r.fetch_status == "NoLegalUrl" for r in run.reports)
    assert run.by_id()["q1"].regions == ("Japan",)

    listed = runner.invoke(cli, ["runs"])
    assert "clean" in listed.output

    as_json = runner.invoke(cli, ["report", "clean", "--format", "json"])
    assert json.loads(as_json.output)["run_id"] == "clean"

    as_markdown = runner.invoke(cli, ["report"])
    assert "# Exposure assessment `clean`" in as_markdown.output


def test_flags_reach_the_config(runner, quiet_snapshot):
    _ingest(runner, quiet_snapshot)
    runner.invoke(cli, ["audit", "--run-id", "a"])
    runner.invoke(cli, ["audit", "--run-id", "b", "--theta1", "0.5"])
    runs = RunStore(get_settings().runs_dir)
    assert runs.load("a").config_digest != runs.load("b").config_digest

    result = runner.invoke(cli, ["diff", "a", "b"])
    assert result.exit_code == 1
    assert "IncomparableRuns" in result.output


def test_bad_flag_value_exits_1(runner, quiet_snapshot):
    _ingest(runner, quiet_snapshot)
    result = runner.invoke(cli, ["audit", "--theta1", "1.5"])
    assert result.exit_code == 1


def test_report_without_runs_exits_1(runner):
    result = runner.invoke(cli, ["report"])
    assert result.exit_code == 1
    assert "no runs" in result.output


def test_classify_and_legal_tables(runner, quiet_snapshot):
    _ingest(runner, quiet_snapshot)
    classified = runner.invoke(cli, ["classify"])
    assert classified.exit_code == 0
    assert "| q1 | Weather |" in classified.output
    legal = runner.invoke(cli, ["legal"])
    assert legal.exit_code == 0
    assert "| q2 | Inaccessible |" in legal.output


def test_fixture_gen_is_deterministic(runner, tmp_path):
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(json.dumps(SMALL_SPEC.to_dict()))
    for name in ("a", "b"):
        result = runner.invoke(cli, ["fixture", "gen", "--spec", str(spec_file), "--out", str(tmp_path / name)])
        assert result.exit_code == 0, result.output
    assert (tmp_path / "a" / SNAPSHOT_FILE).read_bytes() == (tmp_path / "b" / SNAPSHOT_FILE).read_bytes()


def test_audit_against_fixture_server(runner, tmp_path):
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(json.dumps(SMALL_SPEC.to_dict()))
    store_dir = tmp_path / "store"
    runner.invoke(cli, ["fixture", "gen", "--spec", str(spec_file), "--out", str(store_dir)])
    _ingest(runner, store_dir / SNAPSHOT_FILE)
    truth = load_truth(store_dir)

    with FixtureServer(store_dir) as server:
        args = ["--proxy", server.url, "--per-host-interval", "0", "--backoff-initial", "0", "--timeout", "2"]
        first = runner.invoke(cli, ["audit", "--run-id", "fx1", *args])
        second = runner.invoke(cli, ["audit", "--run-id", "fx2", *args])
        probed = runner.invoke(cli, ["probe", *args])

    assert first.exit_code == 2, first.output
    assert second.exit_code == 2
    assert probed.exit_code == 0
    runs = RunStore(get_settings().runs_dir)
    run = runs.load("fx1")
    assert run.totals() == truth.counts()

    result = runner.invoke(cli, ["diff", "fx1", "fx2", "--format", "json"])
    assert result.exit_code == 0, result.output
    diff = json.loads(result.output)
    assert all(v["change"] in (0.0, None) for v in diff["exposures"].values())
    assert all(not t["resolved"] and not t["new"] for t in diff["transitions"].values())
