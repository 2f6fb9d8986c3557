"""Command line for plugin exposure audits.

    plugaudit ingest snapshot.jsonl
    plugaudit audit --workers 8 --proxy http://127.0.0.1:8080
    plugaudit report <run_id> --format csv
    plugaudit diff <earlier> <later>
    plugaudit fixture gen --seed 42 --out ./store
    plugaudit fixture serve ./store --port 8080

Exit codes: 0 clean, 2 exposures found, 1 operational failure.
"""
from __future__ import annotations

import functools
import itertools
import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import click
import pandas as pd
from dotenv import load_dotenv

from modules.audit.pipeline import classify_listing, discover_plugin, layer_over, probe_plugin, run_audit
from modules.audit.settings import OUTPUT_FORMATS, AuditConfig, get_settings
from modules.audit.store import ListingStore
from modules.errors import PluginAuditError, PreconditionViolation
from modules.fixtures.generator import SNAPSHOT_FILE, generate_store
from modules.fixtures.server import FixtureServer
from modules.fixtures.spec import FixtureSpec, criterion_spec
from modules.legal.documents import assess_legal_doc
from modules.logger import configure_logging, get_logger
from modules.manifest.models import StoreListing
from modules.report.diff import diff_runs
from modules.report.models import EXPOSURE_KEYS, ExposureReport
from modules.report.render import markdown_table, render
from modules.report.store import RunStore

logger = get_logger(__name__)

EXIT_CLEAN = 0
EXIT_FAILURE = 1
EXIT_EXPOSED = 2


class AuditGroup(click.Group):
    """Maps PluginAuditError from any subcommand to exit code 1 and one stderr line."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except PluginAuditError as e:
            logger.debug("command failed", exc_info=True)
            click.echo(f"error: {type(e).__name__}: {e}", err=True)
            ctx.exit(EXIT_FAILURE)


def config_options(fn: Callable) -> Callable:
    """Flags that mirror AuditConfig. Unset flags keep the file/env/default value."""
    options = [
        click.option("--theta1", type=float, help="Name similarity threshold."),
        click.option("--theta2", type=float, help="Description similarity threshold."),
        click.option("--theta3", type=float, help="Legal-page similarity threshold."),
        click.option("--timeout", type=float, help="Per-request timeout in seconds."),
        click.option("--attempts", type=int, help="Requests per endpoint and retries per fetch."),
        click.option("--per-host-interval", type=float, help="Minimum seconds between requests to one host."),
        click.option("--backoff-initial", type=float, help="First retry delay in seconds."),
        click.option("--max-body-bytes", type=click.IntRange(min=1), help="Read at most this much of any response body."),
        click.option("--user-agent", type=str),
        click.option("--lexicon", "lexicon_path", type=click.Path(exists=True, dir_okay=False),
                     help="Invalid-response phrases, one per line."),
        click.option("--seed-library", "seed_library_path", type=click.Path(exists=True, dir_okay=False)),
        click.option("--keyword-table", "keyword_table_path", type=click.Path(exists=True, dir_okay=False)),
        click.option("--gazetteer", "gazetteer_path", type=click.Path(exists=True, dir_okay=False)),
        click.option("--scorer-url", type=str, help="External category scorer endpoint."),
        click.option("--proxy", "proxies", multiple=True, help="HTTP proxy vantage; repeatable."),
        click.option("--aggressive/--no-aggressive", "aggressive_methods", default=None,
                     help="Also probe methods other than GET."),
        click.option("--workers", type=click.IntRange(min=1), help="Worker threads (default 8)."),
    ]

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        flags = {k: kwargs.pop(k) for k in _CONFIG_FLAGS}
        flags["proxies"] = flags["proxies"] or None
        ctx = click.get_current_context()
        kwargs["config"] = ctx.obj["config"].with_overrides(**flags)
        return fn(*args, **kwargs)

    for option in reversed(options):
        wrapper = option(wrapper)
    return wrapper


_CONFIG_FLAGS = (
    "theta1", "theta2", "theta3", "timeout", "attempts", "per_host_interval", "backoff_initial",
    "max_body_bytes", "user_agent", "lexicon_path", "seed_library_path", "keyword_table_path", "gazetteer_path",
    "scorer_url", "proxies", "aggressive_methods", "workers",
)


def _listings(config: AuditConfig, snapshot: Optional[str]) -> List[StoreListing]:
    with ListingStore(config.db_path) as store:
        return store.listings(snapshot)


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
        click.echo(f"wrote {output}", err=True)
    else:
        click.echo(text)


def _table(rows: List[Dict[str, Any]], columns: List[str]) -> str:
    frame = pd.DataFrame(rows, columns=columns)
    return markdown_table(frame, index=False) if rows else "(no listings)"


@click.group(cls=AuditGroup)
@click.option("--config", "config_file", type=click.Path(dir_okay=False), envvar="PLUGAUDIT_CONFIG",
              help="JSON config file (default: config.json in the data dir).")
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
@click.option("--log-json", is_flag=True, help="One JSON object per log record.")
@click.pass_context
def cli(ctx: click.Context, config_file: Optional[str], verbose: bool, log_json: bool) -> None:
    """Exposure assessment for LLM plugin stores."""
    load_dotenv()
    configure_logging(logging.DEBUG if verbose else logging.INFO, json_format=log_json)
    ctx.ensure_object(dict)
    ctx.obj["config"] = get_settings(config_file)


@cli.command()
@click.argument("snapshot_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--name", help="Snapshot name (default: the file stem).")
@click.pass_obj
def ingest(obj: Dict[str, Any], snapshot_file: str, name: Optional[str]) -> None:
    """Load a store snapshot (JSON Lines or a JSON array) into the listing store."""
    with ListingStore(obj["config"].db_path) as store:
        info = store.ingest(snapshot_file, name=name)
    click.echo(f"ingested {info.listing_count} listings as snapshot '{info.name}'")


@cli.command()
@click.option("--snapshot", help="Snapshot name (default: latest ingested).")
@click.option("--run-id", help="Run id (default: timestamp plus random suffix).")
@click.option("--format", "fmt", type=click.Choice(OUTPUT_FORMATS), help="Also print the report in this format.")
@click.option("--output", type=click.Path(dir_okay=False), help="Write the printed report here.")
@config_options
def audit(config: AuditConfig, snapshot: Optional[str], run_id: Optional[str], fmt: Optional[str],
          output: Optional[str]) -> None:
    """Run every layer over the ingested listings and persist the run."""
    listings = _listings(config, snapshot)
    counter = itertools.count(1)

    def progress(report: ExposureReport) -> None:
        n = next(counter)
        if n % 50 == 0 or n == len(listings):
            logger.info("%d/%d plugins audited", n, len(listings))

    run = run_audit(listings, config, run_id=run_id, progress=progress)
    path = RunStore(config.runs_dir).save(run)
    click.echo(run.run_id)
    if fmt:
        _emit(render(run, fmt), output)
    totals = run.totals()
    click.echo(f"saved to {path}; " + ", ".join(f"{k}={totals[k]}" for k in EXPOSURE_KEYS), err=True)
    click.get_current_context().exit(EXIT_EXPOSED if any(totals.values()) else EXIT_CLEAN)


def _probe_row(listing: StoreListing, ctx) -> Dict[str, Any]:
    found = discover_plugin(listing, ctx)
    row = {"plugin": listing.plugin_id, "manifest": found.outcome.status.value, "auth": "",
           "e3": False, "e4": False, "e5": False, "reason": ""}
    if found.record.surface is None:
        return row
    _, exposures, summary, _ = probe_plugin(found.record, ctx)
    row.update(e3=exposures.exposure3, e4=exposures.exposure4, e5=exposures.exposure5)
    row.update(auth=summary.auth, reason=summary.reason or "")
    return row


@cli.command()
@click.option("--snapshot", help="Snapshot name (default: latest ingested).")
@config_options
def probe(config: AuditConfig, snapshot: Optional[str]) -> None:
    """Manifest discovery plus API probing only."""
    rows = layer_over(_listings(config, snapshot), config, _probe_row)
    click.echo(_table(rows, ["plugin", "manifest", "auth", "e3", "e4", "e5", "reason"]))


def _legal_row(listing: StoreListing, ctx) -> Dict[str, Any]:
    verdict = assess_legal_doc(listing, ctx.library, ctx.policy, ctx.transport)
    return {
        "plugin": listing.plugin_id,
        "category": verdict.category.value if verdict.category else verdict.accessibility.value,
        "matched": ", ".join(verdict.matched_seeds),
    }


@cli.command()
@click.option("--snapshot", help="Snapshot name (default: latest ingested).")
@config_options
def legal(config: AuditConfig, snapshot: Optional[str]) -> None:
    """Fetch and categorize each listing's legal document."""
    rows = layer_over(_listings(config, snapshot), config, _legal_row)
    click.echo(_table(rows, ["plugin", "category", "matched"]))


def _classify_row(listing: StoreListing, ctx) -> Dict[str, Any]:
    assignment, regions, _ = classify_listing(listing, ctx)
    return {
        "plugin": listing.plugin_id,
        "category": assignment.label,
        "score": assignment.score,
        "regions": ", ".join(regions),
    }


@cli.command()
@click.option("--snapshot", help="Snapshot name (default: latest ingested).")
@config_options
def classify(config: AuditConfig, snapshot: Optional[str]) -> None:
    """Functional category and target regions per listing. No network."""
    rows = layer_over(_listings(config, snapshot), config, _classify_row)
    click.echo(_table(rows, ["plugin", "category", "score", "regions"]))


@cli.command()
@click.argument("run", required=False)
@click.option("--format", "fmt", type=click.Choice(OUTPUT_FORMATS), help="Default: the configured output format.")
@click.option("--output", type=click.Path(dir_okay=False))
@click.pass_obj
def report(obj: Dict[str, Any], run: Optional[str], fmt: Optional[str], output: Optional[str]) -> None:
    """Render a persisted run (id or path; default: the latest)."""
    config: AuditConfig = obj["config"]
    runs = RunStore(config.runs_dir)
    loaded = runs.load(run) if run else runs.latest()
    if loaded is None:
        raise PreconditionViolation(f"no runs in {config.runs_dir}")
    _emit(render(loaded, fmt or config.output_format), output)


@cli.command()
@click.argument("earlier")
@click.argument("later")
@click.option("--format", "fmt", type=click.Choice(OUTPUT_FORMATS), help="Default: the configured output format.")
@click.option("--output", type=click.Path(dir_okay=False))
@click.pass_obj
def diff(obj: Dict[str, Any], earlier: str, later: str, fmt: Optional[str], output: Optional[str]) -> None:
    """Exposure counts and per-plugin transitions between two runs."""
    config: AuditConfig = obj["config"]
    runs = RunStore(config.runs_dir)
    _emit(render(diff_runs(runs.load(earlier), runs.load(later)), fmt or config.output_format), output)


@cli.command()
@click.pass_obj
def runs(obj: Dict[str, Any]) -> None:
    """List persisted runs, oldest first."""
    entries = RunStore(obj["config"].runs_dir).list_runs()
    rows = [{"run": e.run_id, "timestamp": e.timestamp, "config": e.config_digest, "plugins": e.plugins}
            for e in entries]
    click.echo(_table(rows, ["run", "timestamp", "config", "plugins"]) if rows else "(no runs)")


@cli.group()
def fixture() -> None:
    """Synthetic plugin store with known ground truth."""


@fixture.command("gen")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--spec", "spec_file", type=click.Path(exists=True, dir_okay=False),
              help="FixtureSpec as JSON (default: the 200-plugin criterion store).")
def fixture_gen(out_dir: str, seed: int, spec_file: Optional[str]) -> None:
    """Write a store, its routes and its ground truth."""
    if spec_file:
        data = json.loads(Path(spec_file).read_text(encoding="utf-8"))
        data.setdefault("seed", seed)
        spec = FixtureSpec.from_dict(data)
    else:
        spec = criterion_spec(seed)
    store_dir, truth = generate_store(spec, Path(out_dir))
    counts = truth.counts()
    click.echo(f"{len(truth)} plugins in {store_dir}; snapshot {store_dir / SNAPSHOT_FILE}")
    click.echo(", ".join(f"{k}={counts[k]}" for k in EXPOSURE_KEYS))


@fixture.command("serve")
@click.argument("store_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def fixture_serve(store_dir: str, port: int, host: str) -> None:
    """Serve a generated store as an HTTP proxy until interrupted."""
    server = FixtureServer(store_dir, port=port, host=host)
    server.start()
    click.echo(f"serving {store_dir} on {server.url} (use it as --proxy); Ctrl-C to stop")
    server.serve_forever()


def main() -> None:
    cli(prog_name="plugaudit")


if __name__ == "__main__":
    main()
