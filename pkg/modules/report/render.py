from __future__ import annotations

import csv
import io
import json
from typing import Any, List, Union

import pandas as pd

from modules.errors import MalformedDocument, PreconditionViolation
from modules.report.diff import RunDiff
from modules.report.models import AssessmentRun
from modules.report.tables import (
    aggregate_by_category,
    category_table,
    email_domain_histogram,
    legal_table,
    outcome_table,
    region_table,
    response_table,
    summary_table,
)

FORMATS = ("json", "csv", "markdown")
HEURISTIC_NOTE = "_Legal-document categories come from a keyword heuristic over titles and headings._"


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.1f}"
    text = str(value)
    return text.replace("|", "\\|").replace("\n", " ")


def markdown_table(frame: pd.DataFrame, index: bool = True) -> str:
    """Pipe table from a DataFrame; floats print with one decimal."""
    headers: List[str] = ([frame.index.name or ""] if index else []) + [str(c) for c in frame.columns]
    lines = [
        "| " + " | ".join(_cell(h) for h in headers) + " |",
        "|" + "|".join(["---"] * len(headers)) + "|",
    ]
    # itertuples keeps per-column dtypes; iterrows would upcast ints to float
    for label, row in zip(frame.index, frame.itertuples(index=False)):
        cells = ([label] if index else []) + list(row)
        lines.append("| " + " | ".join(_cell(v) for v in cells) + " |")
    return "\n".join(lines)


def _run_markdown(run: AssessmentRun) -> str:
    sections = [
        f"# Exposure assessment `{run.run_id}`",
        f"Taken {run.timestamp}, config `{run.config_digest}`, {len(run.reports)} plugins.",
        "## Exposures",
        markdown_table(summary_table(run), index=False),
        "## Manifest retrieval",
        markdown_table(outcome_table(run)),
        "## Exposures by category",
        markdown_table(_nonempty(aggregate_by_category(run))),
        "## API responses",
        markdown_table(response_table(run)),
        "## Legal documents",
        markdown_table(legal_table(run)),
        HEURISTIC_NOTE,
        "## Categories",
        markdown_table(category_table(run), index=False),
        "## Regions",
        markdown_table(region_table(run), index=False),
        "## Developer email domains (any exposure)",
        markdown_table(
            pd.DataFrame(email_domain_histogram(run, lambda r: any(r.exposures.values())),
                         columns=["domain", "plugins"]),
            index=False,
        ),
    ]
    return "\n\n".join(sections) + "\n"


def _diff_markdown(diff: RunDiff) -> str:
    frame = diff.to_frame()
    frame.index.name = "run"
    lines = [
        f"# Comparison `{diff.earlier_run}` → `{diff.later_run}`",
        markdown_table(frame),
        "## Transitions",
    ]
    for exposure, moves in diff.transitions.items():
        if moves["resolved"] or moves["new"]:
            lines.append(
                f"- {exposure}: resolved {', '.join(moves['resolved']) or '-'}; new {', '.join(moves['new']) or '-'}"
            )
    return "\n\n".join(lines) + "\n"


def _nonempty(matrix: pd.DataFrame) -> pd.DataFrame:
    return matrix[matrix["size"] > 0]


def _csv(frame: pd.DataFrame) -> str:
    buf = io.StringIO()
    frame.to_csv(buf, quoting=csv.QUOTE_NONNUMERIC, lineterminator="\n")
    return buf.getvalue()


def render(subject: Union[AssessmentRun, RunDiff], fmt: str) -> str:
    """json is the lossless form; csv flattens the category matrix (or the diff rows)."""
    if fmt not in FORMATS:
        raise PreconditionViolation(f"unknown report format '{fmt}' (expected one of {FORMATS})")
    if isinstance(subject, RunDiff):
        if fmt == "json":
            return json.dumps(subject.to_dict(), indent=2, ensure_ascii=False)
        if fmt == "csv":
            return _csv(subject.to_frame())
        return _diff_markdown(subject)

    if fmt == "json":
        return json.dumps(subject.to_dict(), indent=2, ensure_ascii=False)
    if fmt == "csv":
        return _csv(_nonempty(aggregate_by_category(subject)))
    return _run_markdown(subject)


def ingest_run(text: str) -> AssessmentRun:
    """Inverse of `render(run, "json")`."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedDocument(f"run file is not JSON ({e.msg})") from e
    if not isinstance(data, dict) or "run_id" not in data:
        raise MalformedDocument("run file has no run_id")
    try:
        return AssessmentRun.from_dict(data)
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedDocument(f"run file does not match the report schema: {e}") from e
