"""Run → DataFrame views: the category matrix and the per-stage distribution tables."""
from __future__ import annotations

from collections import Counter
from typing import Callable, List, Optional, Tuple

import pandas as pd

from modules.classifier.categories import CATEGORY_LABELS, category_distribution
from modules.classifier.regions import region_distribution
from modules.discovery.fetcher import FetchStatus
from modules.errors import PreconditionViolation
from modules.probe.prober import response_distribution
from modules.report.models import EXPOSURE_KEYS, EXPOSURE_NAMES, AssessmentRun, ExposureReport
from modules.report.numbers import percent

NO_DOMAIN = "(none)"

OUTCOME_COLUMNS = (
    "AccessibleRelevant",
    "AccessibleUnrelated",
    "Timeout",
    "GoogleDrive",
    "Github",
    "ServerError",
    "NoLegalUrl",
)
_PLATFORM_COLUMNS = {"google_drive": "GoogleDrive", "github": "Github"}

LEGAL_COLUMNS = ("TermsOfService", "PrivacyPolicy", "OtherLegal", "Unrelated", "Inaccessible")


def aggregate_by_category(run: AssessmentRun) -> pd.DataFrame:
    """Category × exposure counts with a percentage of the category's size per cell.

    Every label gets a row, so an empty run yields an all-zero matrix.
    """
    for r in run.reports:
        if r.category is None:
            raise PreconditionViolation(f"{r.plugin_id} has no category")

    columns: List[str] = ["size"]
    for key in EXPOSURE_KEYS:
        columns += [EXPOSURE_NAMES[key], f"{EXPOSURE_NAMES[key]} %"]
    matrix = pd.DataFrame(0, index=pd.Index(list(CATEGORY_LABELS), name="category"), columns=columns)
    matrix = matrix.astype({c: float for c in columns if c.endswith(" %")})

    for r in run.reports:
        matrix.loc[r.category, "size"] += 1
        for key in EXPOSURE_KEYS:
            if r.has(key):
                matrix.loc[r.category, EXPOSURE_NAMES[key]] += 1

    for key in EXPOSURE_KEYS:
        name = EXPOSURE_NAMES[key]
        matrix[f"{name} %"] = [percent(c, s) for c, s in zip(matrix[name], matrix["size"])]
    return matrix


def email_domain_histogram(
    run: AssessmentRun,
    predicate: Optional[Callable[[ExposureReport], bool]] = None,
) -> List[Tuple[str, int]]:
    """Domains of plugins matching `predicate`, most frequent first.

    Plugins without a contact email land in a trailing "(none)" bucket.
    """
    counts: Counter = Counter()
    missing = 0
    for r in run.reports:
        if predicate is not None and not predicate(r):
            continue
        if r.email_domain:
            counts[r.email_domain.lower()] += 1
        else:
            missing += 1
    out = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    if missing:
        out.append((NO_DOMAIN, missing))
    return out


def outcome_table(run: AssessmentRun) -> pd.DataFrame:
    """Manifest retrieval outcomes, share-platform listings split by platform."""
    counts = {c: 0 for c in OUTCOME_COLUMNS}
    for r in run.reports:
        if r.fetch_status is None:
            continue
        if r.fetch_status == FetchStatus.SHARE_PLATFORM_HOSTED.value:
            counts[_PLATFORM_COLUMNS.get(r.share_platform or "", "Github")] += 1
        elif r.fetch_status in counts:
            counts[r.fetch_status] += 1
    return _count_table(counts, "outcome")


def legal_table(run: AssessmentRun) -> pd.DataFrame:
    counts = {c: 0 for c in LEGAL_COLUMNS}
    for r in run.reports:
        if r.legal is None:
            continue
        if r.legal.category is None:
            counts["Inaccessible"] += 1
        else:
            counts[r.legal.category.value] += 1
    return _count_table(counts, "document")


def response_table(run: AssessmentRun) -> pd.DataFrame:
    return response_distribution(r.probe for r in run.reports if r.probe is not None)


def category_table(run: AssessmentRun) -> pd.DataFrame:
    return category_distribution(r.category for r in run.reports if r.category)


def region_table(run: AssessmentRun) -> pd.DataFrame:
    return region_distribution(r.regions for r in run.reports)


def summary_table(run: AssessmentRun) -> pd.DataFrame:
    totals = run.totals()
    size = len(run.reports)
    rows = [
        {"exposure": EXPOSURE_NAMES[k], "key": k, "plugins": totals[k], "%": percent(totals[k], size)}
        for k in EXPOSURE_KEYS
    ]
    return pd.DataFrame(rows, columns=["exposure", "key", "plugins", "%"])


def _count_table(counts: dict, label: str) -> pd.DataFrame:
    total = sum(counts.values())
    rows = [{label: k, "plugins": n, "%": percent(n, total)} for k, n in counts.items()]
    rows.append({label: "Total", "plugins": total, "%": 100.0 if total else 0.0})
    return pd.DataFrame(rows, columns=[label, "plugins", "%"]).set_index(label)
