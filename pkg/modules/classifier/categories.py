from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Protocol, Tuple

import httpx
import pandas as pd

from modules.errors import EmptyDescription, MalformedDocument, PluginAuditError
from modules.logger import get_logger
from modules.report.numbers import percent

logger = get_logger(__name__)

CATEGORY_LABELS: Tuple[str, ...] = tuple(sorted((
    "Audio & Music",
    "Books",
    "Business",
    "Career",
    "Diagram",
    "Crypto",
    "Data & Research",
    "Developer & Code",
    "Document",
    "Education",
    "Entertainment",
    "Finance",
    "Health",
    "Image & Video",
    "Law",
    "News",
    "Plugin Tips",
    "Shopping",
    "Lifestyle",
    "Tools",
    "Weather",
)))

UNCLASSIFIED = "unclassified"


class CategoryScorer(Protocol):
    """Anything that maps a description to one score in [0, 1] per label."""

    def score(self, text: str) -> Dict[str, float]:
        ...


class CategoryAssignment(NamedTuple):
    label: str
    score: float

    @property
    def unclassified(self) -> bool:
        return self.score <= 0.0


def _phrase_regex(phrase: str) -> re.Pattern:
    body = r"\s+".join(re.escape(p) for p in phrase.split())
    return re.compile(r"(?<![0-9a-z])" + body + r"(?![0-9a-z])", re.IGNORECASE)


@dataclass(frozen=True)
class KeywordTable:
    # label → ((phrase, weight), ...)
    entries: Mapping[str, Tuple[Tuple[str, float], ...]]

    @classmethod
    def parse(cls, text: str, source: str | None = None) -> "KeywordTable":
        table: Dict[str, List[Tuple[str, float]]] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split("|")]
            if len(parts) not in (2, 3) or not parts[0] or not parts[1]:
                raise MalformedDocument(f"keyword line {lineno} is not 'Label | phrase | weight'", source)
            label, phrase = parts[0], parts[1]
            if label not in CATEGORY_LABELS:
                raise MalformedDocument(f"unknown category '{label}' on line {lineno}", source)
            try:
                weight = float(parts[2]) if len(parts) == 3 and parts[2] else 1.0
            except ValueError as e:
                raise MalformedDocument(f"bad weight on line {lineno}", source) from e
            table.setdefault(label, []).append((phrase, weight))
        return cls({label: tuple(v) for label, v in table.items()})


def load_keyword_table(path: str | Path | None = None) -> KeywordTable:
    if path is None:
        text = resources.files("modules.classifier").joinpath("data/keywords.txt").read_text(encoding="utf-8")
        return KeywordTable.parse(text, "keywords.txt")
    return KeywordTable.parse(Path(path).read_text(encoding="utf-8"), str(path))


class LexicalScorer:
    """Weighted keyword hits per label, normalized by the hits over every label."""

    def __init__(self, table: Optional[KeywordTable] = None):
        self.table = table or load_keyword_table()
        self._compiled = {
            label: [(_phrase_regex(phrase), weight) for phrase, weight in entries]
            for label, entries in self.table.entries.items()
        }

    def hits(self, text: str) -> Dict[str, float]:
        out = {label: 0.0 for label in CATEGORY_LABELS}
        for label, patterns in self._compiled.items():
            out[label] = sum(len(p.findall(text)) * w for p, w in patterns)
        return out

    def score(self, text: str) -> Dict[str, float]:
        hits = self.hits(text)
        total = sum(hits.values())
        if total <= 0:
            return {label: 0.0 for label in CATEGORY_LABELS}
        return {label: h / total for label, h in hits.items()}


@dataclass
class HttpCategoryScorer:
    """Client for a local scoring service: POST {"text": ...} → {"scores": {label: float}}."""
    url: str
    timeout: float = 30.0
    transport: Optional[httpx.BaseTransport] = None
    _client: httpx.Client = field(init=False, repr=False)

    def __post_init__(self):
        kwargs = {"timeout": self.timeout}
        if self.transport is not None:
            kwargs["transport"] = self.transport
        self._client = httpx.Client(**kwargs)

    def score(self, text: str) -> Dict[str, float]:
        try:
            resp = self._client.post(self.url, json={"text": text})
            resp.raise_for_status()
            payload = resp.json()
        except (httpx.HTTPError, ValueError) as e:
            raise PluginAuditError(f"category scorer at {self.url} failed: {e}") from e
        raw = payload.get("scores") if isinstance(payload, dict) else None
        if not isinstance(raw, dict):
            raise MalformedDocument("scorer response has no 'scores' object", self.url)
        out = {}
        for label in CATEGORY_LABELS:
            try:
                value = float(raw.get(label, 0.0))
            except (TypeError, ValueError):
                value = 0.0
            out[label] = min(1.0, max(0.0, value))
        return out

    def close(self) -> None:
        self._client.close()


def classify_category(description: str, scorer: Optional[CategoryScorer] = None) -> CategoryAssignment:
    """Single-label argmax; equal scores go to the alphabetically first label."""
    if not description or not description.strip():
        raise EmptyDescription()
    scorer = scorer or LexicalScorer()
    scores = scorer.score(description)
    best = min(CATEGORY_LABELS, key=lambda label: (-scores.get(label, 0.0), label))
    assignment = CategoryAssignment(best, float(scores.get(best, 0.0)))
    if assignment.unclassified:
        logger.debug("no category keywords in %r", description[:60])
    return assignment


def category_distribution(labels: Iterable[str]) -> pd.DataFrame:
    """Plugins per category and their share of the store, every label listed."""
    counts = pd.Series(list(labels), dtype="object").value_counts()
    frame = pd.DataFrame({"category": list(CATEGORY_LABELS)})
    frame["count"] = frame["category"].map(counts).fillna(0).astype(int)
    total = int(frame["count"].sum())
    frame["share"] = [percent(c, total) for c in frame["count"]]
    return frame.sort_values(["count", "category"], ascending=[False, True]).reset_index(drop=True)
