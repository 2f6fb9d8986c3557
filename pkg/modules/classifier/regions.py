from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Tuple

import pandas as pd

from modules.errors import MalformedDocument


@dataclass(frozen=True)
class Gazetteer:
    # canonical name → aliases (the canonical name included)
    entries: Mapping[str, Tuple[str, ...]]

    def __post_init__(self):
        compiled = {}
        for canonical, aliases in self.entries.items():
            names = sorted({canonical, *aliases}, key=len, reverse=True)
            body = "|".join(r"\s+".join(re.escape(p) for p in n.split()) for n in names)
            compiled[canonical] = re.compile(r"(?<![0-9A-Za-z])(?:" + body + r")(?![0-9A-Za-z])", re.IGNORECASE)
        object.__setattr__(self, "_compiled", compiled)

    @property
    def names(self) -> List[str]:
        return sorted(self.entries)

    @classmethod
    def parse(cls, text: str, source: str | None = None) -> "Gazetteer":
        entries: Dict[str, Tuple[str, ...]] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            canonical, _, rest = line.partition("|")
            canonical = canonical.strip()
            if not canonical:
                raise MalformedDocument(f"gazetteer line {lineno} has no canonical name", source)
            aliases = tuple(a.strip() for a in rest.split(",") if a.strip())
            entries[canonical] = aliases
        return cls(entries)


def load_gazetteer(path: str | Path | None = None) -> Gazetteer:
    if path is None:
        text = resources.files("modules.classifier").joinpath("data/gazetteer.txt").read_text(encoding="utf-8")
        return Gazetteer.parse(text, "gazetteer.txt")
    return Gazetteer.parse(Path(path).read_text(encoding="utf-8"), str(path))


_DEFAULT: Gazetteer | None = None


def default_gazetteer() -> Gazetteer:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_gazetteer()
    return _DEFAULT


def detect_regions(text: str, gazetteer: Gazetteer | None = None) -> List[str]:
    """Canonical names of every country/region mentioned, sorted."""
    gazetteer = gazetteer or default_gazetteer()
    text = text or ""
    return sorted(name for name, pattern in gazetteer._compiled.items() if pattern.search(text))


def region_distribution(region_lists: Iterable[Iterable[str]]) -> pd.DataFrame:
    """How many plugins mention each region; regions never mentioned are left out."""
    counts: Counter = Counter()
    for regions in region_lists:
        counts.update(set(regions))
    rows = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return pd.DataFrame(rows, columns=["region", "count"])
