from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import List, Tuple

from modules.errors import PreconditionViolation
from modules.logger import get_logger

logger = get_logger(__name__)

DEFAULT_SEEDS: Tuple[str, ...] = (
    "Privacy",
    "Regulation",
    "Statute",
    "Provision",
    "Affiliates",
    "Collection",
    "Opt-Out",
    "Personal Information",
    "User Consent",
    "Retention Period",
    "Data Protection",
    "Data Subject",
    "Data Controller",
    "Data Processor",
    "Legitimate Interest",
    "Cross-Border Data Transfers",
)


def _phrase_pattern(phrase: str) -> re.Pattern:
    # whitespace inside a phrase matches any run of whitespace
    body = r"\s+".join(re.escape(part) for part in phrase.split())
    left = r"\b" if phrase[:1].isalnum() else ""
    right = r"\b" if phrase[-1:].isalnum() else ""
    return re.compile(left + body + right, re.IGNORECASE)


@dataclass(frozen=True)
class LegalSeedLibrary:
    seeds: Tuple[str, ...] = DEFAULT_SEEDS

    def __post_init__(self):
        seeds = tuple(dict.fromkeys(s.strip() for s in self.seeds if s and s.strip()))
        if not seeds:
            raise PreconditionViolation("the legal seed library needs at least one phrase")
        object.__setattr__(self, "seeds", seeds)
        object.__setattr__(self, "_patterns", tuple(_phrase_pattern(s) for s in seeds))

    def with_seeds(self, *extra: str) -> "LegalSeedLibrary":
        return LegalSeedLibrary(self.seeds + tuple(extra))


def _read_phrases(text: str) -> List[str]:
    phrases = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            phrases.append(line)
    return phrases


def load_seed_library(path: str | Path | None = None) -> LegalSeedLibrary:
    """One phrase per line; blank lines and `#` comments are ignored.

    Without a path the packaged library is used.
    """
    if path is None:
        text = resources.files("modules.legal").joinpath("data/seeds.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
        logger.info("loaded legal seed library from %s", path)
    return LegalSeedLibrary(tuple(_read_phrases(text)))


def has_legal_attributes(text: str, library: LegalSeedLibrary = LegalSeedLibrary()) -> Tuple[bool, List[str]]:
    matched = [seed for seed, pat in zip(library.seeds, library._patterns) if pat.search(text or "")]
    return bool(matched), matched
