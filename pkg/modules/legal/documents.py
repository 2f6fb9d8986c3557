from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from modules.discovery.transport import FetchPolicy, HttpTransport
from modules.errors import PreconditionViolation, TransportError
from modules.legal.seeds import LegalSeedLibrary, has_legal_attributes
from modules.legal.text import extract_headings, strip_boilerplate
from modules.logger import get_logger
from modules.manifest.models import StoreListing

logger = get_logger(__name__)

_TERMS_RE = re.compile(r"\bterms\b", re.IGNORECASE)
_PRIVACY_RE = re.compile(r"\bprivacy\b", re.IGNORECASE)


class Accessibility(str, Enum):
    ACCESSIBLE = "Accessible"
    INACCESSIBLE = "Inaccessible"


class LegalDocCategory(str, Enum):
    TERMS_OF_SERVICE = "TermsOfService"
    PRIVACY_POLICY = "PrivacyPolicy"
    OTHER_LEGAL = "OtherLegal"
    UNRELATED = "Unrelated"


LEGAL_CATEGORIES = (
    LegalDocCategory.TERMS_OF_SERVICE,
    LegalDocCategory.PRIVACY_POLICY,
    LegalDocCategory.OTHER_LEGAL,
)


@dataclass(frozen=True)
class LegalDocVerdict:
    plugin_id: str
    accessibility: Accessibility
    category: Optional[LegalDocCategory] = None
    matched_seeds: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "matched_seeds", tuple(self.matched_seeds))
        if self.accessibility is Accessibility.INACCESSIBLE and self.category is not None:
            raise PreconditionViolation("an inaccessible document has no category")
        if self.category in LEGAL_CATEGORIES and not self.matched_seeds:
            raise PreconditionViolation("a legal category needs at least one matched seed")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "accessible": self.accessibility is Accessibility.ACCESSIBLE,
            "category": self.category.value if self.category else None,
            "matched_seeds": list(self.matched_seeds),
            "heuristic": True,
        }

    @classmethod
    def from_dict(cls, plugin_id: str, data: Dict[str, Any]) -> "LegalDocVerdict":
        category = data.get("category")
        return cls(
            plugin_id=plugin_id,
            accessibility=Accessibility.ACCESSIBLE if data["accessible"] else Accessibility.INACCESSIBLE,
            category=LegalDocCategory(category) if category else None,
            matched_seeds=tuple(data.get("matched_seeds") or ()),
        )


def classify_legal_doc(
    text: str,
    headings: Sequence[str],
    library: LegalSeedLibrary = LegalSeedLibrary(),
) -> Tuple[LegalDocCategory, List[str]]:
    """Seed filter first, then a keyword rule over title and headings.

    When both "terms" and "privacy" appear, whichever comes first wins.
    """
    legal, matched = has_legal_attributes(text, library)
    if not legal:
        return LegalDocCategory.UNRELATED, []

    joined = "\n".join(headings)
    terms = _TERMS_RE.search(joined)
    privacy = _PRIVACY_RE.search(joined)
    if terms and privacy:
        category = LegalDocCategory.PRIVACY_POLICY if privacy.start() < terms.start() else LegalDocCategory.TERMS_OF_SERVICE
    elif privacy:
        category = LegalDocCategory.PRIVACY_POLICY
    elif terms:
        category = LegalDocCategory.TERMS_OF_SERVICE
    else:
        category = LegalDocCategory.OTHER_LEGAL
    return category, matched


def fetch_page(url: str, policy: FetchPolicy, transport: HttpTransport) -> Optional[str]:
    """Raw body of a 2xx GET, or None."""
    try:
        resp = transport.get(url, policy=policy)
    except TransportError:
        return None
    return resp.text if resp.ok else None


def fetch_main_text(url: str, policy: FetchPolicy, transport: HttpTransport) -> Optional[str]:
    html = fetch_page(url, policy, transport)
    return strip_boilerplate(html) if html is not None else None


def assess_legal_doc(
    listing: StoreListing,
    library: LegalSeedLibrary,
    policy: FetchPolicy,
    transport: HttpTransport,
) -> LegalDocVerdict:
    pid = listing.plugin_id
    if not listing.legal_url:
        return LegalDocVerdict(pid, Accessibility.INACCESSIBLE)

    html = fetch_page(listing.legal_url, policy, transport)
    text = strip_boilerplate(html) if html is not None else ""
    if not text:
        logger.debug("%s: legal document at %s is inaccessible", pid, listing.legal_url)
        return LegalDocVerdict(pid, Accessibility.INACCESSIBLE)

    category, matched = classify_legal_doc(text, extract_headings(html), library)
    return LegalDocVerdict(pid, Accessibility.ACCESSIBLE, category, tuple(matched))


def assess_legal_docs(
    listings: Iterable[StoreListing],
    library: LegalSeedLibrary,
    policy: FetchPolicy,
    transport: HttpTransport,
    workers: int = 8,
) -> List[LegalDocVerdict]:
    listings = list(listings)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        verdicts = list(pool.map(lambda l: assess_legal_doc(l, library, policy, transport), listings))
    verdicts.sort(key=lambda v: v.plugin_id)
    counts: Dict[str, int] = {}
    for v in verdicts:
        label = v.category.value if v.category else v.accessibility.value
        counts[label] = counts.get(label, 0) + 1
    logger.info("legal documents over %d listings: %s", len(verdicts), counts)
    return verdicts
