from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, FrozenSet, Optional

from modules.consistency.similarity import cosine_similarity, normalize_url, text_vector, urls_match
from modules.errors import InvalidUrl, PreconditionViolation
from modules.logger import get_logger
from modules.manifest.models import ManifestData, StoreListing

logger = get_logger(__name__)

SAME_CONTENT_NOTE = "same-content-different-url"


class ConsistencyFlag(str, Enum):
    NAME_MISMATCH = "NameMismatch"
    DESCRIPTION_MISMATCH = "DescriptionMismatch"
    LEGAL_URL_MISMATCH = "LegalUrlMismatch"


@dataclass(frozen=True)
class ConsistencyThresholds:
    theta1: float = 0.85
    theta2: float = 0.8
    theta3: float = 1.0

    def __post_init__(self):
        for name in ("theta1", "theta2", "theta3"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise PreconditionViolation(f"{name} must be within [0, 1], got {value}")


@dataclass(frozen=True)
class ConsistencyVerdict:
    plugin_id: str
    name_similarity: float
    description_similarity: float
    legal_url_match: bool
    flags: FrozenSet[ConsistencyFlag] = frozenset()
    notes: tuple = ()

    @property
    def exposure2(self) -> bool:
        return bool(self.flags)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name_sim": self.name_similarity,
            "desc_sim": self.description_similarity,
            "legal_match": self.legal_url_match,
            "flags": sorted(f.value for f in self.flags),
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, plugin_id: str, data: Dict[str, Any]) -> "ConsistencyVerdict":
        return cls(
            plugin_id=plugin_id,
            name_similarity=float(data["name_sim"]),
            description_similarity=float(data["desc_sim"]),
            legal_url_match=bool(data["legal_match"]),
            flags=frozenset(ConsistencyFlag(f) for f in data.get("flags", [])),
            notes=tuple(data.get("notes", [])),
        )


def _legal_urls_match(user_url: Optional[str], manifest_url: Optional[str], theta3: float) -> bool:
    if user_url is None or manifest_url is None:
        return user_url is None and manifest_url is None
    try:
        if theta3 >= 1.0:
            return urls_match(user_url, manifest_url)
        a, b = normalize_url(user_url), normalize_url(manifest_url)
    except InvalidUrl:
        return user_url.strip() == manifest_url.strip()
    return cosine_similarity(text_vector(a), text_vector(b)) >= theta3


def check_consistency(
    listing: StoreListing,
    manifest: ManifestData,
    thresholds: ConsistencyThresholds = ConsistencyThresholds(),
) -> ConsistencyVerdict:
    """Compare what users see with what the platform was told, field by field.

    Each field is flagged on its own; any flag makes the plugin an Exposure-2 case.
    """
    if manifest is None:
        raise PreconditionViolation("consistency needs a manifest")

    name_sim = cosine_similarity(text_vector(listing.name), text_vector(manifest.name))
    desc_sim = cosine_similarity(text_vector(listing.description), text_vector(manifest.description))
    legal_match = _legal_urls_match(listing.legal_url, manifest.legal_url, thresholds.theta3)

    flags = set()
    if name_sim < thresholds.theta1:
        flags.add(ConsistencyFlag.NAME_MISMATCH)
    if desc_sim < thresholds.theta2:
        flags.add(ConsistencyFlag.DESCRIPTION_MISMATCH)
    if not legal_match:
        flags.add(ConsistencyFlag.LEGAL_URL_MISMATCH)

    return ConsistencyVerdict(
        plugin_id=listing.plugin_id,
        name_similarity=name_sim,
        description_similarity=desc_sim,
        legal_url_match=legal_match,
        flags=frozenset(flags),
    )


def compare_legal_pages(
    verdict: ConsistencyVerdict,
    user_url: Optional[str],
    manifest_url: Optional[str],
    fetch_text: Callable[[str], Optional[str]],
) -> ConsistencyVerdict:
    """When the two legal links differ, check whether they serve the same page.

    Identical main text only adds an informational note; the mismatch flag stays.
    """
    if verdict.legal_url_match or not user_url or not manifest_url:
        return verdict
    user_text, manifest_text = fetch_text(user_url), fetch_text(manifest_url)
    if user_text is None or manifest_text is None or not user_text.strip():
        return verdict
    if user_text.strip() != manifest_text.strip():
        return verdict
    logger.debug("%s: legal links differ but serve identical content", verdict.plugin_id)
    return ConsistencyVerdict(
        plugin_id=verdict.plugin_id,
        name_similarity=verdict.name_similarity,
        description_similarity=verdict.description_similarity,
        legal_url_match=verdict.legal_url_match,
        flags=verdict.flags,
        notes=verdict.notes + (SAME_CONTENT_NOTE,),
    )
