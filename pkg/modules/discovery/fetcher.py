from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple
from urllib.parse import urlsplit

from modules.discovery.relevance import DEFAULT_SEEDS, Relevance, classify_relevance
from modules.discovery.transport import FetchPolicy, HttpTransport
from modules.discovery.urls import derive_manifest_urls
from modules.errors import InvalidUrl, PluginAuditError, TransportError
from modules.logger import get_logger
from modules.manifest.models import PluginRecord, StoreListing
from modules.manifest.parser import parse_manifest

logger = get_logger(__name__)

DEFAULT_SHARE_PLATFORMS: Dict[str, Tuple[str, ...]] = {
    "google_drive": ("drive.google.com", "docs.google.com"),
    "github": ("github.com", "gist.github.com", "raw.githubusercontent.com", "github.io"),
}


class FetchStatus(str, Enum):
    ACCESSIBLE_RELEVANT = "AccessibleRelevant"
    ACCESSIBLE_UNRELATED = "AccessibleUnrelated"
    TIMEOUT = "Timeout"
    SHARE_PLATFORM_HOSTED = "SharePlatformHosted"
    SERVER_ERROR = "ServerError"
    NO_LEGAL_URL = "NoLegalUrl"


@dataclass(frozen=True)
class ManifestFetchOutcome:
    plugin_id: str
    status: FetchStatus
    candidate_urls: Tuple[str, ...] = ()
    body: Optional[str] = None
    http_status: Optional[int] = None
    share_platform: Optional[str] = None
    retry_recommended: bool = False
    source_url: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "plugin_id": self.plugin_id,
            "status": self.status.value,
            "candidate_urls": list(self.candidate_urls),
            "http_status": self.http_status,
            "share_platform": self.share_platform,
            "retry_recommended": self.retry_recommended,
            "source_url": self.source_url,
        }


def share_platform_of(url: str, platforms: Mapping[str, Sequence[str]] = DEFAULT_SHARE_PLATFORMS) -> Optional[str]:
    host = (urlsplit(url).hostname or "").lower()
    for name, hosts in sorted(platforms.items()):
        for h in hosts:
            h = h.lower()
            if host == h or host.endswith("." + h):
                return name
    return None


def fetch_manifest(
    listing: StoreListing,
    policy: FetchPolicy,
    transport: HttpTransport,
    share_platforms: Mapping[str, Sequence[str]] = DEFAULT_SHARE_PLATFORMS,
    seeds: Iterable[str] = DEFAULT_SEEDS,
) -> ManifestFetchOutcome:
    """Try the manifest locations under the listing's legal-document origin.

    Never raises for network trouble; every failure mode is an outcome status.
    Precedence when no candidate yields a manifest: unrelated content, then the
    last HTTP error status, then no response at all (Timeout).
    """
    pid = listing.plugin_id
    if not listing.legal_url:
        return ManifestFetchOutcome(pid, FetchStatus.NO_LEGAL_URL)

    platform = share_platform_of(listing.legal_url, share_platforms)
    if platform is not None:
        return ManifestFetchOutcome(pid, FetchStatus.SHARE_PLATFORM_HOSTED, share_platform=platform)

    try:
        candidates = derive_manifest_urls(listing.legal_url)
    except InvalidUrl:
        return ManifestFetchOutcome(pid, FetchStatus.NO_LEGAL_URL)

    seeds = tuple(seeds)
    tried: List[str] = []
    unrelated_status: Optional[int] = None
    error_status: Optional[int] = None

    for url in candidates:
        tried.append(url)
        try:
            resp = transport.get(url, policy=policy)
        except TransportError:
            logger.debug("%s: no response from %s", pid, url)
            continue

        if not resp.ok:
            error_status = resp.status
            continue

        if resp.text.strip() and classify_relevance(resp.text, seeds) is Relevance.RELEVANT:
            try:
                parse_manifest(resp.text, source=url)
            except PluginAuditError as e:
                logger.debug("%s: %s looks relevant but does not parse: %s", pid, url, e)
            else:
                return ManifestFetchOutcome(
                    pid,
                    FetchStatus.ACCESSIBLE_RELEVANT,
                    candidate_urls=tuple(tried),
                    body=resp.text,
                    http_status=resp.status,
                    source_url=url,
                )
        unrelated_status = resp.status

    if unrelated_status is not None:
        return ManifestFetchOutcome(pid, FetchStatus.ACCESSIBLE_UNRELATED, tuple(tried), http_status=unrelated_status)
    if error_status is not None:
        return ManifestFetchOutcome(pid, FetchStatus.SERVER_ERROR, tuple(tried), http_status=error_status)
    return ManifestFetchOutcome(pid, FetchStatus.TIMEOUT, tuple(tried), retry_recommended=True)


def evaluate_exposure1(record: PluginRecord) -> bool:
    """Exposure 1: the manifest could be retrieved from outside the platform."""
    return record.manifest is not None


def discover(
    listings: Iterable[StoreListing],
    policy: FetchPolicy,
    transport: HttpTransport,
    workers: int = 8,
    share_platforms: Mapping[str, Sequence[str]] = DEFAULT_SHARE_PLATFORMS,
    seeds: Iterable[str] = DEFAULT_SEEDS,
) -> List[ManifestFetchOutcome]:
    listings = list(listings)
    seeds = tuple(seeds)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        outcomes = list(pool.map(lambda l: fetch_manifest(l, policy, transport, share_platforms, seeds), listings))
    outcomes.sort(key=lambda o: o.plugin_id)
    counts: Dict[str, int] = {}
    for o in outcomes:
        counts[o.status.value] = counts.get(o.status.value, 0) + 1
    logger.info("manifest discovery over %d listings: %s", len(outcomes), counts)
    return outcomes
