"""The three-layer audit: manifest leakage, listing/manifest consistency, then
API access from outside the platform. Legal pages, categories and regions ride
along so one run carries everything the report tables need.
"""
from __future__ import annotations

import datetime
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Tuple, TypeVar
from urllib.parse import urljoin

from modules.audit.settings import AuditConfig
from modules.classifier.categories import CATEGORY_LABELS, CategoryAssignment, CategoryScorer, classify_category
from modules.classifier.regions import Gazetteer, detect_regions
from modules.consistency.checker import (
    ConsistencyThresholds,
    ConsistencyVerdict,
    check_consistency,
    compare_legal_pages,
)
from modules.discovery.fetcher import FetchStatus, ManifestFetchOutcome, evaluate_exposure1, fetch_manifest
from modules.discovery.transport import FetchPolicy, HttpTransport
from modules.errors import EmptyDescription, PluginAuditError, TransportError
from modules.legal.documents import LegalDocVerdict, assess_legal_doc, fetch_main_text
from modules.legal.seeds import LegalSeedLibrary
from modules.logger import get_logger, mask_token
from modules.manifest.models import ApiSurface, ManifestData, ManifestFieldPolicy, PluginRecord, StoreListing
from modules.manifest.parser import parse_api_document, parse_manifest
from modules.manifest.policy import check_field_policy
from modules.probe.prober import (
    ApiExposures,
    ProbeSummary,
    SurfaceProbe,
    evaluate_exposures_345,
    probe_surface,
    summarize_probe,
)
from modules.probe.responses import InvalidResponseLexicon, ResponseClass
from modules.report.models import EXPOSURE_KEYS, AssessmentRun, Evidence, ExposureReport

logger = get_logger(__name__)

T = TypeVar("T")


@dataclass
class AuditContext:
    """Everything one plugin's audit needs, built once per run."""
    policy: FetchPolicy
    transport: HttpTransport
    thresholds: ConsistencyThresholds = field(default_factory=ConsistencyThresholds)
    lexicon: InvalidResponseLexicon = field(default_factory=InvalidResponseLexicon)
    library: LegalSeedLibrary = field(default_factory=LegalSeedLibrary)
    scorer: Optional[CategoryScorer] = None
    gazetteer: Optional[Gazetteer] = None
    field_policy: ManifestFieldPolicy = field(default_factory=ManifestFieldPolicy.default)
    aggressive: bool = False

    @classmethod
    def from_config(cls, config: AuditConfig, transport: Optional[HttpTransport] = None) -> "AuditContext":
        policy = config.fetch_policy()
        return cls(
            policy=policy,
            transport=transport or HttpTransport(policy, proxies=config.proxies),
            thresholds=config.thresholds(),
            lexicon=config.lexicon(),
            library=config.seed_library(),
            scorer=config.scorer(),
            gazetteer=config.gazetteer(),
            aggressive=config.aggressive_methods,
        )


@dataclass
class Discovery:
    """Layer one's result for a single plugin."""
    outcome: ManifestFetchOutcome
    record: PluginRecord
    evidence: List[Evidence] = field(default_factory=list)


def discover_plugin(listing: StoreListing, ctx: AuditContext) -> Discovery:
    """Fetch the manifest and, when it leaks, the API description it points to."""
    outcome = fetch_manifest(listing, ctx.policy, ctx.transport)
    record = PluginRecord(listing)
    evidence: List[Evidence] = []
    if outcome.status is not FetchStatus.ACCESSIBLE_RELEVANT:
        return Discovery(outcome, record, evidence)

    manifest = parse_manifest(outcome.body, source=outcome.source_url)
    record.manifest = manifest
    hidden = check_field_policy(manifest, ctx.field_policy)
    evidence.append(Evidence(
        "e1",
        outcome.source_url,
        f"HTTP {outcome.http_status}; hidden fields exposed: "
        + (", ".join(f"{v.field}={v.preview}" for v in hidden) or "none"),
    ))
    record.surface = _fetch_surface(listing.plugin_id, manifest, outcome.source_url, ctx, evidence)
    return Discovery(outcome, record, evidence)


def _fetch_surface(
    pid: str,
    manifest: ManifestData,
    manifest_url: str,
    ctx: AuditContext,
    evidence: List[Evidence],
) -> Optional[ApiSurface]:
    try:
        api_url = urljoin(manifest_url, manifest.api_url)
    except ValueError as e:
        evidence.append(Evidence("api", manifest.api_url, f"InvalidUrl: {e}"))
        return None
    try:
        resp = ctx.transport.get(api_url, policy=ctx.policy)
    except TransportError as e:
        evidence.append(Evidence("api", api_url, f"no response ({e})"))
        return None
    if not resp.ok:
        evidence.append(Evidence("api", api_url, f"HTTP {resp.status}"))
        return None
    try:
        return parse_api_document(resp.text, api_url)
    except PluginAuditError as e:
        logger.warning("%s: API description at %s unusable: %s", pid, api_url, e)
        evidence.append(Evidence("api", api_url, f"{type(e).__name__}: {e}"))
        return None


def check_listing_consistency(listing: StoreListing, manifest: ManifestData, ctx: AuditContext) -> ConsistencyVerdict:
    verdict = check_consistency(listing, manifest, ctx.thresholds)
    return compare_legal_pages(
        verdict,
        listing.legal_url,
        manifest.legal_url,
        lambda url: fetch_main_text(url, ctx.policy, ctx.transport),
    )


def _consistency_evidence(listing: StoreListing, manifest: ManifestData, verdict: ConsistencyVerdict) -> List[Evidence]:
    out = []
    for flag in sorted(verdict.flags, key=lambda f: f.value):
        if flag.value == "NameMismatch":
            observed = f"{listing.name!r} vs {manifest.name!r} cosine {verdict.name_similarity:.4f}"
        elif flag.value == "DescriptionMismatch":
            observed = f"description cosine {verdict.description_similarity:.4f}"
        else:
            observed = f"{listing.legal_url} vs {manifest.legal_url}"
            if verdict.notes:
                observed += f" ({', '.join(verdict.notes)})"
        out.append(Evidence(f"e2:{flag.value}", listing.plugin_id, observed))
    return out


def probe_plugin(record: PluginRecord, ctx: AuditContext) -> Tuple[SurfaceProbe, ApiExposures, ProbeSummary, List[Evidence]]:
    probes = probe_surface(record, ctx.policy, ctx.transport, ctx.aggressive, ctx.lexicon)
    exposures = evaluate_exposures_345(record, probes)
    summary = summarize_probe(record, probes, exposures)
    evidence = [Evidence("probe:skipped", key, reason) for key, reason in sorted(probes.skipped.items())]

    def valid_endpoints(kinds) -> List[str]:
        return sorted(k for k, v in kinds.items() if v is ResponseClass.VALID)

    attempts = ctx.policy.attempts
    if exposures.exposure3 or exposures.exposure4:
        key = "e3" if exposures.exposure3 else "e4"
        for endpoint in valid_endpoints(probes.without_token):
            evidence.append(Evidence(key, endpoint, f"Valid on {attempts}/{attempts} attempts without token"))
    if exposures.exposure5:
        token = mask_token(record.manifest.token)
        for endpoint in valid_endpoints(probes.with_token):
            evidence.append(Evidence(
                "e5", endpoint, f"Valid on {attempts}/{attempts} attempts only with leaked token {token}"
            ))
    return probes, exposures, summary, evidence


def classify_listing(listing: StoreListing, ctx: AuditContext) -> Tuple[CategoryAssignment, List[str], List[Evidence]]:
    evidence = []
    try:
        assignment = classify_category(listing.description, ctx.scorer)
    except EmptyDescription:
        assignment = CategoryAssignment(CATEGORY_LABELS[0], 0.0)
        evidence.append(Evidence("classifier", listing.plugin_id, "empty description"))
    regions = detect_regions(f"{listing.name} {listing.description}", ctx.gazetteer)
    return assignment, regions, evidence


def audit_plugin(listing: StoreListing, ctx: AuditContext) -> ExposureReport:
    """One plugin through every layer. Failures become evidence, never exceptions."""
    pid = listing.plugin_id
    flags = {k: False for k in EXPOSURE_KEYS}
    evidence: List[Evidence] = []
    consistency: Optional[ConsistencyVerdict] = None
    summary: Optional[ProbeSummary] = None
    outcome: Optional[ManifestFetchOutcome] = None

    try:
        found = discover_plugin(listing, ctx)
        outcome, record = found.outcome, found.record
        evidence += found.evidence
        flags["e1"] = evaluate_exposure1(record)

        if record.manifest is not None:
            consistency = check_listing_consistency(listing, record.manifest, ctx)
            flags["e2"] = consistency.exposure2
            evidence += _consistency_evidence(listing, record.manifest, consistency)

        if record.surface is not None:
            _, exposures, summary, probe_evidence = probe_plugin(record, ctx)
            flags["e3"], flags["e4"], flags["e5"] = exposures.exposure3, exposures.exposure4, exposures.exposure5
            evidence += probe_evidence
    except PluginAuditError as e:
        logger.warning("%s: audit stopped early: %s", pid, e)
        evidence.append(Evidence("error", pid, f"{type(e).__name__}: {e}"))
        # keep only the flags whose evidence was recorded before the failure
        flags = {k: v and any(ev.supports(k) for ev in evidence) for k, v in flags.items()}
    except Exception as e:
        logger.exception("%s: unexpected failure while auditing", pid)
        evidence.append(Evidence("error", pid, f"unexpected {type(e).__name__}: {e}"))
        flags = {k: v and any(ev.supports(k) for ev in evidence) for k, v in flags.items()}

    legal: Optional[LegalDocVerdict] = None
    try:
        legal = assess_legal_doc(listing, ctx.library, ctx.policy, ctx.transport)
    except PluginAuditError as e:
        logger.warning("%s: legal document check failed: %s", pid, e)
        evidence.append(Evidence("error:legal", pid, f"{type(e).__name__}: {e}"))
    except Exception as e:
        logger.exception("%s: unexpected failure in the legal document check", pid)
        evidence.append(Evidence("error:legal", pid, f"unexpected {type(e).__name__}: {e}"))

    try:
        assignment, regions, class_evidence = classify_listing(listing, ctx)
    except Exception as e:
        logger.warning("%s: classification failed: %s", pid, e)
        assignment, regions = CategoryAssignment(CATEGORY_LABELS[0], 0.0), []
        class_evidence = [Evidence("error:classifier", pid, f"{type(e).__name__}: {e}")]
    evidence += class_evidence

    return ExposureReport(
        plugin_id=pid,
        exposures=flags,
        consistency=consistency,
        legal=legal,
        category=assignment.label,
        category_score=round(assignment.score, 6),
        regions=tuple(regions),
        email_domain=listing.email_domain,
        fetch_status=outcome.status.value if outcome else None,
        share_platform=outcome.share_platform if outcome else None,
        probe=summary,
        evidence=tuple(evidence),
    )


def _release(ctx: AuditContext, owned_transport: bool) -> None:
    if owned_transport:
        ctx.transport.close()
    close = getattr(ctx.scorer, "close", None)
    if callable(close):
        close()


def new_run_id(now: datetime.datetime) -> str:
    return f"{now.strftime('%Y%m%dT%H%M%SZ')}-{uuid.uuid4().hex[:6]}"


def run_audit(
    listings: Iterable[StoreListing],
    config: AuditConfig,
    transport: Optional[HttpTransport] = None,
    run_id: Optional[str] = None,
    clock: Callable[[], datetime.datetime] = lambda: datetime.datetime.now(datetime.timezone.utc),
    progress: Optional[Callable[[ExposureReport], None]] = None,
) -> AssessmentRun:
    """Audit every listing with `config.workers` threads sharing one transport.

    A transport passed in stays open; one built here is closed at the end.
    """
    listings = list(listings)
    owned = transport is None
    ctx = AuditContext.from_config(config, transport)
    started = clock()
    logger.info("auditing %d listings with %d workers (config %s)", len(listings), config.workers, config.digest())

    def one(listing: StoreListing) -> ExposureReport:
        report = audit_plugin(listing, ctx)
        if progress is not None:
            progress(report)
        return report

    try:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            reports = list(pool.map(one, listings))
    finally:
        _release(ctx, owned)

    run = AssessmentRun(
        run_id=run_id or new_run_id(started),
        timestamp=started.isoformat(),
        config_digest=config.digest(),
        reports=tuple(reports),
    )
    logger.info("run %s finished: %s", run.run_id, run.totals())
    return run


def layer_over(
    listings: Iterable[StoreListing],
    config: AuditConfig,
    fn: Callable[[StoreListing, AuditContext], T],
    transport: Optional[HttpTransport] = None,
) -> List[T]:
    """Run one layer (`fn`) over every listing on the audit's worker pool, in listing order."""
    listings = list(listings)
    owned = transport is None
    ctx = AuditContext.from_config(config, transport)
    try:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(lambda l: fn(l, ctx), listings))
    finally:
        _release(ctx, owned)
