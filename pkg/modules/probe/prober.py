"""Send synthesized requests to a plugin's API from outside the platform and
decide which of the API-level exposures apply.
"""
from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional

import pandas as pd

from modules.discovery.transport import FetchPolicy, HttpTransport
from modules.errors import MissingSurface, PluginAuditError, TransportError
from modules.logger import get_logger, mask_token
from modules.manifest.models import PluginRecord
from modules.probe.requests import ProbeRequest, SynthesisPolicy, attach_token, build_request, is_safe_to_send
from modules.probe.responses import InvalidResponseLexicon, ProbeResponse, ResponseClass, aggregate

logger = get_logger(__name__)

UNSAFE_METHOD = "unsafe-method"
UNSATISFIABLE = "unsatisfiable-parameter"

AUTH_NONE = "none"
AUTH_OTHERS = "others"
AUTH_TOKEN = "token"
AUTH_COLUMNS = (AUTH_NONE, AUTH_OTHERS, AUTH_TOKEN)

CHANGE = "Change"
SKIPPED = "Skipped"
# tie order when a plugin's endpoints fail for different reasons
REASON_ORDER = (
    CHANGE,
    ResponseClass.UNAUTHORIZED.value,
    ResponseClass.CLIENT_ERROR.value,
    ResponseClass.RATE_LIMITED.value,
    ResponseClass.INVALID_MEANINGLESS.value,
    ResponseClass.NETWORK_ERROR.value,
)


def probe_endpoint(
    request: ProbeRequest,
    policy: FetchPolicy,
    transport: HttpTransport,
    lexicon: InvalidResponseLexicon = InvalidResponseLexicon(),
) -> List[ProbeResponse]:
    """Issue `request` exactly `policy.attempts` times, one attempt per vantage index.

    No retries: each attempt is an observation.
    """
    out: List[ProbeResponse] = []
    for attempt in range(policy.attempts):
        started = time.monotonic()
        try:
            resp = transport.request(
                request.method,
                request.url,
                headers=request.headers,
                json_body=request.body,
                vantage=attempt,
            )
        except TransportError:
            out.append(ProbeResponse.observe(None, None, time.monotonic() - started, attempt, lexicon,
                                             request.token_attached))
            continue
        out.append(ProbeResponse.observe(resp.status, resp.text, resp.elapsed, attempt, lexicon,
                                         request.token_attached))
    return out


@dataclass
class SurfaceProbe:
    """Per-endpoint aggregates for one plugin, without and (if possible) with its token."""
    plugin_id: str
    without_token: Dict[str, ResponseClass] = field(default_factory=dict)
    with_token: Dict[str, ResponseClass] = field(default_factory=dict)
    responses: Dict[str, List[ProbeResponse]] = field(default_factory=dict)
    token_responses: Dict[str, List[ProbeResponse]] = field(default_factory=dict)
    skipped: Dict[str, str] = field(default_factory=dict)

    @property
    def token_probed(self) -> bool:
        return bool(self.with_token)


def probe_surface(
    record: PluginRecord,
    policy: FetchPolicy,
    transport: HttpTransport,
    aggressive: bool = False,
    lexicon: InvalidResponseLexicon = InvalidResponseLexicon(),
    synthesis: SynthesisPolicy = SynthesisPolicy(),
) -> SurfaceProbe:
    if record.manifest is None or record.surface is None:
        raise MissingSurface(record.plugin_id)

    manifest, surface = record.manifest, record.surface
    result = SurfaceProbe(plugin_id=record.plugin_id)
    use_token = manifest.multi_auth and bool(manifest.token)

    for endpoint in surface.endpoints:
        try:
            request = build_request(endpoint, surface.server_url, synthesis)
        except PluginAuditError as e:
            logger.warning("%s: cannot build %s: %s", record.plugin_id, endpoint.key, e)
            result.skipped[endpoint.key] = UNSATISFIABLE
            continue
        if not is_safe_to_send(request, aggressive):
            logger.debug("%s: skipping %s (state-changing)", record.plugin_id, endpoint.key)
            result.skipped[endpoint.key] = UNSAFE_METHOD
            continue

        responses = probe_endpoint(request, policy, transport, lexicon)
        result.responses[endpoint.key] = responses
        result.without_token[endpoint.key] = aggregate(responses)

        if use_token:
            tokened = attach_token(request, manifest.token)
            token_responses = probe_endpoint(tokened, policy, transport, lexicon)
            result.token_responses[endpoint.key] = token_responses
            result.with_token[endpoint.key] = aggregate(token_responses)

    surface.responses = dict(result.responses)
    logger.info(
        "%s: probed %d endpoint(s), skipped %d%s",
        record.plugin_id,
        len(result.without_token),
        len(result.skipped),
        f", token {mask_token(manifest.token)}" if use_token else "",
    )
    return result


@dataclass(frozen=True)
class ApiExposures:
    exposure3: bool = False
    exposure4: bool = False
    exposure5: bool = False

    def to_dict(self) -> Dict[str, bool]:
        return {"exposure3": self.exposure3, "exposure4": self.exposure4, "exposure5": self.exposure5}


def evaluate_exposures_345(record: PluginRecord, probes: SurfaceProbe) -> ApiExposures:
    """Decide Exposures 3-5 from the probe aggregates.

    A plugin counts as answering when at least one endpoint returned valid data
    on every attempt. Exactly one branch of the auth split can fire.
    """
    if record.manifest is None or record.surface is None:
        raise MissingSurface(record.plugin_id)

    requires_auth = record.manifest.multi_auth
    open_valid = any(k is ResponseClass.VALID for k in probes.without_token.values())
    token_valid = any(k is ResponseClass.VALID for k in probes.with_token.values())

    if not requires_auth:
        return ApiExposures(exposure3=open_valid)
    if open_valid:
        return ApiExposures(exposure4=True)
    return ApiExposures(exposure5=bool(record.manifest.token) and token_valid)


@dataclass(frozen=True)
class ProbeSummary:
    """What a run keeps of a surface probe: enough to rebuild the response table."""
    auth: str
    respondable: bool
    reason: Optional[str] = None
    endpoints: Dict[str, str] = field(default_factory=dict)
    token_endpoints: Dict[str, str] = field(default_factory=dict)
    skipped: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "auth": self.auth,
            "respondable": self.respondable,
            "reason": self.reason,
            "endpoints": dict(sorted(self.endpoints.items())),
            "token_endpoints": dict(sorted(self.token_endpoints.items())),
            "skipped": dict(sorted(self.skipped.items())),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ProbeSummary":
        return cls(
            auth=data["auth"],
            respondable=bool(data["respondable"]),
            reason=data.get("reason"),
            endpoints=dict(data.get("endpoints") or {}),
            token_endpoints=dict(data.get("token_endpoints") or {}),
            skipped=dict(data.get("skipped") or {}),
        )


def _failure_reason(kinds: Iterable[ResponseClass]) -> str:
    counts = Counter(CHANGE if k is ResponseClass.UNSTABLE else k.value
                     for k in kinds if k is not ResponseClass.VALID)
    if not counts:
        return SKIPPED
    return min(counts, key=lambda r: (-counts[r], REASON_ORDER.index(r)))


def summarize_probe(record: PluginRecord, probes: SurfaceProbe, exposures: ApiExposures) -> ProbeSummary:
    manifest = record.manifest
    if not manifest.multi_auth:
        auth = AUTH_NONE
    elif manifest.token:
        auth = AUTH_TOKEN
    else:
        auth = AUTH_OTHERS

    respondable = exposures.exposure3 or exposures.exposure4 or exposures.exposure5
    reason = None
    if not respondable:
        kinds = probes.with_token.values() if probes.token_probed else probes.without_token.values()
        reason = _failure_reason(kinds)
    return ProbeSummary(
        auth=auth,
        respondable=respondable,
        reason=reason,
        endpoints={k: v.value for k, v in probes.without_token.items()},
        token_endpoints={k: v.value for k, v in probes.with_token.items()},
        skipped=dict(probes.skipped),
    )


def response_distribution(summaries: Iterable[ProbeSummary]) -> pd.DataFrame:
    """Respondable vs. non-respondable plugins by auth type, failures split by reason."""
    rows = ["respondable"] + [f"non-respondable: {r}" for r in REASON_ORDER + (SKIPPED,)]
    table = pd.DataFrame(0, index=rows, columns=list(AUTH_COLUMNS), dtype=int)
    for s in summaries:
        row = "respondable" if s.respondable else f"non-respondable: {s.reason or SKIPPED}"
        if row in table.index and s.auth in table.columns:
            table.loc[row, s.auth] += 1
    table["total"] = table.sum(axis=1)
    return table
