import datetime
import json

import httpx
import pytest

from modules.audit.pipeline import AuditContext, audit_plugin, classify_listing, layer_over, new_run_id, run_audit
from modules.discovery.transport import HttpTransport
from modules.manifest.models import StoreListing
from modules.report.models import AssessmentRun

ORIGIN = "https://weather.example"
LEGAL = ORIGIN + "/legal"

MANIFEST = {
    "schema_version": "v1",
    "name_for_human": "Weather Pal",
    "name_for_model": "weather_pal",
    "description_for_human": "Daily weather forecasts for any city.",
    "description_for_model": "Use for weather questions.",
    "auth": {"type": "none"},
    "api": {"type": "openapi", "url": ORIGIN + "/openapi.yaml"},
    "contact_email": "dev@weather.example",
    "legal_info_url": LEGAL,
}

OPENAPI = f"""openapi: 3.0.1
info:
  title: Weather Pal
  version: v1
servers:
  - url: {ORIGIN}/v1
paths:
  /forecast:
    get:
      operationId: forecast
      parameters:
        - name: q
          in: query
          required: true
          schema:
            type: string
"""

LEGAL_PAGE = """<html><head><title>Privacy Policy</title></head><body>
<header><h1>Privacy Policy</h1></header>
<main><p>We act as the Data Controller for personal information you share.</p>
<p>You may opt-out at any time.</p></main></body></html>"""

FORECAST = '{"city": "test", "days": [{"high": 21, "low": 12}]}'


def _listing(**overrides) -> StoreListing:
    fields = {
        "plugin_id": "weather",
        "name": "Weather Pal",
        "description": "Daily weather forecasts for any city.",
        "legal_url": LEGAL,
        "contact_email": "dev@weather.example",
    }
    fields.update(overrides)
    return StoreListing(**fields)


class Site:
    """MockTransport handler over a dict of URL → (status, body); unknown URLs 404."""

    def __init__(self, pages: dict):
        self.pages = pages
        self.calls: list[str] = []

    def __call__(self, request: httpx.Request) -> httpx.Response:
        url = str(request.url)
        self.calls.append(url)
        status, body = self.pages.get(url, (404, "Not Found"))
        return httpx.Response(status, text=body)


def _site(**replace) -> dict:
    pages = {
        ORIGIN + "/.well-known/ai-plugin.json": (200, json.dumps(MANIFEST)),
        ORIGIN + "/openapi.yaml": (200, OPENAPI),
        ORIGIN + "/v1/forecast?q=test": (200, FORECAST),
        LEGAL: (200, LEGAL_PAGE),
    }
    pages.update(replace)
    return pages


@pytest.fixture
def site_transport(audit_config):
    made = []

    def _make(pages: dict):
        site = Site(pages)
        policy = audit_config.fetch_policy()
        t = HttpTransport(policy, transport=httpx.MockTransport(site), sleep=lambda s: None)
        made.append(t)
        return AuditContext.from_config(audit_config, t), site

    yield _make
    for t in made:
        t.close()


def test_open_api_plugin(site_transport):
    ctx, site = site_transport(_site())
    report = audit_plugin(_listing(), ctx)
    assert report.exposures == {"e1": True, "e2": False, "e3": True, "e4": False, "e5": False}
    assert report.fetch_status == "AccessibleRelevant"
    assert report.legal.category.value == "PrivacyPolicy"
    assert report.probe.endpoints == {"GET /forecast": "Valid"}
    assert report.category == "Weather"
    checks = {e.check for e in report.evidence}
    assert {"e1", "e3"} <= checks
    e3 = next(e for e in report.evidence if e.check == "e3")
    assert e3.input == "GET /forecast"
    assert site.calls.count(ORIGIN + "/v1/forecast?q=test") == 3


def test_no_legal_url_is_clean(site_transport):
    ctx, site = site_transport({})
    report = audit_plugin(_listing(legal_url=None), ctx)
    assert report.fetch_status == "NoLegalUrl"
    assert not any(report.exposures.values())
    assert report.legal.accessibility.value == "Inaccessible"
    assert site.calls == []


def test_renamed_listing_is_exposure2(site_transport):
    ctx, _ = site_transport(_site())
    report = audit_plugin(_listing(name="AAA_Weather_Pal"), ctx)
    assert report.exposures["e2"]
    assert report.consistency.flags
    assert any(e.check == "e2:NameMismatch" for e in report.evidence)


def test_unusable_api_document_keeps_exposure1(site_transport):
    ctx, _ = site_transport(_site(**{ORIGIN + "/openapi.yaml": (200, "openapi: [unclosed")}))
    report = audit_plugin(_listing(), ctx)
    assert report.exposures["e1"]
    assert not report.exposures["e3"]
    assert report.probe is None
    assert any(e.check == "api" for e in report.evidence)


def test_empty_description_falls_back(site_transport):
    ctx, _ = site_transport({})
    assignment, regions, evidence = classify_listing(_listing(description="", legal_url=None), ctx)
    assert assignment.score == 0.0
    assert regions == []
    assert [e.check for e in evidence] == ["classifier"]


def test_run_audit_sorts_reports_and_keeps_caller_transport(audit_config):
    site = Site(_site())
    transport = HttpTransport(audit_config.fetch_policy(), transport=httpx.MockTransport(site), sleep=lambda s: None)
    listings = [_listing(), _listing(plugin_id="quiet", legal_url=None)]
    seen = []
    fixed = datetime.datetime(2024, 6, 1, 12, 0, tzinfo=datetime.timezone.utc)
    try:
        run = run_audit(listings, audit_config, transport=transport, run_id="r1", clock=lambda: fixed,
                        progress=lambda r: seen.append(r.plugin_id))
        # still usable: the caller owns it
        assert transport.get(LEGAL).status == 200
    finally:
        transport.close()
    assert isinstance(run, AssessmentRun)
    assert [r.plugin_id for r in run.reports] == ["quiet", "weather"]
    assert sorted(seen) == ["quiet", "weather"]
    assert run.config_digest == audit_config.digest()
    assert run.timestamp == fixed.isoformat()
    assert run.totals()["e3"] == 1


def test_layer_over(audit_config):
    rows = layer_over([_listing(plugin_id=f"p{i}", legal_url=None) for i in range(5)], audit_config,
                      lambda listing, ctx: listing.plugin_id)
    assert rows == ["p0", "p1", "p2", "p3", "p4"]


def test_new_run_id():
    run_id = new_run_id(datetime.datetime(2024, 6, 1, 12, 0, 5))
    assert run_id.startswith("20240601T120005Z-")
    assert len(run_id) == len("20240601T120005Z-") + 6


HOSTILE_OPENAPI = json.dumps({
    "openapi": "3.0.0",
    "servers": [{"url": ORIGIN + "/v1"}],
    "paths": {"/notes": {"post": {
        "requestBody": {"content": {"application/json": {"schema": {
            "type": "object", "required": True, "properties": {"title": {"type": "string"}},
        }}}},
    }}},
})


def test_hostile_api_document_is_evidence(site_transport):
    ctx, _ = site_transport(_site(**{ORIGIN + "/openapi.yaml": (200, HOSTILE_OPENAPI)}))
    report = audit_plugin(_listing(), ctx)
    assert report.exposures["e1"]
    assert report.probe is None
    api = [e for e in report.evidence if e.check == "api"]
    assert api and api[0].observation.startswith("MalformedDocument")


def test_unsendable_urls_in_manifest(site_transport):
    broken = dict(MANIFEST, api={"type": "openapi", "url": "http://[::1/openapi.yaml"},
                  legal_info_url="http://[::1/legal")
    ctx, _ = site_transport(_site(**{ORIGIN + "/.well-known/ai-plugin.json": (200, json.dumps(broken))}))
    report = audit_plugin(_listing(), ctx)
    assert report.exposures["e1"]
    assert report.exposures["e2"]
    assert any(e.check == "api" for e in report.evidence)
    assert not any(e.check.startswith("error") for e in report.evidence)


def test_unexpected_failure_stays_with_its_plugin(audit_config, monkeypatch):
    import modules.audit.pipeline as pipeline

    real = pipeline.check_listing_consistency

    def flaky(listing, manifest, ctx):
        if listing.plugin_id == "broken":
            raise RuntimeError("boom")
        return real(listing, manifest, ctx)

    monkeypatch.setattr(pipeline, "check_listing_consistency", flaky)
    site = Site(_site())
    transport = HttpTransport(audit_config.fetch_policy(), transport=httpx.MockTransport(site), sleep=lambda s: None)
    try:
        run = run_audit([_listing(), _listing(plugin_id="broken")], audit_config, transport=transport)
    finally:
        transport.close()
    by_id = {r.plugin_id: r for r in run.reports}
    assert set(by_id) == {"broken", "weather"}
    assert by_id["weather"].exposures["e3"]
    broken = by_id["broken"]
    assert broken.exposures["e1"]
    assert not broken.exposures["e3"]
    errors = [e for e in broken.evidence if e.check == "error"]
    assert errors and "RuntimeError: boom" in errors[0].observation
