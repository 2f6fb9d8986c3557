import json

import httpx
import pytest

from modules.discovery.transport import FetchPolicy, HttpTransport


MANIFEST = {
    "schema_version": "v1",
    "name_for_human": "Weather Pal",
    "name_for_model": "weather_pal",
    "description_for_human": "Daily forecasts.",
    "auth": {"type": "none"},
    "api": {"type": "openapi", "url": "https://weather.example/openapi.yaml"},
    "legal_info_url": "https://weather.example/legal",
}


class RecordingHandler:
    """httpx.MockTransport handler with a per-URL script and a request log."""

    def __init__(self, routes: dict):
        self.routes = routes
        self.calls: list[str] = []

    def __call__(self, request: httpx.Request) -> httpx.Response:
        url = str(request.url)
        self.calls.append(url)
        route = self.routes.get(url)
        if route is None:
            return httpx.Response(404, text="not found")
        if route == "drop":
            raise httpx.ConnectError("connection refused", request=request)
        status, body = route
        return httpx.Response(status, text=body)


@pytest.fixture
def fast_policy() -> FetchPolicy:
    return FetchPolicy(timeout=1.0, attempts=3, per_host_interval=0.0, backoff_initial=0.0)


@pytest.fixture
def make_transport(fast_policy):
    made = []

    def _make(routes: dict):
        handler = RecordingHandler(routes)
        t = HttpTransport(fast_policy, transport=httpx.MockTransport(handler), sleep=lambda s: None)
        made.append(t)
        return t, handler

    yield _make
    for t in made:
        t.close()


@pytest.fixture
def manifest_body() -> str:
    return json.dumps(MANIFEST)
