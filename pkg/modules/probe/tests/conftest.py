import httpx
import pytest

from modules.discovery.transport import FetchPolicy, HttpTransport


class ScriptedApi:
    """MockTransport handler: `(method, url-without-query, has_auth)` → list of responses.

    A script entry is `(status, body)` or "drop"; entries are served in turn and wrap.
    The token, when a route needs one, must arrive as `Authorization: Bearer <token>`.
    """

    def __init__(self, routes: dict, token: str | None = None):
        self.routes = routes
        self.token = token
        self.calls: list[tuple[str, str, dict, bytes]] = []
        self._served: dict = {}

    def __call__(self, request: httpx.Request) -> httpx.Response:
        url = str(request.url)
        self.calls.append((request.method, url, dict(request.headers), request.content))
        auth = request.headers.get("authorization")
        authorized = self.token is not None and auth == f"Bearer {self.token}"
        base = url.split("?", 1)[0]
        key = (request.method, base, authorized)
        script = self.routes.get(key) or self.routes.get((request.method, base, None))
        if script is None:
            return httpx.Response(404, text="Not Found")
        i = self._served.get(key, 0)
        self._served[key] = i + 1
        entry = script[i % len(script)]
        if entry == "drop":
            raise httpx.ReadTimeout("timed out", request=request)
        status, body = entry
        return httpx.Response(status, text=body)


@pytest.fixture
def probe_policy() -> FetchPolicy:
    return FetchPolicy(timeout=1.0, attempts=3, per_host_interval=0.0, backoff_initial=0.0)


@pytest.fixture
def api_transport(probe_policy):
    made = []

    def _make(routes: dict, token: str | None = None):
        api = ScriptedApi(routes, token)
        t = HttpTransport(probe_policy, transport=httpx.MockTransport(api), sleep=lambda s: None)
        made.append(t)
        return t, api

    yield _make
    for t in made:
        t.close()
