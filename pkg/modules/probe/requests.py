from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Dict, Mapping, Optional
from urllib.parse import quote, urlencode

from modules.errors import InvalidUrl, PreconditionViolation, UnsatisfiableParameter
from modules.manifest.models import ApiEndpoint, ApiParameter, is_absolute_http_url

BODY_PARAM = "$body"

DEFAULT_PLACEHOLDERS: Dict[str, Any] = {
    "string": "test",
    "integer": 1,
    "number": 1.0,
    "boolean": True,
}

SAFE_METHODS = ("GET",)


@dataclass(frozen=True)
class SynthesisPolicy:
    """Placeholder values handed to required parameters, by schema type."""
    placeholders: Mapping[str, Any] = field(default_factory=lambda: dict(DEFAULT_PLACEHOLDERS))
    include_optional: bool = False

    def value_for(self, name: str, schema_type: str, item_type: str = "string") -> Any:
        if schema_type == "array":
            if item_type == "array":
                raise UnsatisfiableParameter(name, "array of array")
            return [self.value_for(name, item_type)]
        if schema_type == "object":
            return {}
        if schema_type in self.placeholders:
            return self.placeholders[schema_type]
        raise UnsatisfiableParameter(name, schema_type)


@dataclass(frozen=True)
class ProbeRequest:
    endpoint: ApiEndpoint
    url: str
    method: str
    headers: Dict[str, str] = field(default_factory=dict)
    body: Any = None
    token_attached: bool = False

    @property
    def key(self) -> str:
        return self.endpoint.key


def _query_value(value: Any) -> Any:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return [_query_value(v) for v in value]
    return value


def build_request(
    endpoint: ApiEndpoint,
    base_url: str,
    synthesis: SynthesisPolicy = SynthesisPolicy(),
) -> ProbeRequest:
    """Fill every required parameter of `endpoint` with a type-conforming placeholder.

    Optional parameters are left out unless the policy asks for them.
    """
    if not is_absolute_http_url(base_url):
        raise InvalidUrl(base_url)

    path = endpoint.path
    query: Dict[str, Any] = {}
    headers: Dict[str, str] = {}
    body: Optional[Any] = None

    params: list[ApiParameter] = [
        p for p in endpoint.parameters if p.required or p.location == "path" or synthesis.include_optional
    ]
    for p in params:
        value = synthesis.value_for(p.name, p.schema_type, p.item_type)
        if p.location == "path":
            rendered = _query_value(value)
            path = path.replace("{%s}" % p.name, quote(str(rendered), safe=""))
        elif p.location == "query":
            query[p.name] = _query_value(value)
        elif p.location == "header":
            headers[p.name] = str(_query_value(value))
        elif p.name == BODY_PARAM:
            body = value
        else:
            body = body if isinstance(body, dict) else {}
            body[p.name] = value

    url = base_url.rstrip("/") + path
    if query:
        url = f"{url}?{urlencode(query, doseq=True)}"
    return ProbeRequest(endpoint=endpoint, url=url, method=endpoint.method, headers=headers, body=body)


def attach_token(request: ProbeRequest, token: str) -> ProbeRequest:
    """Return a copy carrying `Authorization: Bearer <token>`; the input is untouched."""
    if not token:
        raise PreconditionViolation("cannot attach an empty verification token")
    headers = {k: v for k, v in request.headers.items() if k.lower() != "authorization"}
    headers["Authorization"] = f"Bearer {token}"
    return replace(request, headers=headers, token_attached=True)


def is_safe_to_send(request: ProbeRequest, aggressive: bool = False) -> bool:
    """GET, or a POST with no declared parameters. Anything else needs `aggressive`."""
    if aggressive or request.method in SAFE_METHODS:
        return True
    return request.method == "POST" and not request.endpoint.parameters
