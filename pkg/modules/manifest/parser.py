# parser.py: raw manifest / API-description text to domain types
from __future__ import annotations

import json
from typing import Any, Dict, List, Optional
from urllib.parse import urljoin, urlsplit

import yaml

from modules.errors import MalformedDocument, MissingField, UnsupportedVersion, InvalidUrl
from modules.logger import get_logger
from modules.manifest.models import (
    SCHEMA_TYPES,
    ApiEndpoint,
    ApiParameter,
    ApiSurface,
    ManifestData,
    is_absolute_http_url,
    path_placeholders,
)

logger = get_logger(__name__)

HTTP_METHODS = ("get", "put", "post", "delete", "patch", "head", "options")
TOKEN_CONTAINER = "verification_tokens"
NO_AUTH = "none"


def _decode(raw: str | bytes, source: Optional[str]) -> str:
    if isinstance(raw, (bytes, bytearray)):
        try:
            raw = bytes(raw).decode("utf-8")
        except UnicodeDecodeError as e:
            raise MalformedDocument(f"not UTF-8 ({e.reason})", source) from e
    if not isinstance(raw, str):
        raise MalformedDocument(f"expected text, got {type(raw).__name__}", source)
    if not raw.strip():
        raise MalformedDocument("empty document", source)
    return raw


def _load_json_object(text: str, source: Optional[str]) -> Dict[str, Any]:
    try:
        doc = json.loads(text)
    except (ValueError, RecursionError) as e:
        raise MalformedDocument(f"not JSON ({type(e).__name__})", source) from e
    if not isinstance(doc, dict):
        raise MalformedDocument(f"top level is {type(doc).__name__}, not an object", source)
    return doc


def _first_token(container: Any) -> Optional[str]:
    # any key name; first non-empty string under sorted keys
    if not isinstance(container, dict):
        return None
    for key in sorted(container, key=str):
        value = container[key]
        if isinstance(value, str) and value.strip():
            return value
    return None


def parse_manifest(raw_text: str | bytes, source: Optional[str] = None) -> ManifestData:
    """Parse an `ai-plugin.json` document.

    Raises:
        MalformedDocument: the text is not a JSON object.
        MissingField: no human/model name or no `api.url`, so it is not a plugin manifest.
    """
    text = _decode(raw_text, source)
    doc = _load_json_object(text, source)

    name = doc.get("name_for_human")
    if not isinstance(name, str) or not name.strip():
        name = doc.get("name_for_model")
    if not isinstance(name, str) or not name.strip():
        raise MissingField("name_for_human", source)

    api = doc.get("api")
    api_url = api.get("url") if isinstance(api, dict) else None
    if not isinstance(api_url, str) or not api_url.strip():
        raise MissingField("api.url", source)

    auth = doc.get("auth")
    auth_type = NO_AUTH
    if isinstance(auth, dict) and isinstance(auth.get("type"), str) and auth["type"].strip():
        auth_type = auth["type"].strip()
    multi_auth = auth_type != NO_AUTH
    token = _first_token(auth.get(TOKEN_CONTAINER)) if multi_auth and isinstance(auth, dict) else None

    description = doc.get("description_for_human")
    legal_url = doc.get("legal_info_url")

    return ManifestData(
        name=name,
        api_url=api_url.strip(),
        multi_auth=multi_auth,
        description=description if isinstance(description, str) else "",
        legal_url=legal_url if isinstance(legal_url, str) and legal_url.strip() else None,
        token=token,
        auth_type=auth_type,
        raw_fields=dict(doc),
    )


def serialize_manifest(manifest: ManifestData) -> str:
    """Inverse of `parse_manifest`: the fields as fetched, in their original order."""
    return json.dumps(manifest.raw_fields, ensure_ascii=False, indent=2)


# ---------------------------------------------------------------------------
# API descriptions (OpenAPI 3.x subset)
# ---------------------------------------------------------------------------

def _load_api_object(text: str, source: Optional[str]) -> Dict[str, Any]:
    try:
        return _load_json_object(text, source)
    except MalformedDocument:
        pass
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise MalformedDocument("neither JSON nor YAML", source) from e
    except RecursionError as e:
        raise MalformedDocument("document nests too deeply", source) from e
    if not isinstance(doc, dict):
        raise MalformedDocument("top level is not a mapping", source)
    return doc


def _resolve_ref(doc: Dict[str, Any], node: Any) -> Any:
    """Follow one local `$ref`; anything still a `$ref` afterwards is left alone."""
    if not isinstance(node, dict) or "$ref" not in node:
        return node
    ref = node["$ref"]
    if not isinstance(ref, str) or not ref.startswith("#/"):
        return {}
    target: Any = doc
    for part in ref[2:].split("/"):
        if not isinstance(target, dict):
            return {}
        target = target.get(part.replace("~1", "/").replace("~0", "~"), {})
    return target if isinstance(target, dict) else {}


def _schema_type(doc: Dict[str, Any], schema: Any) -> tuple[str, str]:
    """Return (type, item type). Refs resolve one level; deeper refs read as "object"."""
    schema = _resolve_ref(doc, schema)
    if not isinstance(schema, dict):
        return "string", "string"
    if "$ref" in schema:
        return "object", "string"
    t = schema.get("type")
    if t is None:
        t = "object" if "properties" in schema else "string"
    if t not in SCHEMA_TYPES:
        t = "object"
    item_type = "string"
    if t == "array":
        items = schema.get("items", {})
        if isinstance(items, dict) and "$ref" in items:
            item_type = "object"
        elif isinstance(items, dict) and items.get("type") in SCHEMA_TYPES:
            item_type = items["type"]
    return t, item_type


def _parse_parameters(doc: Dict[str, Any], raw_params: Any, path: str) -> Dict[tuple, ApiParameter]:
    params: Dict[tuple, ApiParameter] = {}
    if not isinstance(raw_params, list):
        return params
    placeholders = set(path_placeholders(path))
    for raw in raw_params:
        p = _resolve_ref(doc, raw)
        if not isinstance(p, dict):
            continue
        name, location = p.get("name"), p.get("in")
        if not isinstance(name, str) or location not in ("path", "query", "header"):
            continue
        if location == "path" and name not in placeholders:
            logger.debug("dropping path parameter %r with no placeholder in %s", name, path)
            continue
        schema_type, item_type = _schema_type(doc, p.get("schema", {}))
        required = True if location == "path" else bool(p.get("required", False))
        params[(name, location)] = ApiParameter(name, location, schema_type, required, item_type)
    return params


def _parse_body(doc: Dict[str, Any], operation: Dict[str, Any]) -> List[ApiParameter]:
    body = _resolve_ref(doc, operation.get("requestBody"))
    if not isinstance(body, dict):
        return []
    content = body.get("content")
    if not isinstance(content, dict) or not content:
        return []
    media = content.get("application/json") or next(iter(content.values()))
    schema = _resolve_ref(doc, media.get("schema") if isinstance(media, dict) else None)
    if not isinstance(schema, dict):
        return []

    properties = schema.get("properties")
    if isinstance(properties, dict) and properties:
        required_names = schema.get("required") or []
        if not isinstance(required_names, list) or not all(isinstance(n, str) for n in required_names):
            raise MalformedDocument("body schema 'required' is not a list of names")
        out = []
        for prop_name, prop_schema in properties.items():
            t, item_type = _schema_type(doc, prop_schema)
            out.append(ApiParameter(str(prop_name), "body", t, prop_name in required_names, item_type))
        return out

    # non-object bodies travel as a single anonymous value
    t, item_type = _schema_type(doc, schema)
    return [ApiParameter("$body", "body", t, bool(body.get("required", False)), item_type)]


def _auth_hint(security: Any) -> Optional[str]:
    if not isinstance(security, list):
        return None
    names = sorted({str(k) for req in security if isinstance(req, dict) for k in req})
    return ",".join(names) or None


def _server_url(doc: Dict[str, Any], base_url: str) -> str:
    servers = doc.get("servers")
    if isinstance(servers, list):
        for server in servers:
            url = server.get("url") if isinstance(server, dict) else None
            if isinstance(url, str) and url.strip():
                try:
                    resolved = urljoin(base_url, url.strip())
                except ValueError as e:
                    raise InvalidUrl(url, str(e)) from e
                if not is_absolute_http_url(resolved):
                    raise InvalidUrl(resolved, "server URL is not http(s)")
                return resolved
    parts = urlsplit(base_url)
    return f"{parts.scheme}://{parts.netloc}"


def parse_api_document(raw_text: str | bytes, base_url: str) -> ApiSurface:
    """Enumerate every (path, method) pair an API description declares.

    JSON or YAML; OpenAPI 3.x only. Relative server URLs resolve against `base_url`.
    """
    if not is_absolute_http_url(base_url):
        raise InvalidUrl(base_url)
    text = _decode(raw_text, base_url)
    doc = _load_api_object(text, base_url)

    version = doc.get("openapi")
    if version is None and "swagger" in doc:
        raise UnsupportedVersion(str(doc.get("swagger")))
    if version is None:
        raise MalformedDocument("no 'openapi' version field", base_url)
    if not str(version).startswith("3."):
        raise UnsupportedVersion(str(version))

    global_security = doc.get("security")
    endpoints: List[ApiEndpoint] = []
    paths = doc.get("paths") or {}
    if not isinstance(paths, dict):
        raise MalformedDocument("'paths' is not a mapping", base_url)

    for path, item in paths.items():
        if not isinstance(path, str) or not isinstance(item, dict):
            continue
        shared = _parse_parameters(doc, item.get("parameters"), path)
        for method in HTTP_METHODS:
            operation = item.get(method)
            if not isinstance(operation, dict):
                continue
            params = dict(shared)
            params.update(_parse_parameters(doc, operation.get("parameters"), path))
            declared = {name for (name, loc) in params if loc == "path"}
            for placeholder in path_placeholders(path):
                if placeholder not in declared:
                    params[(placeholder, "path")] = ApiParameter(placeholder, "path", "string", True)
            ordered = list(params.values()) + _parse_body(doc, operation)
            hint = _auth_hint(operation.get("security", global_security))
            endpoints.append(ApiEndpoint(path=path, method=method, parameters=tuple(ordered), auth_hint=hint))

    surface = ApiSurface(source_url=base_url, server_url=_server_url(doc, base_url), endpoints=endpoints)
    logger.debug("parsed %d endpoints from %s", len(surface.endpoints), base_url)
    return surface
