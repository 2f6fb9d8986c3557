import json
import random

import pytest

from modules.errors import InvalidUrl, MalformedDocument, MissingField, PluginAuditError, UnsupportedVersion
from modules.manifest.parser import parse_api_document, parse_manifest, serialize_manifest


def _manifest(**overrides) -> dict:
    doc = {
        "schema_version": "v1",
        "name_for_human": "Weather Pal",
        "name_for_model": "weather_pal",
        "description_for_human": "Daily forecasts for any city.",
        "description_for_model": "Use for weather questions.",
        "auth": {"type": "none"},
        "api": {"type": "openapi", "url": "https://x.io/openapi.yaml"},
        "logo_url": "https://x.io/logo.png",
        "contact_email": "dev@x.io",
        "legal_info_url": "https://x.io/legal",
    }
    doc.update(overrides)
    return doc


def test_parse_manifest_no_auth():
    m = parse_manifest(json.dumps(_manifest()))
    assert m.multi_auth is False
    assert m.api_url == "https://x.io/openapi.yaml"
    assert m.token is None
    assert m.name == "Weather Pal"
    assert m.legal_url == "https://x.io/legal"


def test_parse_manifest_service_http_token():
    doc = _manifest(auth={
        "type": "service_http",
        "authorization_type": "bearer",
        "verification_tokens": {"openai": "abc123"},
    })
    m = parse_manifest(json.dumps(doc))
    assert m.multi_auth is True
    assert m.token == "abc123"
    assert m.auth_type == "service_http"


def test_parse_manifest_token_first_sorted_key_wins():
    doc = _manifest(auth={"type": "service_http", "verification_tokens": {"zeta": "zzz", "alpha": "aaa"}})
    assert parse_manifest(json.dumps(doc)).token == "aaa"


def test_parse_manifest_ignores_token_when_auth_none():
    doc = _manifest(auth={"type": "none", "verification_tokens": {"openai": "leaked"}})
    m = parse_manifest(json.dumps(doc))
    assert m.multi_auth is False
    assert m.token is None


def test_parse_manifest_empty_object_is_missing_field():
    with pytest.raises(MissingField):
        parse_manifest("{}")


def test_parse_manifest_missing_api_url():
    doc = _manifest()
    del doc["api"]
    with pytest.raises(MissingField) as exc:
        parse_manifest(json.dumps(doc))
    assert exc.value.field == "api.url"


@pytest.mark.parametrize("raw", ["<html>hi</html>", "[1, 2]", "   ", b"\xff\xfe\x00"])
def test_parse_manifest_malformed(raw):
    with pytest.raises(MalformedDocument):
        parse_manifest(raw)


def test_parse_manifest_preserves_unknown_fields():
    doc = _manifest(x_vendor_extension={"tier": "gold"})
    m = parse_manifest(json.dumps(doc))
    assert m.raw_fields["x_vendor_extension"] == {"tier": "gold"}
    again = parse_manifest(serialize_manifest(m))
    assert again == m
    assert again.raw_fields == m.raw_fields


@pytest.mark.parametrize("seed", range(25))
def test_parse_manifest_is_total_over_bytes(seed):
    rng = random.Random(seed)
    blobs = [rng.randbytes(rng.randint(1, 64))]
    base = json.dumps(_manifest()).encode()
    # truncations and single-byte corruptions of a real manifest
    cut = rng.randint(1, len(base))
    blobs.append(base[:cut])
    pos = rng.randrange(len(base))
    blobs.append(base[:pos] + bytes([rng.randint(0, 255)]) + base[pos + 1:])
    for blob in blobs:
        try:
            m = parse_manifest(blob)
        except PluginAuditError:
            continue
        assert m.multi_auth or m.token is None


@pytest.mark.parametrize("seed", range(20))
def test_no_token_without_multi_auth_property(seed):
    rng = random.Random(seed)
    auth_type = rng.choice(["none", "service_http", "oauth", "user_http"])
    auth = {"type": auth_type}
    if rng.random() < 0.7:
        auth["verification_tokens"] = {"openai": f"tok{rng.randint(0, 9999)}"}
    m = parse_manifest(json.dumps(_manifest(auth=auth)))
    assert m.multi_auth == (auth_type != "none")
    if not m.multi_auth:
        assert m.token is None


WEATHER_YAML = """
openapi: 3.0.1
info: {title: Weather, version: "1.0"}
servers:
  - url: /v1
paths:
  /weather:
    get:
      parameters:
        - {name: location, in: query, required: true, schema: {type: string}}
        - {name: date, in: query, required: true, schema: {type: string}}
      responses:
        "200": {description: ok}
"""

JOBS_JSON = json.dumps({
    "openapi": "3.1.0",
    "info": {"title": "Jobs", "version": "1"},
    "paths": {
        "/jobs": {
            "post": {
                "requestBody": {"content": {"application/json": {"schema": {"$ref": "#/components/schemas/Job"}}}},
                "responses": {"201": {"description": "created"}},
            }
        },
        "/jobs/{job_id}": {
            "parameters": [{"name": "job_id", "in": "path", "schema": {"type": "integer"}}],
            "get": {"responses": {"200": {"description": "ok"}}},
            "delete": {"security": [{"bearerAuth": []}], "responses": {"204": {"description": "gone"}}},
        },
    },
    "components": {
        "schemas": {
            "Job": {
                "type": "object",
                "required": ["title"],
                "properties": {"title": {"type": "string"}, "owner": {"$ref": "#/components/schemas/User"}},
            },
            "User": {"type": "object", "properties": {"id": {"type": "integer"}}},
        }
    },
})


def test_parse_api_document_weather():
    surface = parse_api_document(WEATHER_YAML, "http://p1.plugins.test/openapi.yaml")
    assert [e.key for e in surface.endpoints] == ["GET /weather"]
    params = surface.endpoints[0].parameters
    assert [(p.name, p.location, p.schema_type, p.required) for p in params] == [
        ("location", "query", "string", True),
        ("date", "query", "string", True),
    ]
    assert surface.server_url == "http://p1.plugins.test/v1"
    assert surface.endpoint_url(surface.endpoints[0]) == "http://p1.plugins.test/v1/weather"


def test_parse_api_document_body_and_refs():
    surface = parse_api_document(JOBS_JSON, "https://jobs.example/openapi.json")
    keys = [e.key for e in surface.endpoints]
    # lexicographic by (path, method)
    assert keys == ["POST /jobs", "DELETE /jobs/{job_id}", "GET /jobs/{job_id}"]

    post = surface.endpoints[0]
    body = {p.name: p for p in post.parameters if p.location == "body"}
    assert body["title"].required and body["title"].schema_type == "string"
    # nested ref degrades to object
    assert body["owner"].schema_type == "object" and not body["owner"].required

    delete = surface.endpoints[1]
    assert delete.auth_hint == "bearerAuth"
    assert delete.parameters[0].name == "job_id" and delete.parameters[0].schema_type == "integer"
    assert surface.server_url == "https://jobs.example"


def test_parse_api_document_zero_paths():
    surface = parse_api_document('{"openapi": "3.0.0", "paths": {}}', "https://x.io/openapi.json")
    assert surface.endpoints == []


def test_parse_api_document_swagger_2_rejected():
    with pytest.raises(UnsupportedVersion):
        parse_api_document('{"swagger": "2.0", "paths": {}}', "https://x.io/openapi.json")


def _with_body_schema(schema: dict) -> str:
    return json.dumps({
        "openapi": "3.0.0",
        "paths": {"/notes": {"post": {
            "requestBody": {"content": {"application/json": {"schema": schema}}},
            "responses": {"201": {"description": "created"}},
        }}},
    })


@pytest.mark.parametrize("required", [True, "title", [1, 2], {"title": True}])
def test_parse_api_document_bad_required_list(required):
    schema = {"type": "object", "required": required, "properties": {"title": {"type": "string"}}}
    with pytest.raises(MalformedDocument):
        parse_api_document(_with_body_schema(schema), "https://notes.example/openapi.json")


@pytest.mark.parametrize("server", ["http://[::1", "ftp://files.example/v1"])
def test_parse_api_document_bad_server_url(server):
    doc = json.dumps({"openapi": "3.0.0", "servers": [{"url": server}], "paths": {}})
    with pytest.raises(InvalidUrl):
        parse_api_document(doc, "https://x.io/openapi.json")


def test_parse_api_document_not_a_document():
    with pytest.raises(MalformedDocument):
        parse_api_document("- just\n- a list\n", "https://x.io/openapi.yaml")


def test_parse_api_document_adds_undeclared_placeholders():
    doc = {"openapi": "3.0.0", "paths": {"/users/{uid}/posts": {"get": {}}}}
    surface = parse_api_document(json.dumps(doc), "https://x.io/openapi.json")
    (param,) = surface.endpoints[0].parameters
    assert (param.name, param.location, param.required) == ("uid", "path", True)
