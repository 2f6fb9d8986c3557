"""Deterministic synthetic plugin store.

Every random choice comes from one `random.Random(spec.seed)` and every file is
written with a fixed key order, so the same spec always yields the same bytes.

Store layout:
    snapshot.jsonl       one store listing per line
    manifests/<id>.json  manifests of the plugins that leak one
    apis/<id>.{json,yaml} their API descriptions
    pages/<id>-*.html    legal pages and homepages
    routes.json          host -> route table served by `FixtureServer`
    truth.json           what an audit must find
    fixture_spec.json    the FixtureSpec that produced all of the above
"""
from __future__ import annotations

import json
import random
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml

from modules.classifier.categories import CATEGORY_LABELS, load_keyword_table
from modules.discovery.fetcher import FetchStatus
from modules.fixtures.spec import INACCESSIBLE, FixtureSpec, GroundTruth, PluginTruth
from modules.legal.documents import LegalDocCategory
from modules.legal.seeds import DEFAULT_SEEDS
from modules.logger import get_logger

logger = get_logger(__name__)

PLUGIN_DOMAIN = "plugins.test"
STORE_HOST = f"store.{PLUGIN_DOMAIN}"
GITHUB_HOST = "github.com"
DRIVE_HOST = "drive.google.com"

SNAPSHOT_FILE = "snapshot.jsonl"
ROUTES_FILE = "routes.json"
TRUTH_FILE = "truth.json"
SPEC_FILE = "fixture_spec.json"

HTML = "text/html; charset=utf-8"
JSON = "application/json"
YAML = "application/yaml"
TEXT = "text/plain; charset=utf-8"

MEANINGLESS_BODIES = ("Service Unavailable", "Server error", "No requested privileges")
NAME_PREFIX = "AAA_"

_ADJECTIVES = ("Sunny", "Swift", "Bright", "Clever", "Nimble", "Quiet", "Lucky", "Brave",
               "Mellow", "Witty", "Cosmic", "Amber")
_NOUNS = ("Pal", "Buddy", "Genie", "Hub", "Wizard", "Scout", "Owl", "Fox", "Lark", "Pilot",
          "Sage", "Otter")
_TEMPLATES = ("{a} and {b} assistant.", "Your helper for {a} and {b}.", "Ask about {a} or {b}.")
# shares no word with any listing description
_FOREIGN_WORDS = ("vexo", "plimber", "quandle", "zorb", "wunt", "glarp", "snoove", "trindle")
_COUNTRIES = ("Japan", "USA", "UK", "Germany", "France", "India", "Canada", "Brazil", "Korea",
              "Singapore", "Australia", "Mexico")
_RESOURCES = ("lookup", "search", "items", "records", "entries", "results")
_SHARED_DOMAINS = ("mixerbox.test", "pluginlab.test", "toolsmith.test")
_OTHER_HEADINGS = ("Legal Notice", "Disclaimer", "Imprint")
_QUIET_BEHAVIOURS = ("meaningless", "ratelimited", "client", "broken")

# API roles of manifest plugins
OPEN, AUTH_OPEN, TOKEN_GATED, UNSTABLE, QUIET = "open", "auth-open", "token-gated", "unstable", "quiet"


@dataclass
class _Plugin:
    pid: str
    name: str
    description: str
    category: str
    fetch_status: FetchStatus
    legal_category: str = INACCESSIBLE
    legal_url: Optional[str] = None
    email: Optional[str] = None
    regions: Tuple[str, ...] = ()
    share_platform: Optional[str] = None
    role: Optional[str] = None
    behaviour: Optional[str] = None
    auth_type: str = "none"
    token: Optional[str] = None
    flags: List[str] = field(default_factory=list)
    legal_seeds: Tuple[str, ...] = ()

    @property
    def host(self) -> str:
        return f"{self.pid}.{PLUGIN_DOMAIN}"

    @property
    def origin(self) -> str:
        return f"http://{self.host}"


def _reply(status: int, *, body: str = "", file: Optional[str] = None, content_type: str = TEXT) -> Dict[str, Any]:
    out: Dict[str, Any] = {"status": status, "content_type": content_type}
    if file is not None:
        out["file"] = file
    else:
        out["body"] = body
    return out


NOT_FOUND = _reply(404, body="Not Found")


class _Builder:
    def __init__(self, spec: FixtureSpec, out_dir: Path):
        self.spec = spec
        self.out = out_dir
        self.rng = random.Random(spec.seed)
        self.keywords = self._description_keywords()
        self.files: Dict[str, str] = {}
        self.hosts: Dict[str, Dict[str, Any]] = {}
        self.plugins: List[_Plugin] = []
        self._legal_page_index = 0

    @staticmethod
    def _description_keywords() -> Dict[str, List[str]]:
        table = load_keyword_table()
        out: Dict[str, List[str]] = {}
        for label in CATEGORY_LABELS:
            words = [p for p, _ in table.entries.get(label, ()) if " " not in p]
            out[label] = words
        return out

    # -- listings --------------------------------------------------------

    def _listing_text(self, pid: str) -> Tuple[str, str, str]:
        rng = self.rng
        name = f"{rng.choice(_ADJECTIVES)} {rng.choice(_NOUNS)}"
        label = rng.choice(CATEGORY_LABELS)
        a, b = rng.sample(self.keywords[label], 2)
        description = rng.choice(_TEMPLATES).format(a=a, b=b)
        return name, description, label

    def _email(self, pid: str) -> Optional[str]:
        roll = self.rng.random()
        if roll < 0.1:
            return None
        if roll < 0.4:
            return f"dev@{self.rng.choice(_SHARED_DOMAINS)}"
        return f"contact@{pid}.dev.test"

    def build(self) -> GroundTruth:
        spec, rng = self.spec, self.rng
        width = max(3, len(str(max(spec.plugin_count - 1, 0))))
        ids = [f"p{i:0{width}d}" for i in range(spec.plugin_count)]

        for pid in ids:
            name, description, label = self._listing_text(pid)
            self.plugins.append(_Plugin(pid, name, description, label, FetchStatus.SERVER_ERROR,
                                        email=self._email(pid)))
        by_id = {p.pid: p for p in self.plugins}

        order = ids[:]
        rng.shuffle(order)
        groups = self._split(order, [
            (FetchStatus.ACCESSIBLE_RELEVANT, spec.e1),
            (FetchStatus.SHARE_PLATFORM_HOSTED, spec.share_platform_count),
            (FetchStatus.TIMEOUT, spec.timeout_count),
            (FetchStatus.ACCESSIBLE_UNRELATED, spec.unrelated_page_count),
            (FetchStatus.NO_LEGAL_URL, spec.no_legal_url_count),
        ])
        for status, members in groups.items():
            for pid in members:
                by_id[pid].fetch_status = status
        leaked = groups[FetchStatus.ACCESSIBLE_RELEVANT]

        self._assign_regions(ids, by_id)
        self._assign_api_roles(leaked, by_id)
        self._assign_consistency(leaked, by_id)
        self._assign_legal(order, groups, by_id)

        for p in self.plugins:
            self._emit_plugin(p)
        self._emit_store()
        return self._truth()

    @staticmethod
    def _split(order: List[str], sizes: List[Tuple[FetchStatus, int]]) -> Dict[FetchStatus, List[str]]:
        groups: Dict[FetchStatus, List[str]] = {}
        start = 0
        for status, n in sizes:
            groups[status] = order[start:start + n]
            start += n
        groups[FetchStatus.SERVER_ERROR] = order[start:]
        return groups

    def _assign_regions(self, ids: List[str], by_id: Dict[str, _Plugin]) -> None:
        rng = self.rng
        for pid in sorted(rng.sample(ids, self.spec.region_count)):
            p = by_id[pid]
            picked = rng.sample(_COUNTRIES, 2 if rng.random() < 0.25 else 1)
            p.regions = tuple(sorted(picked))
            p.description += f" Made for {' and '.join(picked)} users."

    def _assign_api_roles(self, leaked: List[str], by_id: Dict[str, _Plugin]) -> None:
        spec, rng = self.spec, self.rng
        roles = ([OPEN] * spec.e3 + [AUTH_OPEN] * spec.e4 + [TOKEN_GATED] * spec.e5
                 + [UNSTABLE] * spec.unstable_endpoint_count)
        roles += [QUIET] * (len(leaked) - len(roles))
        quiet_ids = [pid for pid, role in zip(leaked, roles) if role == QUIET]
        if spec.multi_auth_count is None:
            quiet_auth = len(quiet_ids) // 2
        else:
            quiet_auth = spec.multi_auth_count - spec.e4 - spec.e5

        for i, (pid, role) in enumerate(zip(leaked, roles)):
            p = by_id[pid]
            p.role = role
            if role == AUTH_OPEN:
                if i % 2:
                    p.auth_type = "oauth"
                else:
                    p.auth_type, p.token = "service_http", self._token()
            elif role == TOKEN_GATED:
                p.auth_type, p.token = "service_http", self._token()

        for j, pid in enumerate(quiet_ids):
            p = by_id[pid]
            if j < quiet_auth:
                if j % 2:
                    p.auth_type = "oauth"
                else:
                    p.auth_type, p.token = "service_http", self._token()
                p.behaviour = "locked"
            else:
                p.behaviour = _QUIET_BEHAVIOURS[j % len(_QUIET_BEHAVIOURS)]
        logger.debug("api roles: %s", {r: roles.count(r) for r in sorted(set(roles))})

    def _token(self) -> str:
        return f"t{self.rng.getrandbits(64):016x}"

    def _assign_consistency(self, leaked: List[str], by_id: Dict[str, _Plugin]) -> None:
        spec = self.spec
        chosen = self.rng.sample(leaked, spec.e2)
        flagged = (["NameMismatch"] * spec.e2_name + ["DescriptionMismatch"] * spec.e2_desc
                   + ["LegalUrlMismatch"] * spec.e2_legal)
        for pid, flag in zip(chosen, flagged):
            by_id[pid].flags.append(flag)

    def _assign_legal(self, order: List[str], groups: Dict[FetchStatus, List[str]], by_id: Dict[str, _Plugin]) -> None:
        spec, rng = self.spec, self.rng
        forced_inaccessible = groups[FetchStatus.TIMEOUT] + groups[FetchStatus.NO_LEGAL_URL]
        forced_unrelated = groups[FetchStatus.ACCESSIBLE_UNRELATED]
        pinned = set(forced_inaccessible) | set(forced_unrelated)
        pool = [pid for pid in order if pid not in pinned]
        rng.shuffle(pool)

        plan: List[Tuple[str, List[str]]] = []
        take = 0
        for category, n in (
            (INACCESSIBLE, spec.legal_inaccessible - len(forced_inaccessible)),
            (LegalDocCategory.UNRELATED.value, spec.legal_unrelated - len(forced_unrelated)),
            (LegalDocCategory.TERMS_OF_SERVICE.value, spec.legal_tos),
            (LegalDocCategory.PRIVACY_POLICY.value, spec.legal_privacy),
            (LegalDocCategory.OTHER_LEGAL.value, spec.legal_other),
        ):
            plan.append((category, pool[take:take + n]))
            take += n
        plan.append((INACCESSIBLE, forced_inaccessible))
        plan.append((LegalDocCategory.UNRELATED.value, forced_unrelated))
        for category, members in plan:
            for pid in members:
                by_id[pid].legal_category = category

        share = groups[FetchStatus.SHARE_PLATFORM_HOSTED]
        for i, pid in enumerate(share):
            by_id[pid].share_platform = "github" if i % 2 == 0 else "google_drive"

    # -- documents -------------------------------------------------------

    def _legal_path(self, p: _Plugin) -> str:
        if p.share_platform == "github":
            return f"/pluginlab-{p.pid}/{p.pid}-plugin/blob/main/TERMS.md"
        if p.share_platform == "google_drive":
            return f"/file/d/{p.pid}doc/view"
        if p.fetch_status is FetchStatus.ACCESSIBLE_UNRELATED:
            return "/"
        return {
            LegalDocCategory.TERMS_OF_SERVICE.value: "/terms",
            LegalDocCategory.PRIVACY_POLICY.value: "/privacy",
            LegalDocCategory.UNRELATED.value: "/about",
        }.get(p.legal_category, "/legal")

    def _legal_host(self, p: _Plugin) -> str:
        if p.share_platform == "github":
            return GITHUB_HOST
        if p.share_platform == "google_drive":
            return DRIVE_HOST
        return p.host

    def _host(self, host: str) -> Dict[str, Any]:
        return self.hosts.setdefault(host, {"drop": False, "fallback": NOT_FOUND, "routes": {}})

    def _route(self, host: str, method: str, path: str, replies: List[Dict[str, Any]],
               token: Optional[str] = None, token_replies: Optional[List[Dict[str, Any]]] = None) -> None:
        route: Dict[str, Any] = {"replies": replies}
        if token is not None:
            route["token"] = token
            route["token_replies"] = token_replies or []
        self._host(host)["routes"][f"{method} {path}"] = route

    def _write(self, rel: str, text: str) -> str:
        self.files[rel] = text
        return rel

    def _legal_page(self, p: _Plugin) -> str:
        rng = self.rng
        heading = {
            LegalDocCategory.TERMS_OF_SERVICE.value: "Terms of Service",
            LegalDocCategory.PRIVACY_POLICY.value: "Privacy Policy",
        }.get(p.legal_category) or rng.choice(_OTHER_HEADINGS)
        # every seed shows up somewhere in the store
        anchor = DEFAULT_SEEDS[self._legal_page_index % len(DEFAULT_SEEDS)]
        self._legal_page_index += 1
        extra = rng.sample([s for s in DEFAULT_SEEDS if s != anchor], rng.randint(1, 4))
        seeds = tuple(s for s in DEFAULT_SEEDS if s == anchor or s in extra)
        p.legal_seeds = seeds
        paragraphs = "\n".join(
            f"<p>Section {i}. This clause covers {seed} for every account holder of {p.name}.</p>"
            for i, seed in enumerate(sorted(seeds, key=lambda s: rng.random()), start=1)
        )
        return _page(f"{heading} - {p.name}", f"<header><h1>{heading}</h1></header>\n<main>\n{paragraphs}\n</main>")

    @staticmethod
    def _homepage(p: _Plugin) -> str:
        return _page(
            p.name,
            "<main>\n"
            f"<h2>Welcome to {p.name}</h2>\n"
            "<p>We make friendly software for small teams.</p>\n"
            "<p>Read the blog or browse the gallery.</p>\n"
            "</main>",
        )

    def _emit_plugin(self, p: _Plugin) -> None:
        if p.fetch_status is FetchStatus.NO_LEGAL_URL:
            return
        legal_host = self._legal_host(p)
        p.legal_url = f"http://{legal_host}{self._legal_path(p)}"

        if p.fetch_status is FetchStatus.TIMEOUT:
            self._host(p.host)["drop"] = True
            return

        self._emit_legal(p, legal_host)
        if p.fetch_status is FetchStatus.ACCESSIBLE_UNRELATED:
            home = self._write(f"pages/{p.pid}-home.html", self._homepage(p))
            self._host(p.host)["fallback"] = _reply(200, file=home, content_type=HTML)
        elif p.fetch_status is FetchStatus.SERVER_ERROR:
            status = self.rng.choice((404, 500, 503))
            if status != 404:
                for path in ("/.well-known/ai-plugin.json", "/.well-known"):
                    self._route(p.host, "GET", path, [_reply(status, body="upstream failure")])
        elif p.fetch_status is FetchStatus.ACCESSIBLE_RELEVANT:
            self._emit_manifest(p)

    def _emit_legal(self, p: _Plugin, legal_host: str) -> None:
        path = self._legal_path(p)
        if p.legal_category == INACCESSIBLE:
            self._host(legal_host)
            if self.rng.random() < 0.25:
                self._route(legal_host, "GET", path, [_reply(500, body="upstream failure")])
            return
        if p.fetch_status is FetchStatus.ACCESSIBLE_UNRELATED:
            return
        if p.legal_category == LegalDocCategory.UNRELATED.value:
            page = self._write(f"pages/{p.pid}-about.html", self._homepage(p))
        else:
            page = self._write(f"pages/{p.pid}-legal.html", self._legal_page(p))
        self._route(legal_host, "GET", path, [_reply(200, file=page, content_type=HTML)])
        if "LegalUrlMismatch" in p.flags:
            self._route(legal_host, "GET", _mismatch_path(path), [_reply(200, file=page, content_type=HTML)])

    def _emit_manifest(self, p: _Plugin) -> None:
        rng = self.rng
        yaml_doc = rng.random() < 0.5
        api_name = f"openapi.{'yaml' if yaml_doc else 'json'}"
        name = NAME_PREFIX + p.name.replace(" ", "_") if "NameMismatch" in p.flags else p.name
        description = p.description
        if "DescriptionMismatch" in p.flags:
            description = " ".join(rng.sample(_FOREIGN_WORDS, 4)).capitalize() + "."
        legal_url = p.legal_url
        if "LegalUrlMismatch" in p.flags:
            legal_url = f"http://{self._legal_host(p)}{_mismatch_path(self._legal_path(p))}"

        auth: Dict[str, Any] = {"type": p.auth_type}
        if p.auth_type == "service_http":
            auth["authorization_type"] = "bearer"
            auth["verification_tokens"] = {"openai": p.token}
        elif p.auth_type == "oauth":
            auth.update({
                "client_url": f"{p.origin}/oauth/authorize",
                "authorization_url": f"{p.origin}/oauth/token",
                "scope": "read",
            })

        manifest = {
            "schema_version": "v1",
            "name_for_human": name,
            "name_for_model": p.name.lower().replace(" ", "_"),
            "description_for_human": description,
            "description_for_model": f"Plugin for {p.name}. {p.description}",
            "auth": auth,
            "api": {"type": "openapi", "url": f"{p.origin}/{api_name}"},
            "logo_url": f"{p.origin}/logo.png",
            "contact_email": p.email or f"support@{p.host}",
            "legal_info_url": legal_url,
        }
        mf = self._write(f"manifests/{p.pid}.json", json.dumps(manifest, indent=2) + "\n")
        manifest_reply = _reply(200, file=mf, content_type=JSON)
        if rng.random() < 0.2:
            # only the bare /.well-known location answers
            self._route(p.host, "GET", "/.well-known", [manifest_reply])
        else:
            self._route(p.host, "GET", "/.well-known/ai-plugin.json", [manifest_reply])

        doc = self._api_document(p)
        text = yaml.safe_dump(doc, sort_keys=False) if yaml_doc else json.dumps(doc, indent=2) + "\n"
        api_file = self._write(f"apis/{p.pid}.{'yaml' if yaml_doc else 'json'}", text)
        self._route(p.host, "GET", f"/{api_name}", [_reply(200, file=api_file, content_type=YAML if yaml_doc else JSON)])

    def _api_document(self, p: _Plugin) -> Dict[str, Any]:
        rng = self.rng
        resource = rng.choice(_RESOURCES)
        paths: Dict[str, Any] = {
            f"/{resource}": {
                "get": {
                    "operationId": f"get_{resource}",
                    "parameters": [
                        {"name": "q", "in": "query", "required": True, "schema": {"type": "string"}},
                        {"name": "limit", "in": "query", "required": False, "schema": {"type": "integer"}},
                    ],
                    "responses": {"200": {"description": "matching entries"}},
                }
            }
        }
        echo = json.dumps({"items": [{"id": 1, "title": "sample entry"}], "query": {"q": "test"},
                           "source": p.pid}, sort_keys=True)
        self._emit_endpoint(p, f"/v1/{resource}", echo)

        if p.role == OPEN and rng.random() < 0.4:
            paths["/status"] = {"get": {"operationId": "status", "responses": {"200": {"description": "health"}}}}
            self._route(p.host, "GET", "/v1/status", [_reply(200, body=rng.choice(MEANINGLESS_BODIES))])
        if rng.random() < 0.3:
            paths[f"/{resource}/{{item_id}}"] = {
                "delete": {"operationId": f"delete_{resource}", "responses": {"204": {"description": "removed"}}}
            }
        if rng.random() < 0.2:
            paths["/notes"] = {
                "post": {
                    "operationId": "add_note",
                    "requestBody": {
                        "required": True,
                        "content": {"application/json": {"schema": {
                            "type": "object",
                            "properties": {"title": {"type": "string"}},
                            "required": ["title"],
                        }}},
                    },
                    "responses": {"201": {"description": "created"}},
                }
            }

        doc: Dict[str, Any] = {
            "openapi": "3.0.1",
            "info": {"title": p.name, "version": "1.0"},
            "servers": [{"url": "/v1"}],
            "paths": paths,
        }
        if p.auth_type != "none":
            doc["components"] = {"securitySchemes": {"bearer": {"type": "http", "scheme": "bearer"}}}
            doc["security"] = [{"bearer": []}]
        return doc

    def _emit_endpoint(self, p: _Plugin, path: str, echo: str) -> None:
        valid = _reply(200, body=echo, content_type=JSON)
        denied = _reply(401, body="unauthorized")
        if p.role in (OPEN, AUTH_OPEN):
            self._route(p.host, "GET", path, [valid])
        elif p.role == TOKEN_GATED:
            self._route(p.host, "GET", path, [denied], token=p.token, token_replies=[valid])
        elif p.role == UNSTABLE:
            self._route(p.host, "GET", path, [NOT_FOUND, valid, valid])
        elif p.behaviour == "locked":
            if p.token:
                self._route(p.host, "GET", path, [denied], token=p.token,
                            token_replies=[_reply(403, body="forbidden")])
            else:
                self._route(p.host, "GET", path, [denied])
        elif p.behaviour == "meaningless":
            self._route(p.host, "GET", path, [_reply(200, body=self.rng.choice(MEANINGLESS_BODIES))])
        elif p.behaviour == "ratelimited":
            self._route(p.host, "GET", path, [_reply(429, body="Too many requests")])
        elif p.behaviour == "client":
            self._route(p.host, "GET", path, [_reply(400, body="missing parameter")])
        else:
            self._route(p.host, "GET", path, [_reply(500, body="Internal failure")])

    def _emit_store(self) -> None:
        lines = []
        for p in self.plugins:
            lines.append(json.dumps({
                "plugin_id": p.pid,
                "name": p.name,
                "description": p.description,
                "legal_url": p.legal_url,
                "contact_email": p.email,
            }, ensure_ascii=False))
        snapshot = "\n".join(lines) + ("\n" if lines else "")
        self._write(SNAPSHOT_FILE, snapshot)
        self._route(STORE_HOST, "GET", f"/{SNAPSHOT_FILE}",
                    [_reply(200, file=SNAPSHOT_FILE, content_type="application/x-ndjson")])

    def _truth(self) -> GroundTruth:
        plugins = {}
        for p in self.plugins:
            leaked = p.fetch_status is FetchStatus.ACCESSIBLE_RELEVANT
            plugins[p.pid] = PluginTruth(
                plugin_id=p.pid,
                exposures={
                    "e1": leaked,
                    "e2": leaked and bool(p.flags),
                    "e3": p.role == OPEN,
                    "e4": p.role == AUTH_OPEN,
                    "e5": p.role == TOKEN_GATED,
                },
                fetch_status=p.fetch_status.value,
                legal_category=p.legal_category,
                category=p.category,
                regions=p.regions,
                share_platform=p.share_platform,
                consistency_flags=tuple(sorted(p.flags)),
                legal_seeds=p.legal_seeds,
                unstable=p.role == UNSTABLE,
            )
        return GroundTruth(plugins)


def _mismatch_path(path: str) -> str:
    return path.rstrip("/") + "-copy"


def _page(title: str, body: str) -> str:
    return (
        "<!doctype html>\n<html>\n"
        f"<head><title>{title}</title></head>\n"
        "<body>\n"
        '<nav><a href="/">Home</a> <a href="/privacy">Privacy</a> <a href="/terms">Terms</a></nav>\n'
        f"{body}\n"
        "<footer>Privacy Policy | Cookie Collection | Opt-Out | Contact</footer>\n"
        "</body>\n</html>\n"
    )


def generate_store(spec: FixtureSpec, out_dir: str | Path) -> Tuple[Path, GroundTruth]:
    """Write a store for `spec` into `out_dir` and return it with its ground truth.

    Raises UnsatisfiableSpec (from `FixtureSpec`) before anything is written.
    """
    spec.validate()
    out = Path(out_dir)
    builder = _Builder(spec, out)
    truth = builder.build()

    out.mkdir(parents=True, exist_ok=True)
    for sub in ("manifests", "apis", "pages"):
        shutil.rmtree(out / sub, ignore_errors=True)
        (out / sub).mkdir()
    for rel, text in sorted(builder.files.items()):
        (out / rel).write_text(text, encoding="utf-8", newline="\n")

    routes = {"hosts": {h: builder.hosts[h] for h in sorted(builder.hosts)}}
    (out / ROUTES_FILE).write_text(json.dumps(routes, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")
    (out / TRUTH_FILE).write_text(json.dumps(truth.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")
    (out / SPEC_FILE).write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")

    logger.info(
        "generated fixture store in %s: %d plugins, exposures %s",
        out,
        spec.plugin_count,
        truth.counts(),
    )
    return out, truth


def load_truth(store_dir: str | Path) -> GroundTruth:
    data = json.loads((Path(store_dir) / TRUTH_FILE).read_text(encoding="utf-8"))
    return GroundTruth.from_dict(data)
