from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Tuple
from urllib.parse import urlsplit

from modules.errors import InvalidUrl, PreconditionViolation

if TYPE_CHECKING:
    from modules.probe.responses import ProbeResponse


PARAM_LOCATIONS = ("path", "query", "header", "body")
SCHEMA_TYPES = ("string", "integer", "number", "boolean", "array", "object")

_PLACEHOLDER_RE = re.compile(r"\{([^{}]+)\}")


def is_absolute_http_url(url: str | None) -> bool:
    if not isinstance(url, str) or not url:
        return False
    try:
        parts = urlsplit(url)
    except ValueError:
        return False
    return parts.scheme in ("http", "https") and bool(parts.hostname)


@dataclass(frozen=True)
class StoreListing:
    """What the store shows a user about a plugin (name, legal link, description)."""
    plugin_id: str
    name: str
    legal_url: Optional[str] = None
    description: str = ""
    contact_email: Optional[str] = None
    category: Optional[str] = None
    logo_ref: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.plugin_id, str) or not self.plugin_id.strip():
            raise PreconditionViolation("StoreListing.plugin_id must be a non-empty string")
        if self.legal_url is not None and not is_absolute_http_url(self.legal_url):
            raise InvalidUrl(self.legal_url)

    @property
    def email_domain(self) -> Optional[str]:
        if not self.contact_email or "@" not in self.contact_email:
            return None
        return self.contact_email.rsplit("@", 1)[1].strip().lower() or None

    def to_record(self) -> Dict[str, Any]:
        rec: Dict[str, Any] = {
            "plugin_id": self.plugin_id,
            "name": self.name,
            "description": self.description,
            "legal_url": self.legal_url,
            "contact_email": self.contact_email,
        }
        if self.category is not None:
            rec["category"] = self.category
        if self.logo_ref is not None:
            rec["logo_ref"] = self.logo_ref
        return rec

    @classmethod
    def from_record(cls, rec: Dict[str, Any]) -> "StoreListing":
        return cls(
            plugin_id=rec.get("plugin_id"),
            name=rec.get("name") or "",
            legal_url=rec.get("legal_url") or None,
            description=rec.get("description") or "",
            contact_email=rec.get("contact_email") or None,
            category=rec.get("category"),
            logo_ref=rec.get("logo_ref"),
        )


@dataclass(frozen=True)
class ManifestData:
    """The manifest a developer submitted to the platform.

    `multi_auth` is True whenever the declared auth type is anything other than
    "none"; a verification token can only exist alongside it.
    """
    name: str
    api_url: str
    multi_auth: bool
    description: str = ""
    legal_url: Optional[str] = None
    token: Optional[str] = None
    auth_type: str = "none"
    raw_fields: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.multi_auth and self.token is not None:
            raise PreconditionViolation("a manifest without extra auth cannot carry a verification token")


@dataclass(frozen=True)
class ManifestFieldPolicy:
    """Which manifest fields the platform requires, and which of those users may see."""
    required: frozenset
    disclosable: frozenset
    hidden: frozenset = None

    def __post_init__(self):
        required = frozenset(self.required)
        disclosable = frozenset(self.disclosable)
        if not disclosable <= required:
            extra = sorted(disclosable - required)
            raise PreconditionViolation(f"disclosable fields not in required set: {extra}")
        hidden = required - disclosable
        if self.hidden is not None and frozenset(self.hidden) != hidden:
            raise PreconditionViolation("hidden must equal required minus disclosable")
        object.__setattr__(self, "required", required)
        object.__setattr__(self, "disclosable", disclosable)
        object.__setattr__(self, "hidden", hidden)

    @classmethod
    def default(cls) -> "ManifestFieldPolicy":
        required = {
            "schema_version",
            "name_for_human",
            "name_for_model",
            "description_for_human",
            "description_for_model",
            "logo_url",
            "contact_email",
            "legal_info_url",
            "api.url",
            "auth",
            "auth.verification_tokens",
        }
        hidden = {"api.url", "auth", "auth.verification_tokens"}
        return cls(required=frozenset(required), disclosable=frozenset(required - hidden))


@dataclass(frozen=True)
class ApiParameter:
    name: str
    location: str
    schema_type: str = "string"
    required: bool = False
    item_type: str = "string"

    def __post_init__(self):
        if self.location not in PARAM_LOCATIONS:
            raise PreconditionViolation(f"unknown parameter location '{self.location}'")


@dataclass(frozen=True)
class ApiEndpoint:
    path: str
    method: str
    parameters: Tuple[ApiParameter, ...] = ()
    auth_hint: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "method", self.method.upper())
        object.__setattr__(self, "parameters", tuple(self.parameters))
        placeholders = set(path_placeholders(self.path))
        for p in self.parameters:
            if p.location == "path" and p.name not in placeholders:
                raise PreconditionViolation(
                    f"path parameter '{p.name}' has no placeholder in '{self.path}'"
                )

    @property
    def key(self) -> str:
        return f"{self.method} {self.path}"

    @property
    def sort_key(self) -> Tuple[str, str]:
        return (self.path, self.method)


def path_placeholders(path: str) -> List[str]:
    return _PLACEHOLDER_RE.findall(path)


@dataclass
class ApiSurface:
    """Every endpoint reachable through one manifest's API link.

    `responses` is keyed by `ApiEndpoint.key` and is filled in by the prober.
    """
    source_url: str
    server_url: str
    endpoints: List[ApiEndpoint] = field(default_factory=list)
    responses: Dict[str, List["ProbeResponse"]] = field(default_factory=dict)

    def __post_init__(self):
        self.endpoints = sorted(self.endpoints, key=lambda e: e.sort_key)

    def endpoint_url(self, endpoint: ApiEndpoint) -> str:
        return self.server_url.rstrip("/") + endpoint.path


@dataclass
class PluginRecord:
    listing: StoreListing
    manifest: Optional[ManifestData] = None
    surface: Optional[ApiSurface] = None

    def __post_init__(self):
        if self.listing is None:
            raise PreconditionViolation("a plugin record always carries its store listing")
        if self.surface is not None and self.manifest is None:
            raise PreconditionViolation("an API surface can only be known through a manifest")

    @property
    def plugin_id(self) -> str:
        return self.listing.plugin_id
