from typing import List
from urllib.parse import urlsplit

from modules.errors import InvalidUrl

MANIFEST_PATH = "/.well-known/ai-plugin.json"
WELL_KNOWN_PATH = "/.well-known"


def origin_of(url: str) -> str:
    """scheme://host[:port] of an absolute http(s) URL, userinfo/path/query/fragment stripped."""
    try:
        parts = urlsplit(url)
        port = parts.port
    except (ValueError, TypeError) as e:
        raise InvalidUrl(str(url), str(e)) from e
    if parts.scheme not in ("http", "https") or not parts.hostname:
        raise InvalidUrl(str(url))
    host = parts.hostname
    if ":" in host:
        host = f"[{host}]"
    return f"{parts.scheme}://{host}" + (f":{port}" if port is not None else "")


def derive_manifest_urls(legal_url: str) -> List[str]:
    """Swap everything after the origin of a legal-document URL for the manifest locations."""
    origin = origin_of(legal_url)
    return [origin + MANIFEST_PATH, origin + WELL_KNOWN_PATH]
