import math
import re
from collections import Counter
from typing import Mapping
from urllib.parse import urlsplit, urlunsplit

from modules.errors import InvalidUrl

_SPLIT_RE = re.compile(r"[^0-9a-z]+")
_DEFAULT_PORTS = {"http": 80, "https": 443}


def text_vector(text: str) -> Counter:
    """Lower-cased alphanumeric unigram counts. `_`, `-`, spaces all split."""
    return Counter(t for t in _SPLIT_RE.split((text or "").lower()) if t)


def cosine_similarity(a: Mapping[str, int], b: Mapping[str, int]) -> float:
    """dot(a, b) / (|a| |b|); two empty vectors are identical, one empty one is not."""
    if not a or not b:
        return 1.0 if not a and not b else 0.0
    if len(a) > len(b):
        a, b = b, a
    dot = sum(count * b.get(term, 0) for term, count in a.items())
    norm = math.sqrt(sum(c * c for c in a.values())) * math.sqrt(sum(c * c for c in b.values()))
    if norm == 0:
        return 0.0
    # float noise can push identical vectors a hair past 1
    return max(0.0, min(1.0, dot / norm))


def normalize_url(url: str) -> str:
    try:
        parts = urlsplit(url.strip())
        port = parts.port
    except (ValueError, AttributeError) as e:
        raise InvalidUrl(str(url), str(e)) from e
    if not parts.scheme or not parts.hostname:
        raise InvalidUrl(url)
    scheme = parts.scheme.lower()
    host = parts.hostname.lower()
    if ":" in host:
        host = f"[{host}]"
    if port is not None and port != _DEFAULT_PORTS.get(scheme):
        host = f"{host}:{port}"
    path = parts.path.rstrip("/")
    return urlunsplit((scheme, host, path, parts.query, ""))


def urls_match(user_url: str, manifest_url: str) -> bool:
    return normalize_url(user_url) == normalize_url(manifest_url)
