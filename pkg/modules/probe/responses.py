from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

from modules.errors import PreconditionViolation

EXCERPT_BYTES = 4096

DEFAULT_PATTERNS: Tuple[str, ...] = (
    "service unavailable",
    "server error",
    "no requested privileges",
    "unauthorized",
    "forbidden",
    "invalid api key",
    "not authenticated",
)
DEFAULT_AUTH_PATTERNS: Tuple[str, ...] = (
    "unauthorized",
    "forbidden",
    "invalid api key",
    "not authenticated",
)


class ResponseClass(str, Enum):
    VALID = "Valid"
    INVALID_MEANINGLESS = "InvalidMeaningless"
    UNAUTHORIZED = "Unauthorized"
    CLIENT_ERROR = "ClientError"
    RATE_LIMITED = "RateLimited"
    NETWORK_ERROR = "NetworkError"
    UNSTABLE = "Unstable"


@dataclass(frozen=True)
class InvalidResponseLexicon:
    """Phrases that mark a response as carrying no usable data.

    Phrases also listed in `auth_patterns` mean the caller was turned away.
    """
    patterns: Tuple[str, ...] = DEFAULT_PATTERNS
    auth_patterns: Tuple[str, ...] = DEFAULT_AUTH_PATTERNS

    def __post_init__(self):
        patterns = tuple(p.strip().lower() for p in self.patterns if p and p.strip())
        if not patterns:
            raise PreconditionViolation("the invalid-response lexicon needs at least one phrase")
        auth = tuple(p.strip().lower() for p in self.auth_patterns if p and p.strip())
        object.__setattr__(self, "patterns", patterns)
        object.__setattr__(self, "auth_patterns", tuple(p for p in auth if p in patterns))

    @classmethod
    def from_phrases(cls, phrases: Iterable[str]) -> "InvalidResponseLexicon":
        return cls(patterns=tuple(phrases))

    def matches(self, body: str) -> Tuple[bool, bool]:
        """(any phrase matched, an auth phrase matched)"""
        text = (body or "").lower()
        hit = [p for p in self.patterns if p in text]
        return bool(hit), any(p in self.auth_patterns for p in hit)


def excerpt(body: Optional[str | bytes]) -> str:
    if body is None:
        return ""
    raw = body if isinstance(body, (bytes, bytearray)) else body.encode("utf-8")
    return bytes(raw[:EXCERPT_BYTES]).decode("utf-8", errors="ignore")


def classify_response(
    http_status: Optional[int],
    body: Optional[str],
    lexicon: InvalidResponseLexicon = InvalidResponseLexicon(),
) -> ResponseClass:
    if http_status is None:
        return ResponseClass.NETWORK_ERROR
    if http_status in (401, 403):
        return ResponseClass.UNAUTHORIZED
    if http_status == 429:
        return ResponseClass.RATE_LIMITED

    matched, auth_matched = lexicon.matches(body or "")
    if auth_matched:
        return ResponseClass.UNAUTHORIZED
    if 400 <= http_status < 500:
        return ResponseClass.CLIENT_ERROR
    if 200 <= http_status < 300 and (body or "").strip() and not matched:
        return ResponseClass.VALID
    # 5xx, redirects, empty or lexicon-matched 2xx
    return ResponseClass.INVALID_MEANINGLESS


@dataclass(frozen=True)
class ProbeResponse:
    http_status: Optional[int]
    body_excerpt: str
    latency: float
    vantage: int
    classification: ResponseClass
    token_attached: bool = False

    @classmethod
    def observe(
        cls,
        http_status: Optional[int],
        body: Optional[str],
        latency: float,
        vantage: int,
        lexicon: InvalidResponseLexicon,
        token_attached: bool = False,
    ) -> "ProbeResponse":
        text = excerpt(body)
        return cls(
            http_status=http_status,
            body_excerpt=text,
            latency=latency,
            vantage=vantage,
            classification=classify_response(http_status, text, lexicon),
            token_attached=token_attached,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "http_status": self.http_status,
            "latency": round(self.latency, 4),
            "vantage": self.vantage,
            "classification": self.classification.value,
            "token_attached": self.token_attached,
        }


def aggregate(responses: Sequence[ProbeResponse]) -> ResponseClass:
    """All attempts agree → that kind; any disagreement → Unstable."""
    if not responses:
        raise PreconditionViolation("cannot aggregate zero probe responses")
    kinds = {r.classification for r in responses}
    if len(kinds) == 1:
        return kinds.pop()
    return ResponseClass.UNSTABLE
