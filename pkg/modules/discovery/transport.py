"""Outbound HTTP shared by discovery, probing and legal-document fetching.

One `httpx.Client` per vantage (direct, or one per configured proxy), a shared
per-host rate limiter, and tenacity-driven retries for idempotent GETs.
"""
from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple
from urllib.parse import urlsplit

import httpx
from tenacity import (
    Retrying,
    retry_if_exception,
    retry_if_result,
    stop_after_attempt,
    wait_exponential,
)

from modules.errors import PreconditionViolation, TransportError
from modules.logger import get_logger

logger = get_logger(__name__)

DEFAULT_USER_AGENT = "plugaudit/0.1 (+exposure assessment; read-only)"


@dataclass(frozen=True)
class FetchPolicy:
    timeout: float = 15.0
    attempts: int = 3
    per_host_interval: float = 1.0
    user_agent: str = DEFAULT_USER_AGENT
    # first retry waits this long, then doubles
    backoff_initial: float = 1.0
    max_body_bytes: int = 5 * 1024 * 1024

    def __post_init__(self):
        if self.attempts < 1:
            raise PreconditionViolation("FetchPolicy.attempts must be >= 1")
        if self.timeout <= 0:
            raise PreconditionViolation("FetchPolicy.timeout must be > 0")
        if self.per_host_interval < 0:
            raise PreconditionViolation("FetchPolicy.per_host_interval must be >= 0")
        if self.backoff_initial < 0:
            raise PreconditionViolation("FetchPolicy.backoff_initial must be >= 0")
        if self.max_body_bytes < 1:
            raise PreconditionViolation("FetchPolicy.max_body_bytes must be >= 1")


@dataclass(frozen=True)
class TransportResponse:
    url: str
    status: int
    text: str
    headers: Dict[str, str] = field(default_factory=dict)
    elapsed: float = 0.0
    truncated: bool = False

    @property
    def ok(self) -> bool:
        return 200 <= self.status < 300


class HostRateLimiter:
    """Keeps requests to one host at least `interval` seconds apart.

    Callers for the same host queue on that host's lock and the next one is
    timed from when the previous one actually left, so an oversleeping thread
    can never be overtaken. Different hosts never wait on each other.
    """

    def __init__(
        self,
        interval: float,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.interval = interval
        self._clock = clock
        self._sleep = sleep
        self._last_sent: Dict[str, float] = {}
        self._host_locks: Dict[str, threading.Lock] = {}
        self._lock = threading.Lock()

    def acquire(self, host: str) -> float:
        """Block until `host` may be contacted; returns the release time."""
        with self._lock:
            host_lock = self._host_locks.setdefault(host, threading.Lock())
        with host_lock:
            now = self._clock()
            last = self._last_sent.get(host)
            slot = now if last is None else max(now, last + self.interval)
            if slot > now:
                self._sleep(slot - now)
            released = max(slot, self._clock())
            self._last_sent[host] = released
        return released


def host_of(url: str) -> str:
    parts = urlsplit(url)
    host = (parts.hostname or "").lower()
    return f"{host}:{parts.port}" if parts.port else host


def _read_capped(resp: httpx.Response, limit: int) -> Tuple[bytes, bool]:
    chunks: List[bytes] = []
    size = 0
    for chunk in resp.iter_bytes():
        if size + len(chunk) > limit:
            chunks.append(chunk[: limit - size])
            return b"".join(chunks), True
        chunks.append(chunk)
        size += len(chunk)
    return b"".join(chunks), False


def _worth_retrying(exc: BaseException) -> bool:
    # a URL that cannot be sent will not get better
    return isinstance(exc, TransportError) and not isinstance(exc.cause, (ValueError, httpx.InvalidURL))


class HttpTransport:
    def __init__(
        self,
        policy: FetchPolicy,
        proxies: Optional[Sequence[str]] = None,
        limiter: Optional[HostRateLimiter] = None,
        transport: Optional[httpx.BaseTransport] = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.policy = policy
        self.limiter = limiter or HostRateLimiter(policy.per_host_interval, sleep=sleep)
        self._sleep = sleep
        self.proxies: List[Optional[str]] = list(proxies) if proxies else [None]
        self._clients = [self._make_client(p, transport) for p in self.proxies]

    def _make_client(self, proxy: Optional[str], transport: Optional[httpx.BaseTransport]) -> httpx.Client:
        kwargs: Dict[str, Any] = {
            "timeout": httpx.Timeout(self.policy.timeout),
            "headers": {"User-Agent": self.policy.user_agent},
            "follow_redirects": False,
        }
        if transport is not None:
            kwargs["transport"] = transport
        elif proxy:
            kwargs["proxy"] = proxy
        return httpx.Client(**kwargs)

    @property
    def vantages(self) -> int:
        return len(self._clients)

    def request(
        self,
        method: str,
        url: str,
        *,
        headers: Optional[Dict[str, str]] = None,
        json_body: Any = None,
        vantage: int = 0,
    ) -> TransportResponse:
        """Send exactly one request. Raises TransportError when nothing comes back.

        At most `policy.max_body_bytes` of the body are read; the rest is dropped.
        """
        client = self._clients[vantage % len(self._clients)]
        try:
            host = host_of(url)
        except ValueError as e:
            raise TransportError(url, e) from e
        self.limiter.acquire(host)
        started = time.monotonic()
        try:
            kwargs: Dict[str, Any] = {"headers": headers or {}}
            if json_body is not None:
                kwargs["json"] = json_body
            with client.stream(method, url, **kwargs) as resp:
                body, truncated = _read_capped(resp, self.policy.max_body_bytes)
                encoding = resp.encoding or "utf-8"
        except (httpx.HTTPError, httpx.InvalidURL, httpx.StreamError) as e:
            logger.debug("%s %s failed: %s", method, url, type(e).__name__)
            raise TransportError(url, e) from e
        elapsed = time.monotonic() - started
        if truncated:
            logger.warning("%s %s: body cut at %d bytes", method, url, self.policy.max_body_bytes)
        logger.debug("%s %s -> %d (%.3fs)", method, url, resp.status_code, elapsed)
        return TransportResponse(
            url=url,
            status=resp.status_code,
            text=body.decode(encoding, errors="replace"),
            headers={k.lower(): v for k, v in resp.headers.items()},
            elapsed=elapsed,
            truncated=truncated,
        )

    def get(self, url: str, policy: Optional[FetchPolicy] = None, headers: Optional[Dict[str, str]] = None) -> TransportResponse:
        """GET with retries on transport failures and 5xx; the last response is returned as-is.

        Raises TransportError if every attempt went unanswered.
        """
        policy = policy or self.policy
        retryer = Retrying(
            stop=stop_after_attempt(policy.attempts),
            wait=wait_exponential(multiplier=policy.backoff_initial, exp_base=2),
            retry=retry_if_exception(_worth_retrying) | retry_if_result(lambda r: r.status >= 500),
            retry_error_callback=lambda state: state.outcome.result(),
            sleep=self._sleep,
            reraise=True,
        )
        return retryer(self.request, "GET", url, headers=headers)

    def close(self) -> None:
        for c in self._clients:
            try:
                c.close()
            except Exception:
                pass

    def __enter__(self) -> "HttpTransport":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
