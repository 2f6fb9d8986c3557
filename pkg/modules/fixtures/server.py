"""Local HTTP server for a generated store.

It answers as a forward proxy: clients point their HTTP proxy at it and request
absolute URLs on the synthetic hosts. Direct requests fall back to the Host
header. Every request is logged before it is answered.
"""
from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple
from urllib.parse import urlsplit

from modules.errors import PortUnavailable, PreconditionViolation
from modules.fixtures.generator import ROUTES_FILE
from modules.logger import get_logger

logger = get_logger(__name__)

UNKNOWN_HOST = {"status": 502, "content_type": "text/plain; charset=utf-8", "body": "unknown host"}


@dataclass(frozen=True)
class RequestLogEntry:
    timestamp: float
    method: str
    host: str
    path: str
    query: str = ""
    headers: Dict[str, str] = field(default_factory=dict)

    @property
    def bearer(self) -> Optional[str]:
        value = self.headers.get("authorization", "")
        return value[len("Bearer "):] if value.startswith("Bearer ") else None


class RouteTable:
    """Route lookup plus per-script attempt counters.

    A route's replies cycle: attempt n gets reply n modulo the script length,
    counted separately for requests with and without the route's token.
    """

    def __init__(self, store_dir: Path):
        self.store_dir = Path(store_dir)
        path = self.store_dir / ROUTES_FILE
        if not path.exists():
            raise PreconditionViolation(f"{self.store_dir} is not a fixture store (no {ROUTES_FILE})")
        self.hosts: Dict[str, Dict[str, Any]] = json.loads(path.read_text(encoding="utf-8"))["hosts"]
        self._counters: Dict[Tuple[str, str, bool], int] = {}
        self._lock = threading.Lock()
        self._bodies: Dict[str, bytes] = {}

    def drops(self, host: str) -> bool:
        return bool(self.hosts.get(host, {}).get("drop"))

    def resolve(self, method: str, host: str, path: str, bearer: Optional[str]) -> Dict[str, Any]:
        config = self.hosts.get(host)
        if config is None:
            return UNKNOWN_HOST
        key = f"{method} {path}"
        route = config["routes"].get(key)
        if route is None:
            return config["fallback"]

        authorized = route.get("token") is not None and bearer == route["token"]
        replies = route["token_replies"] if authorized else route["replies"]
        with self._lock:
            n = self._counters.get((host, key, authorized), 0)
            self._counters[(host, key, authorized)] = n + 1
        return replies[n % len(replies)]

    def body(self, reply: Dict[str, Any]) -> bytes:
        if "file" not in reply:
            return reply.get("body", "").encode("utf-8")
        rel = reply["file"]
        with self._lock:
            cached = self._bodies.get(rel)
        if cached is None:
            cached = (self.store_dir / rel).read_bytes()
            with self._lock:
                self._bodies[rel] = cached
        return cached


class _FixtureHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: "_FixtureHTTPServer"

    def _target(self) -> Tuple[str, str, str]:
        parts = urlsplit(self.path)
        if parts.scheme and parts.hostname:
            host = parts.hostname.lower()
            if parts.port:
                host = f"{host}:{parts.port}"
            return host, parts.path or "/", parts.query
        host = (self.headers.get("Host") or "").split(":")[0].lower()
        return host, parts.path or "/", parts.query

    def _handle(self) -> None:
        host, path, query = self._target()
        headers = {k.lower(): v for k, v in self.headers.items()}
        entry = RequestLogEntry(time.monotonic(), self.command, host, path, query, headers)
        self.server.fixture.record(entry)

        length = int(self.headers.get("Content-Length") or 0)
        if length:
            self.rfile.read(length)

        routes = self.server.fixture.routes
        if routes.drops(host):
            # no status line at all
            self.close_connection = True
            return

        reply = routes.resolve(self.command, host, path, entry.bearer)
        payload = routes.body(reply)
        self.send_response(reply["status"])
        self.send_header("Content-Type", reply.get("content_type", "text/plain"))
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        if self.command != "HEAD":
            self.wfile.write(payload)

    do_GET = do_POST = do_PUT = do_DELETE = do_PATCH = do_HEAD = do_OPTIONS = _handle

    def log_message(self, format: str, *args: Any) -> None:
        logger.debug("fixture %s - %s", self.address_string(), format % args)


class _FixtureHTTPServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: Tuple[str, int], fixture: "FixtureServer"):
        self.fixture = fixture
        super().__init__(address, _FixtureHandler)


class FixtureServer:
    """Serves one generated store; use as a context manager or start()/stop().

    `port=0` picks a free port; `url` is what clients set as their proxy.
    """

    def __init__(self, store_dir: str | Path, port: int = 0, host: str = "127.0.0.1"):
        self.store_dir = Path(store_dir)
        self.host = host
        self.port = port
        self.routes = RouteTable(self.store_dir)
        self._log: List[RequestLogEntry] = []
        self._log_lock = threading.Lock()
        self._httpd: Optional[_FixtureHTTPServer] = None
        self._thread: Optional[threading.Thread] = None

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def record(self, entry: RequestLogEntry) -> None:
        with self._log_lock:
            self._log.append(entry)

    def requests(self) -> List[RequestLogEntry]:
        with self._log_lock:
            return list(self._log)

    def clear_log(self) -> None:
        with self._log_lock:
            self._log.clear()

    def start(self) -> "FixtureServer":
        if self._httpd is not None:
            return self
        try:
            self._httpd = _FixtureHTTPServer((self.host, self.port), self)
        except OSError as e:
            raise PortUnavailable(self.port, e) from e
        self.port = self._httpd.server_address[1]
        self._thread = threading.Thread(target=self._httpd.serve_forever, name="fixture-server", daemon=True)
        self._thread.start()
        logger.info("fixture server for %s listening on %s", self.store_dir, self.url)
        return self

    def stop(self) -> None:
        if self._httpd is None:
            return
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
        logger.info("fixture server on %s stopped after %d requests", self.url, len(self._log))
        self._httpd = None
        self._thread = None

    def serve_forever(self) -> None:
        """Blocking variant for the command line; returns on KeyboardInterrupt."""
        self.start()
        try:
            while self._thread is not None and self._thread.is_alive():
                self._thread.join(timeout=0.5)
        except KeyboardInterrupt:
            pass
        finally:
            self.stop()

    def __enter__(self) -> "FixtureServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
