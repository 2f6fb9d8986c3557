# modules/audit/settings.py
from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import platform
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from modules.classifier.categories import CategoryScorer, HttpCategoryScorer, LexicalScorer, load_keyword_table
from modules.classifier.regions import Gazetteer, default_gazetteer, load_gazetteer
from modules.consistency.checker import ConsistencyThresholds
from modules.discovery.transport import DEFAULT_USER_AGENT, FetchPolicy
from modules.errors import PreconditionViolation
from modules.legal.seeds import LegalSeedLibrary, load_seed_library
from modules.logger import get_logger
from modules.probe.responses import InvalidResponseLexicon

logger = get_logger(__name__)

APP_NAME = "plugaudit"  # keep this consistent across the whole app
ENV_PREFIX = "PLUGAUDIT_"
OUTPUT_FORMATS = ("json", "csv", "markdown")

# settings that change what an audit measures; everything else is plumbing
DIGEST_FIELDS = (
    "theta1",
    "theta2",
    "theta3",
    "timeout",
    "attempts",
    "per_host_interval",
    "backoff_initial",
    "max_body_bytes",
    "user_agent",
    "lexicon_path",
    "seed_library_path",
    "keyword_table_path",
    "gazetteer_path",
    "scorer_url",
    "aggressive_methods",
)


def _default_base_data_dir() -> Path:
    """
    Cross-platform default data dir.

    Windows: %LOCALAPPDATA%/plugaudit
    macOS:   ~/Library/Application Support/plugaudit
    Linux:   ~/.local/share/plugaudit
    """
    system = platform.system()
    home = Path.home()

    if system == "Windows":
        root = Path(os.getenv("LOCALAPPDATA", home / "AppData" / "Local"))
    elif system == "Darwin":
        root = Path(os.getenv("XDG_DATA_HOME", home / "Library" / "Application Support"))
    else:
        root = Path(os.getenv("XDG_DATA_HOME", home / ".local" / "share"))

    return root / APP_NAME


def _load_file_config(path: Path) -> Dict[str, Any]:
    if not path.exists():
        return {}
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        logger.warning("ignoring unreadable config file %s: %s", path, e)
        return {}
    if not isinstance(data, dict):
        logger.warning("ignoring config file %s: top level is not an object", path)
        return {}
    return data


def _as_bool(value: Any) -> bool:
    if isinstance(value, str):
        return value.strip().lower() in ("1", "true", "yes", "on")
    return bool(value)


def _as_proxies(value: Any) -> Tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        items = value.split(",")
    else:
        items = list(value)
    return tuple(p.strip() for p in items if p and str(p).strip())


def _optional_str(value: Any) -> Optional[str]:
    if value is None:
        return None
    text = str(value).strip()
    return text or None


@dataclass(frozen=True)
class AuditConfig:
    base_data_dir: Path
    db_path: Path
    runs_dir: Path

    theta1: float = 0.85
    theta2: float = 0.8
    theta3: float = 1.0

    timeout: float = 15.0
    attempts: int = 3
    per_host_interval: float = 1.0
    backoff_initial: float = 1.0
    max_body_bytes: int = 5 * 1024 * 1024
    user_agent: str = DEFAULT_USER_AGENT

    lexicon_path: Optional[str] = None
    seed_library_path: Optional[str] = None
    keyword_table_path: Optional[str] = None
    gazetteer_path: Optional[str] = None
    scorer_url: Optional[str] = None

    proxies: Tuple[str, ...] = ()
    aggressive_methods: bool = False
    workers: int = 8
    output_format: str = "markdown"

    def __post_init__(self):
        if self.workers < 1:
            raise PreconditionViolation("workers must be >= 1")
        if self.output_format not in OUTPUT_FORMATS:
            raise PreconditionViolation(f"output format must be one of {OUTPUT_FORMATS}")
        # both raise PreconditionViolation on bad values
        self.thresholds()
        self.fetch_policy()

    @property
    def config_path(self) -> Path:
        return self.base_data_dir / "config.json"

    def thresholds(self) -> ConsistencyThresholds:
        return ConsistencyThresholds(self.theta1, self.theta2, self.theta3)

    def fetch_policy(self) -> FetchPolicy:
        return FetchPolicy(
            timeout=self.timeout,
            attempts=self.attempts,
            per_host_interval=self.per_host_interval,
            user_agent=self.user_agent,
            backoff_initial=self.backoff_initial,
            max_body_bytes=self.max_body_bytes,
        )

    def lexicon(self) -> InvalidResponseLexicon:
        if not self.lexicon_path:
            return InvalidResponseLexicon()
        lines = Path(self.lexicon_path).read_text(encoding="utf-8").splitlines()
        return InvalidResponseLexicon.from_phrases(l for l in lines if l.strip() and not l.lstrip().startswith("#"))

    def seed_library(self) -> LegalSeedLibrary:
        return load_seed_library(self.seed_library_path)

    def scorer(self) -> CategoryScorer:
        if self.scorer_url:
            return HttpCategoryScorer(self.scorer_url, timeout=self.timeout)
        return LexicalScorer(load_keyword_table(self.keyword_table_path))

    def gazetteer(self) -> Gazetteer:
        return load_gazetteer(self.gazetteer_path) if self.gazetteer_path else default_gazetteer()

    def to_dict(self) -> Dict[str, Any]:
        """Everything but the data-dir locations; this is the config file's shape."""
        out = {}
        for f in dataclasses.fields(self):
            if f.name in ("base_data_dir", "db_path", "runs_dir"):
                continue
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out

    def digest(self) -> str:
        measured = {k: self.to_dict()[k] for k in DIGEST_FIELDS}
        canonical = json.dumps(measured, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def with_overrides(self, **overrides: Any) -> "AuditConfig":
        """Apply command-line flags; None means "flag not given"."""
        given = {k: v for k, v in overrides.items() if v is not None}
        if "proxies" in given:
            given["proxies"] = _as_proxies(given["proxies"])
        return dataclasses.replace(self, **given) if given else self

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_data_dir: Path) -> "AuditConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise PreconditionViolation(f"unknown config keys {unknown}")
        values = dict(data)
        if "proxies" in values:
            values["proxies"] = _as_proxies(values["proxies"])
        values.setdefault("db_path", base_data_dir / "listings.sqlite")
        values.setdefault("runs_dir", base_data_dir / "runs")
        return cls(base_data_dir=base_data_dir, **values)

    def save(self, path: Optional[Path] = None) -> Path:
        path = Path(path or self.config_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


@lru_cache()
def get_settings(config_file: Optional[str] = None) -> AuditConfig:
    # 1) Base dir shared across app
    base_data_dir_env = os.getenv(f"{ENV_PREFIX}DATA_DIR")
    base_data_dir = Path(base_data_dir_env) if base_data_dir_env else _default_base_data_dir()
    base_data_dir.mkdir(parents=True, exist_ok=True)

    # 2) Optional config file
    config_file = config_file or os.getenv(f"{ENV_PREFIX}CONFIG")
    file_cfg = _load_file_config(Path(config_file) if config_file else base_data_dir / "config.json")

    def cfg(key: str, default: Any) -> Any:
        """
        Env var wins, then config file, then default.
        Env keys are the field names upper-cased behind PLUGAUDIT_.
        """
        env_key = f"{ENV_PREFIX}{key.upper()}"
        if env_key in os.environ:
            return os.environ[env_key]
        if key in file_cfg:
            return file_cfg[key]
        return default

    # 3) Defaults
    db_path = Path(cfg("db_path", base_data_dir / "listings.sqlite"))
    runs_dir = Path(cfg("runs_dir", base_data_dir / "runs"))
    runs_dir.mkdir(parents=True, exist_ok=True)

    return AuditConfig(
        base_data_dir=base_data_dir,
        db_path=db_path,
        runs_dir=runs_dir,
        theta1=float(cfg("theta1", 0.85)),
        theta2=float(cfg("theta2", 0.8)),
        theta3=float(cfg("theta3", 1.0)),
        timeout=float(cfg("timeout", 15.0)),
        attempts=int(cfg("attempts", 3)),
        per_host_interval=float(cfg("per_host_interval", 1.0)),
        backoff_initial=float(cfg("backoff_initial", 1.0)),
        max_body_bytes=int(cfg("max_body_bytes", 5 * 1024 * 1024)),
        user_agent=str(cfg("user_agent", DEFAULT_USER_AGENT)),
        lexicon_path=_optional_str(cfg("lexicon_path", None)),
        seed_library_path=_optional_str(cfg("seed_library_path", None)),
        keyword_table_path=_optional_str(cfg("keyword_table_path", None)),
        gazetteer_path=_optional_str(cfg("gazetteer_path", None)),
        scorer_url=_optional_str(cfg("scorer_url", None)),
        proxies=_as_proxies(cfg("proxies", ())),
        aggressive_methods=_as_bool(cfg("aggressive_methods", False)),
        workers=int(cfg("workers", 8)),
        output_format=str(cfg("output_format", "markdown")),
    )
