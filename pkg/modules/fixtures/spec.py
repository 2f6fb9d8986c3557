from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional, Tuple

from modules.errors import UnsatisfiableSpec

EXPOSURE_KEYS = ("e1", "e2", "e3", "e4", "e5")
INACCESSIBLE = "Inaccessible"


@dataclass(frozen=True)
class FixtureSpec:
    """How many of each situation a generated store contains.

    Fetch outcomes partition the store: `e1` plugins serve a manifest, then come
    share-platform, timeout, unrelated-page and no-legal-url plugins, and the
    remainder answer the manifest paths with an HTTP error. The legal mix is a
    second partition and must add up to `plugin_count`.
    """
    seed: int = 42
    plugin_count: int = 0
    e1: int = 0
    e2_name: int = 0
    e2_desc: int = 0
    e2_legal: int = 0
    e3: int = 0
    e4: int = 0
    e5: int = 0
    share_platform_count: int = 0
    timeout_count: int = 0
    unrelated_page_count: int = 0
    no_legal_url_count: int = 0
    legal_tos: int = 0
    legal_privacy: int = 0
    legal_other: int = 0
    legal_unrelated: int = 0
    legal_inaccessible: int = 0
    unstable_endpoint_count: int = 0
    region_count: int = 0
    # plugins declaring auth beyond the platform login; None lets the generator decide
    multi_auth_count: Optional[int] = None

    def __post_init__(self):
        self.validate()

    @property
    def legal_total(self) -> int:
        return self.legal_tos + self.legal_privacy + self.legal_other + self.legal_unrelated + self.legal_inaccessible

    @property
    def e2(self) -> int:
        return self.e2_name + self.e2_desc + self.e2_legal

    def validate(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "seed" or value is None:
                continue
            if not isinstance(value, int) or value < 0:
                raise UnsatisfiableSpec(f"{f.name} must be a non-negative integer, got {value!r}")

        outcomes = (self.e1 + self.share_platform_count + self.timeout_count
                    + self.unrelated_page_count + self.no_legal_url_count)
        if outcomes > self.plugin_count:
            raise UnsatisfiableSpec(f"fetch outcomes need {outcomes} plugins, store has {self.plugin_count}")
        if self.e2 > self.e1:
            raise UnsatisfiableSpec("e2 injections need a retrievable manifest (e2 <= e1)")
        api_roles = self.e3 + self.e4 + self.e5 + self.unstable_endpoint_count
        if api_roles > self.e1:
            raise UnsatisfiableSpec("e3, e4, e5 and unstable endpoints each need their own manifest plugin")

        needed = self.e4 + self.e5
        if self.multi_auth_count is not None:
            if self.multi_auth_count < needed:
                raise UnsatisfiableSpec(
                    f"e4 and e5 plugins must declare extra auth: need {needed}, multi_auth_count={self.multi_auth_count}"
                )
            if self.multi_auth_count > self.e1 - self.e3 - self.unstable_endpoint_count:
                raise UnsatisfiableSpec("more multi-auth plugins than manifest plugins free to declare auth")

        if self.legal_total != self.plugin_count:
            raise UnsatisfiableSpec(f"legal mix sums to {self.legal_total}, store has {self.plugin_count}")
        if self.legal_inaccessible < self.timeout_count + self.no_legal_url_count:
            raise UnsatisfiableSpec("timeout and no-legal-url plugins cannot have an accessible legal page")
        if self.legal_unrelated < self.unrelated_page_count:
            raise UnsatisfiableSpec("unrelated-page plugins link their homepage, which is an unrelated legal page")
        if self.region_count > self.plugin_count:
            raise UnsatisfiableSpec("region_count exceeds plugin_count")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FixtureSpec":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise UnsatisfiableSpec(f"unknown fixture spec fields {unknown}")
        return cls(**data)


def criterion_spec(seed: int = 42) -> FixtureSpec:
    """The 200-plugin store the end-to-end suite audits."""
    return FixtureSpec(
        seed=seed,
        plugin_count=200,
        e1=60,
        e2_name=10,
        e2_desc=5,
        e2_legal=5,
        e3=30,
        e4=10,
        e5=5,
        share_platform_count=8,
        timeout_count=6,
        unrelated_page_count=15,
        legal_tos=60,
        legal_privacy=30,
        legal_other=20,
        legal_unrelated=40,
        legal_inaccessible=50,
        unstable_endpoint_count=4,
        region_count=24,
    )


@dataclass(frozen=True)
class PluginTruth:
    plugin_id: str
    exposures: Dict[str, bool]
    fetch_status: str
    legal_category: str
    category: str
    regions: Tuple[str, ...] = ()
    share_platform: Optional[str] = None
    consistency_flags: Tuple[str, ...] = ()
    legal_seeds: Tuple[str, ...] = ()
    unstable: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "plugin_id": self.plugin_id,
            "exposures": {k: bool(self.exposures.get(k, False)) for k in EXPOSURE_KEYS},
            "fetch_status": self.fetch_status,
            "legal_category": self.legal_category,
            "category": self.category,
            "regions": list(self.regions),
            "share_platform": self.share_platform,
            "consistency_flags": list(self.consistency_flags),
            "legal_seeds": list(self.legal_seeds),
            "unstable": self.unstable,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PluginTruth":
        return cls(
            plugin_id=data["plugin_id"],
            exposures={k: bool(data["exposures"].get(k, False)) for k in EXPOSURE_KEYS},
            fetch_status=data["fetch_status"],
            legal_category=data["legal_category"],
            category=data["category"],
            regions=tuple(data.get("regions") or ()),
            share_platform=data.get("share_platform"),
            consistency_flags=tuple(data.get("consistency_flags") or ()),
            legal_seeds=tuple(data.get("legal_seeds") or ()),
            unstable=bool(data.get("unstable", False)),
        )


@dataclass(frozen=True)
class GroundTruth:
    """What an audit of the generated store must find, plugin by plugin."""
    plugins: Dict[str, PluginTruth] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.plugins)

    def ids_with(self, exposure: str) -> List[str]:
        return sorted(pid for pid, t in self.plugins.items() if t.exposures.get(exposure))

    def counts(self) -> Dict[str, int]:
        return {k: len(self.ids_with(k)) for k in EXPOSURE_KEYS}

    def to_dict(self) -> Dict[str, Any]:
        return {"plugins": [self.plugins[pid].to_dict() for pid in sorted(self.plugins)]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GroundTruth":
        entries = (PluginTruth.from_dict(p) for p in data.get("plugins") or [])
        return cls({t.plugin_id: t for t in entries})
