from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Tuple

from modules.consistency.checker import ConsistencyVerdict
from modules.errors import DuplicateId, PreconditionViolation
from modules.legal.documents import LegalDocVerdict
from modules.probe.prober import ProbeSummary

EXPOSURE_KEYS: Tuple[str, ...] = ("e1", "e2", "e3", "e4", "e5")
EXPOSURE_NAMES: Dict[str, str] = {
    "e1": "FileLeakage",
    "e2": "Inconsistency",
    "e3": "SingleAuth",
    "e4": "MultiAuthBypass",
    "e5": "TokenLeakage",
}


@dataclass(frozen=True)
class Evidence:
    """One re-checkable observation: which check ran, on what, and what it saw.

    `check` starts with the exposure key it supports (`e3`, `e2:name`) or names a
    side observation (`probe:skipped`, `error`).
    """
    check: str
    input: str
    observation: str

    def supports(self, exposure: str) -> bool:
        return self.check == exposure or self.check.startswith(exposure + ":")

    def to_dict(self) -> Dict[str, str]:
        return {"check": self.check, "input": self.input, "observation": self.observation}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Evidence":
        return cls(str(data["check"]), str(data["input"]), str(data["observation"]))


@dataclass(frozen=True)
class ExposureReport:
    plugin_id: str
    exposures: Dict[str, bool] = field(default_factory=lambda: {k: False for k in EXPOSURE_KEYS})
    consistency: Optional[ConsistencyVerdict] = None
    legal: Optional[LegalDocVerdict] = None
    category: Optional[str] = None
    category_score: float = 0.0
    regions: Tuple[str, ...] = ()
    email_domain: Optional[str] = None
    fetch_status: Optional[str] = None
    share_platform: Optional[str] = None
    probe: Optional[ProbeSummary] = None
    evidence: Tuple[Evidence, ...] = ()

    def __post_init__(self):
        flags = {k: bool(self.exposures.get(k, False)) for k in EXPOSURE_KEYS}
        unknown = set(self.exposures) - set(EXPOSURE_KEYS)
        if unknown:
            raise PreconditionViolation(f"unknown exposure keys {sorted(unknown)}")
        if flags["e3"] + flags["e4"] + flags["e5"] > 1:
            raise PreconditionViolation(f"{self.plugin_id}: at most one API-level exposure may hold")
        evidence = tuple(self.evidence)
        for key, on in flags.items():
            if on and not any(e.supports(key) for e in evidence):
                raise PreconditionViolation(f"{self.plugin_id}: {key} is set without evidence")
        object.__setattr__(self, "exposures", flags)
        object.__setattr__(self, "regions", tuple(sorted(self.regions)))
        object.__setattr__(self, "evidence", evidence)

    def has(self, exposure: str) -> bool:
        return self.exposures.get(exposure, False)

    @property
    def unclassified(self) -> bool:
        return self.category is not None and self.category_score <= 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "plugin_id": self.plugin_id,
            "exposures": dict(self.exposures),
            "consistency": self.consistency.to_dict() if self.consistency else None,
            "legal": self.legal.to_dict() if self.legal else None,
            "category": self.category,
            "category_score": self.category_score,
            "unclassified": self.unclassified,
            "regions": list(self.regions),
            "email_domain": self.email_domain,
            "fetch_status": self.fetch_status,
            "share_platform": self.share_platform,
            "probe": self.probe.to_dict() if self.probe else None,
            "evidence": [e.to_dict() for e in self.evidence],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExposureReport":
        pid = data["plugin_id"]
        return cls(
            plugin_id=pid,
            exposures={k: bool(v) for k, v in (data.get("exposures") or {}).items()},
            consistency=ConsistencyVerdict.from_dict(pid, data["consistency"]) if data.get("consistency") else None,
            legal=LegalDocVerdict.from_dict(pid, data["legal"]) if data.get("legal") else None,
            category=data.get("category"),
            category_score=float(data.get("category_score") or 0.0),
            regions=tuple(data.get("regions") or ()),
            email_domain=data.get("email_domain"),
            fetch_status=data.get("fetch_status"),
            share_platform=data.get("share_platform"),
            probe=ProbeSummary.from_dict(data["probe"]) if data.get("probe") else None,
            evidence=tuple(Evidence.from_dict(e) for e in data.get("evidence") or ()),
        )


@dataclass(frozen=True)
class AssessmentRun:
    run_id: str
    timestamp: str
    config_digest: str
    reports: Tuple[ExposureReport, ...] = ()

    def __post_init__(self):
        reports = tuple(sorted(self.reports, key=lambda r: r.plugin_id))
        seen = set()
        for r in reports:
            if r.plugin_id in seen:
                raise DuplicateId(r.plugin_id)
            seen.add(r.plugin_id)
        object.__setattr__(self, "reports", reports)

    def by_id(self) -> Dict[str, ExposureReport]:
        return {r.plugin_id: r for r in self.reports}

    def totals(self) -> Dict[str, int]:
        return {k: sum(1 for r in self.reports if r.has(k)) for k in EXPOSURE_KEYS}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "run_id": self.run_id,
            "timestamp": self.timestamp,
            "config_digest": self.config_digest,
            "reports": [r.to_dict() for r in self.reports],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AssessmentRun":
        return cls(
            run_id=data["run_id"],
            timestamp=data["timestamp"],
            config_digest=data["config_digest"],
            reports=tuple(ExposureReport.from_dict(r) for r in data.get("reports") or ()),
        )


def exposure_predicate(*keys: str):
    """`exposure_predicate("e3", "e4")` → report has any of them; no keys → any exposure."""
    wanted: Iterable[str] = keys or EXPOSURE_KEYS
    for k in wanted:
        if k not in EXPOSURE_KEYS:
            raise PreconditionViolation(f"unknown exposure '{k}'")
    wanted = tuple(wanted)
    return lambda report: any(report.has(k) for k in wanted)


def reports_with(run: AssessmentRun, exposure: str) -> List[ExposureReport]:
    return [r for r in run.reports if r.has(exposure)]
