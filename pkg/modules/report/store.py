from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from modules.errors import PreconditionViolation
from modules.logger import get_logger
from modules.report.models import AssessmentRun
from modules.report.render import ingest_run, render

logger = get_logger(__name__)


@dataclass(frozen=True)
class RunEntry:
    run_id: str
    timestamp: str
    config_digest: str
    plugins: int
    path: Path


class RunStore:
    """Assessment runs as `<runs_dir>/<run_id>.json`, one file per run."""

    def __init__(self, runs_dir: Path):
        self.runs_dir = Path(runs_dir)
        self.runs_dir.mkdir(parents=True, exist_ok=True)

    def path_for(self, run_id: str) -> Path:
        if not run_id or "/" in run_id or "\\" in run_id or run_id.startswith("."):
            raise PreconditionViolation(f"invalid run id {run_id!r}")
        return self.runs_dir / f"{run_id}.json"

    def save(self, run: AssessmentRun) -> Path:
        path = self.path_for(run.run_id)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(render(run, "json"), encoding="utf-8")
        tmp.replace(path)
        logger.info("saved run %s (%d plugins) to %s", run.run_id, len(run.reports), path)
        return path

    def load(self, run_id_or_path: str) -> AssessmentRun:
        """Accepts a run id from this store or a path to any run file."""
        candidate = Path(run_id_or_path)
        path = candidate if candidate.suffix == ".json" and candidate.exists() else self.path_for(run_id_or_path)
        if not path.exists():
            raise PreconditionViolation(f"no run '{run_id_or_path}' in {self.runs_dir}")
        return ingest_run(path.read_text(encoding="utf-8"))

    def list_runs(self) -> List[RunEntry]:
        """Oldest first."""
        entries = []
        for path in self.runs_dir.glob("*.json"):
            try:
                data = json.loads(path.read_text(encoding="utf-8"))
                entries.append(RunEntry(
                    run_id=data["run_id"],
                    timestamp=data["timestamp"],
                    config_digest=data["config_digest"],
                    plugins=len(data.get("reports") or []),
                    path=path,
                ))
            except (OSError, ValueError, KeyError, TypeError) as e:
                logger.warning("skipping unreadable run file %s: %s", path, e)
        entries.sort(key=lambda e: (e.timestamp, e.run_id))
        return entries

    def latest(self) -> Optional[AssessmentRun]:
        entries = self.list_runs()
        if not entries:
            return None
        return self.load(entries[-1].run_id)
