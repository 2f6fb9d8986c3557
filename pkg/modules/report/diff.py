from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from modules.errors import IncomparableRuns
from modules.logger import get_logger
from modules.report.models import EXPOSURE_KEYS, EXPOSURE_NAMES, AssessmentRun
from modules.report.numbers import percent_change

logger = get_logger(__name__)

NOT_AVAILABLE = "n/a"


@dataclass(frozen=True)
class ExposureDelta:
    exposure: str
    before: int
    after: int
    change: Optional[float]

    @property
    def change_label(self) -> str:
        if self.change is None:
            return NOT_AVAILABLE
        return f"{self.change:+.1f}%" if self.change else "0.0%"


@dataclass(frozen=True)
class RunDiff:
    earlier_run: str
    later_run: str
    config_digest: str
    deltas: Tuple[ExposureDelta, ...]
    # exposure → {"resolved": [...], "new": [...]}
    transitions: Dict[str, Dict[str, List[str]]] = field(default_factory=dict)

    def delta(self, exposure: str) -> ExposureDelta:
        return next(d for d in self.deltas if d.exposure == exposure)

    def to_frame(self) -> pd.DataFrame:
        """Before / after / change rows, one column per exposure."""
        columns = [EXPOSURE_NAMES[d.exposure] for d in self.deltas]
        return pd.DataFrame(
            [
                [d.before for d in self.deltas],
                [d.after for d in self.deltas],
                [d.change_label for d in self.deltas],
            ],
            index=["before", "after", "change"],
            columns=columns,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "earlier_run": self.earlier_run,
            "later_run": self.later_run,
            "config_digest": self.config_digest,
            "exposures": {
                d.exposure: {"before": d.before, "after": d.after, "change": d.change}
                for d in self.deltas
            },
            "transitions": self.transitions,
        }


def diff_runs(earlier: AssessmentRun, later: AssessmentRun) -> RunDiff:
    """Compare two assessments made under the same config.

    Change is (after - before) / before in percent, half-up to one decimal.
    """
    if earlier.config_digest != later.config_digest:
        raise IncomparableRuns(earlier.config_digest, later.config_digest)

    before, after = earlier.totals(), later.totals()
    deltas = tuple(
        ExposureDelta(k, before[k], after[k], percent_change(before[k], after[k])) for k in EXPOSURE_KEYS
    )

    old, new = earlier.by_id(), later.by_id()
    transitions: Dict[str, Dict[str, List[str]]] = {}
    for k in EXPOSURE_KEYS:
        was = {pid for pid, r in old.items() if r.has(k)}
        now = {pid for pid, r in new.items() if r.has(k)}
        transitions[k] = {"resolved": sorted(was - now), "new": sorted(now - was)}

    logger.info(
        "diff %s → %s: %s",
        earlier.run_id,
        later.run_id,
        ", ".join(f"{d.exposure} {d.before}→{d.after}" for d in deltas),
    )
    return RunDiff(earlier.run_id, later.run_id, earlier.config_digest, deltas, transitions)
