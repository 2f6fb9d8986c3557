import random

import pytest

from modules.classifier.categories import CATEGORY_LABELS
from modules.consistency.checker import ConsistencyFlag, ConsistencyVerdict
from modules.legal.documents import Accessibility, LegalDocCategory, LegalDocVerdict
from modules.probe.prober import ProbeSummary
from modules.report.models import EXPOSURE_KEYS, AssessmentRun, Evidence, ExposureReport


def make_report(pid: str, *exposures: str, category: str = "Weather", domain: str | None = "dev.test",
                **extra) -> ExposureReport:
    flags = {k: k in exposures for k in EXPOSURE_KEYS}
    evidence = tuple(Evidence(k, pid, "observed") for k in exposures)
    return ExposureReport(
        plugin_id=pid,
        exposures=flags,
        category=category,
        category_score=0.5,
        email_domain=domain,
        evidence=evidence,
        **extra,
    )


def random_report(rng: random.Random, pid: str) -> ExposureReport:
    api = rng.choice([None, "e3", "e4", "e5"])
    exposures = [k for k in ("e1", "e2") if rng.random() < 0.5] + ([api] if api else [])
    flags = frozenset(rng.sample(list(ConsistencyFlag), rng.randint(0, 3)))
    consistency = ConsistencyVerdict(pid, rng.random(), rng.random(), rng.random() < 0.5, flags,
                                     ("same-content-different-url",) if rng.random() < 0.2 else ())
    if rng.random() < 0.3:
        legal = LegalDocVerdict(pid, Accessibility.INACCESSIBLE)
    else:
        category = rng.choice(list(LegalDocCategory))
        seeds = () if category is LegalDocCategory.UNRELATED else ("Privacy",)
        legal = LegalDocVerdict(pid, Accessibility.ACCESSIBLE, category, seeds)
    probe = ProbeSummary(
        auth=rng.choice(["none", "others", "token"]),
        respondable=api is not None,
        reason=None if api else "Unauthorized",
        endpoints={"GET /x": "Valid" if api else "Unauthorized"},
        skipped={"DELETE /x": "unsafe-method"} if rng.random() < 0.3 else {},
    ) if rng.random() < 0.7 else None
    return make_report(
        pid,
        *exposures,
        category=rng.choice(CATEGORY_LABELS),
        domain=rng.choice([None, "a.test", "b.test"]),
        consistency=consistency,
        legal=legal,
        regions=tuple(rng.sample(["Japan", "USA", "UK"], rng.randint(0, 2))),
        fetch_status=rng.choice(["AccessibleRelevant", "Timeout", "ServerError"]),
        probe=probe,
    )


def random_run(seed: int, size: int = 12, digest: str = "cafebabe00000000") -> AssessmentRun:
    rng = random.Random(seed)
    reports = [random_report(rng, f"p{i:03d}") for i in range(size)]
    return AssessmentRun(f"run-{seed}", f"2026-01-{seed % 28 + 1:02d}T00:00:00+00:00", digest, tuple(reports))


@pytest.fixture
def report_factory():
    return make_report
