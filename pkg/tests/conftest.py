import pytest

from modules.audit.pipeline import run_audit
from modules.audit.settings import AuditConfig
from modules.audit.store import parse_snapshot
from modules.fixtures.generator import SNAPSHOT_FILE, generate_store
from modules.fixtures.server import FixtureServer
from modules.fixtures.spec import criterion_spec


def fixture_config(base_dir, server: FixtureServer, **overrides) -> AuditConfig:
    values = {
        "timeout": 2.0,
        "attempts": 3,
        "per_host_interval": 0.05,
        "backoff_initial": 0.0,
        "workers": 8,
        "proxies": [server.url],
    }
    values.update(overrides)
    return AuditConfig.from_dict(values, base_dir)


@pytest.fixture(scope="session")
def criterion_store(tmp_path_factory):
    return generate_store(criterion_spec(), tmp_path_factory.mktemp("criterion") / "store")


@pytest.fixture(scope="session")
def criterion_listings(criterion_store):
    store_dir, _ = criterion_store
    return parse_snapshot((store_dir / SNAPSHOT_FILE).read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def criterion_run(criterion_store, criterion_listings, tmp_path_factory):
    """One full audit of the 200-plugin store, shared by the oracle checks."""
    store_dir, _ = criterion_store
    with FixtureServer(store_dir) as server:
        config = fixture_config(tmp_path_factory.mktemp("data"), server)
        run = run_audit(criterion_listings, config, run_id="criterion")
        log = server.requests()
    return run, log, config
