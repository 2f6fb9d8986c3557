import os

import pytest

from modules.audit.settings import ENV_PREFIX, get_settings


@pytest.fixture
def data_dir(monkeypatch, tmp_path):
    for key in list(os.environ):
        if key.startswith(ENV_PREFIX):
            monkeypatch.delenv(key)
    d = tmp_path / "data"
    monkeypatch.setenv(f"{ENV_PREFIX}DATA_DIR", str(d))
    get_settings.cache_clear()
    yield d
    get_settings.cache_clear()


@pytest.fixture
def audit_config(data_dir):
    return get_settings().with_overrides(timeout=1.0, per_host_interval=0.0, backoff_initial=0.0, workers=2)
