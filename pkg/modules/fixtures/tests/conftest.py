import random

import pytest

from modules.fixtures.generator import generate_store
from modules.fixtures.server import FixtureServer
from modules.fixtures.spec import FixtureSpec


def _split(rng: random.Random, total: int, parts: int) -> list[int]:
    cuts = sorted(rng.randint(0, total) for _ in range(parts - 1))
    bounds = [0] + cuts + [total]
    return [b - a for a, b in zip(bounds, bounds[1:])]


def random_spec(rng: random.Random, max_plugins: int = 40) -> FixtureSpec:
    """A satisfiable spec with every count drawn at random."""
    n = rng.randint(0, max_plugins)
    e1, share, timeout, unrelated, no_legal, _rest = _split(rng, n, 6)
    e2_name, e2_desc, e2_legal, _clean = _split(rng, e1, 4)
    e3, e4, e5, unstable, _quiet = _split(rng, e1, 5)
    free = n - timeout - no_legal - unrelated
    tos, privacy, other, extra_unrelated, extra_inaccessible = _split(rng, free, 5)
    return FixtureSpec(
        seed=rng.randrange(1 << 30),
        plugin_count=n,
        e1=e1,
        e2_name=e2_name,
        e2_desc=e2_desc,
        e2_legal=e2_legal,
        e3=e3,
        e4=e4,
        e5=e5,
        share_platform_count=share,
        timeout_count=timeout,
        unrelated_page_count=unrelated,
        no_legal_url_count=no_legal,
        legal_tos=tos,
        legal_privacy=privacy,
        legal_other=other,
        legal_unrelated=unrelated + extra_unrelated,
        legal_inaccessible=timeout + no_legal + extra_inaccessible,
        unstable_endpoint_count=unstable,
        region_count=rng.randint(0, n),
    )


SMALL_SPEC = FixtureSpec(
    seed=7,
    plugin_count=12,
    e1=6,
    e2_name=1,
    e2_desc=1,
    e2_legal=1,
    e3=1,
    e4=1,
    e5=1,
    share_platform_count=2,
    timeout_count=1,
    unrelated_page_count=1,
    no_legal_url_count=1,
    legal_tos=3,
    legal_privacy=2,
    legal_other=1,
    legal_unrelated=2,
    legal_inaccessible=4,
    unstable_endpoint_count=1,
    region_count=3,
)


@pytest.fixture
def small_store(tmp_path):
    return generate_store(SMALL_SPEC, tmp_path / "store")


@pytest.fixture
def small_server(small_store):
    store_dir, _ = small_store
    with FixtureServer(store_dir) as server:
        yield server
