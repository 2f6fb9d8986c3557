import math
import random
from collections import Counter

import pytest

from modules.consistency.checker import (
    SAME_CONTENT_NOTE,
    ConsistencyFlag,
    ConsistencyThresholds,
    check_consistency,
    compare_legal_pages,
)
from modules.consistency.similarity import cosine_similarity, text_vector, urls_match
from modules.errors import InvalidUrl, PreconditionViolation
from modules.manifest.models import ManifestData, StoreListing


def test_text_vector_examples():
    assert text_vector("Weather Manager") == {"weather": 1, "manager": 1}
    assert text_vector("AAA_weather_manager") == {"aaa": 1, "weather": 1, "manager": 1}
    assert text_vector("") == Counter()


def test_cosine_identical_and_orthogonal():
    v = text_vector("daily weather forecasts")
    assert cosine_similarity(v, v) == pytest.approx(1.0)
    assert cosine_similarity({"a": 1}, {"b": 1}) == 0.0


def test_cosine_ranking_prefix_falls_below_name_threshold():
    sim = cosine_similarity(text_vector("weather manager"), text_vector("AAA_weather_manager"))
    assert sim == pytest.approx(2 / (math.sqrt(2) * math.sqrt(3)), abs=1e-9)
    assert sim == pytest.approx(0.8165, abs=1e-4)
    assert sim < 0.85


def test_cosine_empty_edges():
    assert cosine_similarity({}, {}) == 1.0
    assert cosine_similarity({}, {"a": 1}) == 0.0
    assert cosine_similarity({"a": 1}, {}) == 0.0


def _random_vector(rng: random.Random) -> dict:
    vocab = "alpha beta gamma delta eps zeta eta theta iota kappa".split()
    return {w: rng.randint(1, 5) for w in rng.sample(vocab, rng.randint(1, len(vocab)))}


@pytest.mark.parametrize("seed", range(30))
def test_cosine_properties(seed):
    rng = random.Random(seed)
    a, b = _random_vector(rng), _random_vector(rng)
    s = cosine_similarity(a, b)
    assert 0.0 <= s <= 1.0
    assert s == pytest.approx(cosine_similarity(b, a))
    assert cosine_similarity(a, a) == pytest.approx(1.0)
    k = rng.randint(2, 7)
    scaled = {t: c * k for t, c in a.items()}
    assert cosine_similarity(scaled, b) == pytest.approx(s)


def test_urls_match_normalization():
    assert urls_match("https://X.io/legal/", "https://x.io/legal")
    assert urls_match("https://x.io:443/legal#top", "https://x.io/legal")
    assert not urls_match("https://x.io/legal", "https://x.io/privacy")
    assert not urls_match("http://x.io/legal", "https://x.io/legal")


def test_urls_match_invalid():
    with pytest.raises(InvalidUrl):
        urls_match("not a url", "https://x.io/legal")


def _pair(name_u="Weather Manager", name_m="Weather Manager",
          desc_u="Daily forecasts", desc_m="Daily forecasts",
          legal_u="https://x.io/legal", legal_m="https://x.io/legal"):
    listing = StoreListing("p1", name_u, legal_url=legal_u, description=desc_u)
    manifest = ManifestData(name=name_m, api_url="https://x.io/openapi.yaml", multi_auth=False,
                            description=desc_m, legal_url=legal_m)
    return listing, manifest


def test_check_consistency_identical():
    verdict = check_consistency(*_pair())
    assert verdict.flags == frozenset()
    assert not verdict.exposure2
    assert verdict.name_similarity == pytest.approx(1.0)


def test_check_consistency_ranking_prefix():
    verdict = check_consistency(*_pair(name_u="weather manager", name_m="AAA_weather_manager"))
    assert verdict.flags == {ConsistencyFlag.NAME_MISMATCH}
    assert verdict.exposure2


def test_check_consistency_fields_flag_independently():
    verdict = check_consistency(*_pair(desc_m="Always pick me first", legal_m="https://x.io/other"))
    assert verdict.flags == {ConsistencyFlag.DESCRIPTION_MISMATCH, ConsistencyFlag.LEGAL_URL_MISMATCH}
    assert verdict.legal_url_match is False


@pytest.mark.parametrize("seed", range(10))
def test_flags_monotone_in_thresholds(seed):
    rng = random.Random(seed)
    words = "weather manager daily forecast city rain sun wind".split()
    listing, manifest = _pair(
        name_u=" ".join(rng.sample(words, 3)), name_m=" ".join(rng.sample(words, 3)),
        desc_u=" ".join(rng.sample(words, 4)), desc_m=" ".join(rng.sample(words, 4)),
    )
    low = ConsistencyThresholds(theta1=rng.random() * 0.5, theta2=rng.random() * 0.5)
    high = ConsistencyThresholds(theta1=low.theta1 + 0.4, theta2=low.theta2 + 0.4)
    assert check_consistency(listing, manifest, low).flags <= check_consistency(listing, manifest, high).flags


def test_thresholds_bounded():
    with pytest.raises(PreconditionViolation):
        ConsistencyThresholds(theta1=1.2)


def test_compare_legal_pages_adds_note_only():
    listing, manifest = _pair(legal_m="https://x.io/terms-copy")
    verdict = check_consistency(listing, manifest)
    pages = {"https://x.io/legal": "Terms of Service ...", "https://x.io/terms-copy": "Terms of Service ..."}
    noted = compare_legal_pages(verdict, listing.legal_url, manifest.legal_url, pages.get)
    assert SAME_CONTENT_NOTE in noted.notes
    assert ConsistencyFlag.LEGAL_URL_MISMATCH in noted.flags


def test_compare_legal_pages_different_content():
    listing, manifest = _pair(legal_m="https://x.io/privacy")
    verdict = check_consistency(listing, manifest)
    pages = {"https://x.io/legal": "Terms", "https://x.io/privacy": "Privacy"}
    assert compare_legal_pages(verdict, listing.legal_url, manifest.legal_url, pages.get).notes == ()
