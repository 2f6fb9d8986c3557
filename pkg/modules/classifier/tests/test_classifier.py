import json
import random

import httpx
import pytest

from modules.classifier.categories import (
    CATEGORY_LABELS,
    HttpCategoryScorer,
    KeywordTable,
    LexicalScorer,
    category_distribution,
    classify_category,
    load_keyword_table,
)
from modules.classifier.regions import Gazetteer, detect_regions, load_gazetteer, region_distribution
from modules.errors import EmptyDescription, MalformedDocument


def test_category_set_is_fixed():
    assert len(CATEGORY_LABELS) == 21
    assert list(CATEGORY_LABELS) == sorted(CATEGORY_LABELS)
    assert "Weather" in CATEGORY_LABELS and "Plugin Tips" in CATEGORY_LABELS


def test_keyword_table_covers_every_label():
    assert set(load_keyword_table().entries) == set(CATEGORY_LABELS)


@pytest.mark.parametrize(
    "description, label",
    [
        ("Fetch real-time weather forecasts for any city", "Weather"),
        ("Craft magical bedtime stories for kids", "Entertainment"),
        ("Search jobs and polish your resume", "Career"),
        ("Track bitcoin and ethereum prices", "Crypto"),
        ("Chat with any PDF document", "Document"),
    ],
)
def test_classify_category_examples(description, label):
    assignment = classify_category(description)
    assert assignment.label == label
    assert 0.0 < assignment.score <= 1.0
    assert not assignment.unclassified


def test_classify_category_no_hits_is_unclassified():
    assignment = classify_category("Zorp blib quux")
    assert assignment.label == "Audio & Music"
    assert assignment.score == 0.0
    assert assignment.unclassified


@pytest.mark.parametrize("blank", ["", "   "])
def test_classify_category_empty(blank):
    with pytest.raises(EmptyDescription):
        classify_category(blank)


def test_lexical_scores_bounded_and_normalized():
    scores = LexicalScorer().score("weather forecast and news headlines")
    assert set(scores) == set(CATEGORY_LABELS)
    assert all(0.0 <= s <= 1.0 for s in scores.values())
    assert sum(scores.values()) == pytest.approx(1.0)


class ConstantScorer:
    def __init__(self, scores):
        self.scores = scores

    def score(self, text):
        return dict(self.scores)


def test_scorer_substitution_and_tie_break():
    flat = ConstantScorer({label: 0.5 for label in CATEGORY_LABELS})
    assert classify_category("anything", flat).label == "Audio & Music"
    picked = ConstantScorer({"Law": 0.9, "Finance": 0.4})
    assert classify_category("anything", picked).label == "Law"


@pytest.mark.parametrize("seed", range(20))
def test_argmax_invariant_under_scaling(seed):
    rng = random.Random(seed)
    scores = {label: rng.choice([0.0, 0.1, 0.25, 0.5, 0.75]) for label in CATEGORY_LABELS}
    k = rng.uniform(0.1, 1.0)
    scaled = {label: s * k for label, s in scores.items()}
    assert classify_category("x", ConstantScorer(scores)).label == classify_category("x", ConstantScorer(scaled)).label


def test_keyword_table_rejects_unknown_label():
    with pytest.raises(MalformedDocument):
        KeywordTable.parse("Gardening | roses | 2")


def test_http_scorer_contract():
    seen = []

    def handler(request: httpx.Request) -> httpx.Response:
        seen.append(json.loads(request.content))
        return httpx.Response(200, json={"scores": {"Weather": 0.8, "News": 1.4}})

    scorer = HttpCategoryScorer("http://127.0.0.1:9/score", transport=httpx.MockTransport(handler))
    try:
        scores = scorer.score("rain tomorrow?")
    finally:
        scorer.close()
    assert seen == [{"text": "rain tomorrow?"}]
    assert scores["Weather"] == 0.8
    assert scores["News"] == 1.0
    assert scores["Books"] == 0.0


def test_http_scorer_bad_payload():
    scorer = HttpCategoryScorer(
        "http://127.0.0.1:9/score", transport=httpx.MockTransport(lambda r: httpx.Response(200, json={"x": 1}))
    )
    with pytest.raises(MalformedDocument):
        scorer.score("text")
    scorer.close()


def test_detect_regions_examples():
    assert detect_regions("Search UK Companies: look up UK-registered companies") == ["UK"]
    assert detect_regions("Daily forecasts for any city") == []
    assert detect_regions("Japanese recipes and American diners") == ["Japan", "USA"]
    assert detect_regions("Travel in New Zealand and the United States") == ["New Zealand", "USA"]


def test_detect_regions_whole_word():
    assert detect_regions("ukulele lessons") == []
    assert detect_regions("Germanium prices") == []


@pytest.mark.parametrize("seed", range(10))
def test_detect_regions_subset_and_sorted(seed):
    rng = random.Random(seed)
    gaz = load_gazetteer()
    names = rng.sample(gaz.names, 3)
    text = " and ".join(names) + " plus filler words"
    found = detect_regions(text, gaz)
    assert set(names) <= set(found) <= set(gaz.names)
    assert found == sorted(found)


def test_gazetteer_parse():
    gaz = Gazetteer.parse("# c\nAtlantis | Atlantean\n")
    assert detect_regions("atlantean cuisine", gaz) == ["Atlantis"]
    with pytest.raises(MalformedDocument):
        Gazetteer.parse(" | orphan alias")


def test_distributions():
    cats = category_distribution(["Weather", "Weather", "News", "Weather"])
    assert len(cats) == 21
    top = cats.iloc[0]
    assert (top["category"], top["count"], top["share"]) == ("Weather", 3, 75.0)
    regions = region_distribution([["Japan"], ["Japan", "USA"], []])
    assert regions.values.tolist() == [["Japan", 2], ["USA", 1]]
