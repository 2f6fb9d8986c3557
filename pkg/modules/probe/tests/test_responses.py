import random

import pytest

from modules.errors import PreconditionViolation
from modules.probe.responses import (
    EXCERPT_BYTES,
    InvalidResponseLexicon,
    ProbeResponse,
    ResponseClass,
    aggregate,
    classify_response,
    excerpt,
)


@pytest.mark.parametrize(
    "status, body, expected",
    [
        (200, '{"temp": 81}', ResponseClass.VALID),
        (200, "Service Unavailable", ResponseClass.INVALID_MEANINGLESS),
        (200, "Internal server error, try later", ResponseClass.INVALID_MEANINGLESS),
        (200, "", ResponseClass.INVALID_MEANINGLESS),
        (200, "   \n", ResponseClass.INVALID_MEANINGLESS),
        (200, '{"error": "Invalid API key"}', ResponseClass.UNAUTHORIZED),
        (200, "No requested privileges", ResponseClass.INVALID_MEANINGLESS),
        (200, "Server error", ResponseClass.INVALID_MEANINGLESS),
        (401, "", ResponseClass.UNAUTHORIZED),
        (403, '{"temp": 81}', ResponseClass.UNAUTHORIZED),
        (429, "slow down", ResponseClass.RATE_LIMITED),
        (429, "unauthorized", ResponseClass.RATE_LIMITED),
        (404, "Not Found", ResponseClass.CLIENT_ERROR),
        (400, "missing parameter", ResponseClass.CLIENT_ERROR),
        (500, '{"temp": 81}', ResponseClass.INVALID_MEANINGLESS),
        (503, "", ResponseClass.INVALID_MEANINGLESS),
        (302, "moved", ResponseClass.INVALID_MEANINGLESS),
        (None, None, ResponseClass.NETWORK_ERROR),
    ],
)
def test_classify_response(status, body, expected):
    assert classify_response(status, body) is expected


@pytest.mark.parametrize("seed", range(20))
def test_classify_response_ignores_lexicon_order(seed):
    rng = random.Random(seed)
    base = InvalidResponseLexicon()
    shuffled = list(base.patterns)
    rng.shuffle(shuffled)
    other = InvalidResponseLexicon(patterns=tuple(shuffled))
    words = list(base.patterns) + ["temp", "81", "forecast", "{}", "ok"]
    for _ in range(50):
        status = rng.choice([None, 200, 201, 204, 301, 400, 401, 403, 404, 429, 500, 503])
        body = " ".join(rng.choice(words) for _ in range(rng.randint(0, 4)))
        assert classify_response(status, body, base) is classify_response(status, body, other)


def test_lexicon_must_not_be_empty():
    with pytest.raises(PreconditionViolation):
        InvalidResponseLexicon(patterns=())
    with pytest.raises(PreconditionViolation):
        InvalidResponseLexicon(patterns=("  ",))


def test_custom_lexicon_phrase():
    lex = InvalidResponseLexicon.from_phrases(["quota exceeded"])
    assert classify_response(200, "Quota Exceeded for today", lex) is ResponseClass.INVALID_MEANINGLESS
    # auth phrases outside the configured set are ignored
    assert classify_response(200, "unauthorized", lex) is ResponseClass.VALID


def test_excerpt_is_byte_bounded():
    body = "é" * EXCERPT_BYTES
    cut = excerpt(body)
    assert len(cut.encode("utf-8")) <= EXCERPT_BYTES
    assert excerpt(None) == ""


def test_probe_response_classification_follows_excerpt():
    r = ProbeResponse.observe(200, '{"temp": 81}', 0.01, 0, InvalidResponseLexicon())
    assert r.classification is classify_response(r.http_status, r.body_excerpt)


def _resp(kind: ResponseClass, vantage: int = 0) -> ProbeResponse:
    return ProbeResponse(http_status=200, body_excerpt="", latency=0.0, vantage=vantage, classification=kind)


def test_aggregate_agreement_and_disagreement():
    assert aggregate([_resp(ResponseClass.VALID, i) for i in range(3)]) is ResponseClass.VALID
    assert aggregate([_resp(ResponseClass.CLIENT_ERROR), _resp(ResponseClass.VALID), _resp(ResponseClass.VALID)]) \
        is ResponseClass.UNSTABLE


@pytest.mark.parametrize("seed", range(10))
def test_aggregate_order_independent(seed):
    rng = random.Random(seed)
    kinds = [rng.choice(list(ResponseClass)[:-1]) for _ in range(rng.randint(1, 5))]
    responses = [_resp(k, i) for i, k in enumerate(kinds)]
    shuffled = responses[:]
    rng.shuffle(shuffled)
    assert aggregate(responses) is aggregate(shuffled)
    assert (aggregate(responses) is ResponseClass.VALID) == all(k is ResponseClass.VALID for k in kinds)


def test_aggregate_empty():
    with pytest.raises(PreconditionViolation):
        aggregate([])
