import re
from enum import Enum
from typing import Iterable

DEFAULT_SEEDS = ("auth", "api", "legal_info_url")

_TAG_NAME_RE = re.compile(r"</?\s*[A-Za-z][\w:.-]*")
_TOKEN_RE = re.compile(r"[A-Za-z0-9_]+")


class Relevance(str, Enum):
    RELEVANT = "relevant"
    UNRELATED = "unrelated"


def classify_relevance(body: str, seeds: Iterable[str] = DEFAULT_SEEDS) -> Relevance:
    """A body is manifest-like when any seed word shows up as a whole token.

    HTML tag names are blanked first so `<api-docs>` style elements don't count.
    """
    text = _TAG_NAME_RE.sub(" ", body or "")
    tokens = {t.lower() for t in _TOKEN_RE.findall(text)}
    wanted = {s.lower() for s in seeds}
    return Relevance.RELEVANT if tokens & wanted else Relevance.UNRELATED
