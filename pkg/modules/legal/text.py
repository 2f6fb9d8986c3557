from __future__ import annotations

from typing import List

from bs4 import BeautifulSoup

SOUP_PARSER = "html.parser"

BOILERPLATE_TAGS = ("nav", "header", "footer", "script", "style", "noscript", "template")
HEADING_TAGS = ("h1", "h2")


def _soup(html: str) -> BeautifulSoup:
    return BeautifulSoup(html or "", SOUP_PARSER)


def _normalize(text: str) -> str:
    return " ".join(text.split())


def strip_boilerplate(html: str) -> str:
    """Visible text of a page minus navigation, header, footer and script regions."""
    soup = _soup(html)
    for tag in soup.find_all(BOILERPLATE_TAGS):
        tag.decompose()
    for tag in soup.find_all(attrs={"role": "navigation"}):
        tag.decompose()
    # <title> is not page text
    if soup.head:
        soup.head.decompose()
    return _normalize(soup.get_text(" "))


def extract_headings(html: str) -> List[str]:
    """Document title followed by h1/h2 texts in document order.

    Navigation is dropped first; a page header often holds the real h1, so it stays.
    """
    soup = _soup(html)
    for tag in soup.find_all(["nav", "script", "style"]):
        tag.decompose()
    headings: List[str] = []
    if soup.title and soup.title.get_text(strip=True):
        headings.append(_normalize(soup.title.get_text(" ")))
    for tag in soup.find_all(HEADING_TAGS):
        text = _normalize(tag.get_text(" "))
        if text:
            headings.append(text)
    return headings
