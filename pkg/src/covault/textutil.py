"""Deterministic lexical basis for uptake detection and delta analysis.

Everything here is intentionally lightweight: lowercase tokens, a fixed
stop-word list shipped as a data file, and suffix stemming that strips at
most two characters. No statistical NLP, so two runs over the same bytes
always agree.
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

_TOKEN_RE = re.compile(r"[a-z0-9]+")
_SENTENCE_SPLIT_RE = re.compile(r"[.!?\n]+")

# Suffixes at most two characters long, longest first so "es" wins over "s".
_SUFFIXES = ("es", "ed", "ly", "er", "s")


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    text = resources.files("covault.data").joinpath("stopwords.txt").read_text("utf-8")
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


def stem(token: str) -> str:
    """Strip one inflection suffix of length <= 2; short tokens untouched."""
    for suffix in _SUFFIXES:
        if token.endswith(suffix) and len(token) - len(suffix) >= 3:
            return token[: -len(suffix)]
    return token


def tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def content_words(text: str) -> list[str]:
    """Stemmed token sequence with stop words removed (order preserved)."""
    stop = stopwords()
    return [stem(tok) for tok in tokens(text) if tok not in stop]


def content_word_set(text: str) -> set[str]:
    return set(content_words(text))


def ngrams(words: list[str], n: int) -> list[tuple[str, ...]]:
    """Contiguous n-grams over an already-normalized word sequence."""
    if n <= 0 or len(words) < n:
        return []
    return [tuple(words[i : i + n]) for i in range(len(words) - n + 1)]


def sentences(text: str) -> list[str]:
    """Prose sentences of a markdown body; headings and blanks dropped."""
    prose_lines = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        prose_lines.append(stripped)
    out = []
    for chunk in _SENTENCE_SPLIT_RE.split(" ".join(prose_lines)):
        chunk = chunk.strip()
        if chunk:
            out.append(chunk)
    return out
