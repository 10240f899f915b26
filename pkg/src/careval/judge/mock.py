"""Deterministic offline judge used for tests and dry runs.

The mock is pure and fully specified so metric pipelines built on it are
reproducible end to end. Its rules (exact, versioned with the data files):

Tokenization: lowercase, then maximal runs of ``[a-z0-9']``.

Suffix normalization (one strip per token, first match wins):
``-ing`` when the token has >= 6 chars, ``-ed`` when >= 5, ``-s`` when >= 4
and the token does not end in ``ss``.

Entailment: an element is entailed by a description when every element
token that is not a stopword (raw form, ``data/stopwords_v1.txt``) appears,
after suffix normalization of both sides, among the description's
normalized tokens.

Extraction: the caption is split into sentences on ``.!?;``. Leading
connective tokens (then, next, finally, ...) are dropped.

* events: a sentence is one event element when any of its tokens reduces
  to a stem in ``data/verbs_v1.txt`` (candidates tried per token: the raw
  token, minus ``-s``/``-es``/``-ing``/``-ed``, and the ``-ing``/``-ed``
  strips with a restored trailing ``e``).
* objects: every sentence is one object element, except that a sentence of
  the form ``<head> <introducer> A and B`` (introducer in a small list:
  wearing, holding, with, ...) is split into one element per conjunct with
  the head repeated: ``<head> <introducer> A``, ``<head> <introducer> B``.

Element text is the cleaned sentence: lowercased tokens joined by single
spaces.
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

STOPWORDS_FILE = "stopwords_v1.txt"
VERBS_FILE = "verbs_v1.txt"

_TOKEN_RE = re.compile(r"[a-z0-9']+")
_SENTENCE_SPLIT_RE = re.compile(r"[.!?;]+")

# Tokens dropped from the front of a sentence before it becomes an element.
LEADING_CONNECTIVES = frozenset(
    {
        "then",
        "next",
        "after",
        "afterwards",
        "before",
        "later",
        "first",
        "second",
        "third",
        "finally",
        "meanwhile",
        "subsequently",
        "eventually",
        "lastly",
        "initially",
        "now",
        "soon",
        "that",
    }
)

# A compound-attribute object sentence is split at "and" after one of these.
ATTRIBUTE_INTRODUCERS = frozenset(
    {
        "wearing",
        "holding",
        "carrying",
        "with",
        "in",
        "on",
        "has",
        "have",
        "having",
        "featuring",
        "including",
        "containing",
        "showing",
    }
)


@lru_cache(maxsize=None)
def _load_wordlist(name: str) -> frozenset[str]:
    text = resources.files("careval.judge").joinpath("data", name).read_text("utf-8")
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


def stopwords() -> frozenset[str]:
    return _load_wordlist(STOPWORDS_FILE)


def verb_stems() -> frozenset[str]:
    return _load_wordlist(VERBS_FILE)


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def normalize_token(token: str) -> str:
    """Strip one trailing suffix: -ing (len >= 6), -ed (len >= 5), -s (len >= 4)."""
    if token.endswith("ing") and len(token) >= 6:
        return token[:-3]
    if token.endswith("ed") and len(token) >= 5:
        return token[:-2]
    if token.endswith("s") and not token.endswith("ss") and len(token) >= 4:
        return token[:-1]
    return token


def _verb_candidates(token: str) -> set[str]:
    candidates = {token}
    if token.endswith("es") and len(token) >= 5:
        candidates.add(token[:-2])
    if token.endswith("s") and len(token) >= 4:
        candidates.add(token[:-1])
    if token.endswith("ing") and len(token) >= 6:
        candidates.add(token[:-3])
        candidates.add(token[:-3] + "e")
    if token.endswith("ed") and len(token) >= 5:
        candidates.add(token[:-2])
        candidates.add(token[:-2] + "e")
    return candidates


def _is_event_sentence(tokens: list[str]) -> bool:
    stems = verb_stems()
    return any(_verb_candidates(tok) & stems for tok in tokens)


def _sentences(caption: str) -> list[list[str]]:
    sentences = []
    for raw in _SENTENCE_SPLIT_RE.split(caption):
        tokens = tokenize(raw)
        while tokens and tokens[0] in LEADING_CONNECTIVES:
            tokens = tokens[1:]
        if tokens:
            sentences.append(tokens)
    return sentences


def _split_attributes(tokens: list[str]) -> list[list[str]]:
    """Split ``<head> <introducer> A and B`` into one token list per conjunct."""
    if "and" not in tokens:
        return [tokens]
    intro_idx = next(
        (i for i, tok in enumerate(tokens) if tok in ATTRIBUTE_INTRODUCERS), None
    )
    if intro_idx is None or "and" not in tokens[intro_idx + 1 :]:
        return [tokens]
    head = tokens[: intro_idx + 1]
    groups: list[list[str]] = [[]]
    for tok in tokens[intro_idx + 1 :]:
        if tok == "and":
            groups.append([])
        else:
            groups[-1].append(tok)
    groups = [g for g in groups if g]
    if len(groups) < 2:
        return [tokens]
    return [head + group for group in groups]


def mock_extract(caption: str, aspect: str) -> list[str]:
    """Extract element texts from a caption with the documented rules."""
    if aspect not in ("object", "event"):
        raise ValueError(f"unknown aspect {aspect!r}")
    elements: list[str] = []
    for tokens in _sentences(caption):
        if aspect == "event":
            if _is_event_sentence(tokens):
                elements.append(" ".join(tokens))
        else:
            for part in _split_attributes(tokens):
                elements.append(" ".join(part))
    return elements


def mock_entailed(description: str, element_text: str) -> bool:
    """Containment rule: every non-stopword element token appears (normalized)
    among the description's normalized tokens."""
    stop = stopwords()
    description_tokens = {normalize_token(tok) for tok in tokenize(description)}
    for token in tokenize(element_text):
        if token in stop:
            continue
        if normalize_token(token) not in description_tokens:
            return False
    return True
