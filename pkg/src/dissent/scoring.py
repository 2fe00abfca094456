"""Tokenization and per-document disagreement scoring.

A document's disagreement score is the mean negative-sentiment score of
its lexicon-matched tokens.  Documents with no matched token score
Undefined (d is None) and are excluded from aggregation downstream;
scoring them 0 would assert "no disagreement" from no evidence.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from datetime import date
from typing import Iterable

from .errors import DissentError
from .lexicon import WordScoreTable

__all__ = [
    "Document",
    "DocumentScore",
    "DuplicateDocId",
    "MAX_TIMESTAMP",
    "MIN_TIMESTAMP",
    "score_corpus",
    "score_document",
    "score_text",
    "tokenize",
]

MIN_TIMESTAMP = date(1900, 1, 1)
MAX_TIMESTAMP = date(2100, 12, 31)

# URLs contribute no lexicon-bearing words; drop them wholesale before
# token extraction so their pieces don't count as tokens
_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)

# tokens are maximal runs of Unicode letters, optionally joined by
# apostrophes between letters; digits, punctuation and #/@ sigils separate
_TOKEN_RE = re.compile(r"[^\W\d_]+(?:['’][^\W\d_]+)*")


class DuplicateDocId(DissentError):
    def __init__(self, doc_id: str) -> None:
        super().__init__(f"duplicate document id {doc_id!r}")
        self.doc_id = doc_id


@dataclass(frozen=True)
class Document:
    """One scoring unit: a letter, post, review, or any dated text."""

    id: str
    timestamp: date
    text: str

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("document id must be nonempty")
        if not MIN_TIMESTAMP <= self.timestamp <= MAX_TIMESTAMP:
            raise ValueError(
                f"timestamp {self.timestamp.isoformat()} outside "
                f"[{MIN_TIMESTAMP.isoformat()}, {MAX_TIMESTAMP.isoformat()}]")


@dataclass(frozen=True)
class DocumentScore:
    """Disagreement score d with the matched-token count behind it.

    d is None exactly when no token was found in the lexicon (matched=0).
    """

    doc_id: str
    d: float | None
    matched: int
    total_tokens: int

    @property
    def defined(self) -> bool:
        return self.d is not None


def tokenize(text: str) -> list[str]:
    """Lowercased unigram tokens of ``text``.

    Rules: URLs are removed outright; remaining tokens are maximal runs
    of Unicode letters, with apostrophes kept when embedded between
    letters ("don't" stays one token).  Digits, punctuation, and the
    '#' / '@' sigils act as separators, so "#vaccine" yields "vaccine".
    """
    return [m.group(0).lower() for m in _TOKEN_RE.finditer(_URL_RE.sub(" ", text))]


def score_text(text: str, table: WordScoreTable) -> tuple[float | None, int, int]:
    """Score raw text; returns (d, matched, total_tokens)."""
    tokens = tokenize(text)
    neg_scores = []
    for token in tokens:
        entry = table.get(token)
        if entry is not None:
            neg_scores.append(entry.neg)
    matched = len(neg_scores)
    if matched == 0:
        return None, 0, len(tokens)
    return math.fsum(neg_scores) / matched, matched, len(tokens)


def score_document(doc: Document, table: WordScoreTable) -> DocumentScore:
    """Mean negative score over the document's lexicon-matched tokens.

    Repeated tokens contribute once per occurrence; out-of-vocabulary
    tokens are excluded from the denominator.
    """
    d, matched, total = score_text(doc.text, table)
    return DocumentScore(doc.id, d, matched, total)


def score_corpus(docs: Iterable[Document],
                 table: WordScoreTable) -> list[DocumentScore]:
    """Score each document; output order equals input order.

    Per-document scores never interact, so any internal parallelization
    could not change a value; this implementation is sequential.
    """
    seen: set[str] = set()
    scores: list[DocumentScore] = []
    for doc in docs:
        if doc.id in seen:
            raise DuplicateDocId(doc.id)
        seen.add(doc.id)
        scores.append(score_document(doc, table))
    return scores
