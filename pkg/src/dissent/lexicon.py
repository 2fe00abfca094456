"""SentiWordNet-format lexicon parsing and word-level score tables.

The source format is line oriented and tab separated with six fields per
synset (POS, ID, PosScore, NegScore, SynsetTerms, Gloss); lines starting
with ``#`` are comments.  Synset-level scores are collapsed into a single
(neg, pos) pair per word under a selectable aggregation policy, and the
compiled table can be written to / read from a TSV sidecar so scoring
runs do not re-parse the raw lexicon.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, NamedTuple

from .errors import DissentError

__all__ = [
    "AggregationPolicy",
    "EmptyLexicon",
    "MalformedLine",
    "SynsetRecord",
    "WordScore",
    "WordScoreTable",
    "build_word_table",
    "load_lexicon",
    "load_sentiwordnet",
    "parse_sentiwordnet",
    "read_table",
    "write_table",
]

_POS_TAGS = frozenset("anrvs")

# pos + neg may exceed 1 by at most this much (covers decimal-to-binary
# rounding in the source file)
_SCORE_SUM_SLACK = 1e-9


class MalformedLine(DissentError):
    """A lexicon line that cannot be parsed; parsing is fail-fast."""

    def __init__(self, line_no: int, reason: str) -> None:
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class EmptyLexicon(DissentError):
    """No records / no entries to build a usable table from."""


class AggregationPolicy(enum.Enum):
    """How per-synset scores collapse into one score per word.

    MEAN_ALL_SENSES: unweighted mean over every synset listing the word,
    merged across POS tags (the default).
    FIRST_SENSE: the synset where the word has the lowest sense rank,
    ties broken by lowest synset id.
    RANK_WEIGHTED: mean weighted by 1/sense_rank, normalized per word.
    """

    MEAN_ALL_SENSES = "mean"
    FIRST_SENSE = "first"
    RANK_WEIGHTED = "rank"

    @classmethod
    def from_string(cls, name: str) -> "AggregationPolicy":
        for policy in cls:
            if policy.value == name:
                return policy
        raise ValueError(f"unknown aggregation policy {name!r} "
                         f"(expected one of {[p.value for p in cls]})")


@dataclass(frozen=True)
class SynsetRecord:
    """One parsed synset line.

    ``terms`` holds (lemma, sense_rank) pairs with lemmas lowercased;
    multiword lemmas keep their underscores.  ``gloss`` is retained but
    unused by scoring.
    """

    pos_tag: str
    synset_id: int
    pos_score: float
    neg_score: float
    terms: tuple[tuple[str, int], ...]
    gloss: str


class WordScore(NamedTuple):
    neg: float
    pos: float
    synset_count: int


class WordScoreTable:
    """Immutable, case-insensitive word -> WordScore lookup.

    Keys are stored lowercase; lookups lowercase the query.  Safe for
    unrestricted concurrent reads once constructed.
    """

    __slots__ = ("_entries", "policy")

    def __init__(self, entries: Mapping[str, WordScore],
                 policy: AggregationPolicy | None = None) -> None:
        cleaned: dict[str, WordScore] = {}
        for word, score in entries.items():
            if not (0.0 <= score.neg <= 1.0 and 0.0 <= score.pos <= 1.0):
                raise ValueError(f"score out of [0, 1] for {word!r}")
            if score.synset_count < 1:
                raise ValueError(f"synset_count < 1 for {word!r}")
            cleaned[word.lower()] = score
        self._entries = cleaned
        self.policy = policy

    def get(self, word: str) -> WordScore | None:
        return self._entries.get(word.lower())

    def __contains__(self, word: str) -> bool:
        return word.lower() in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def items(self):
        return self._entries.items()

    def sorted_items(self) -> list[tuple[str, WordScore]]:
        return sorted(self._entries.items())


def _parse_score(line_no: int, name: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise MalformedLine(line_no, f"unparseable {name} {text!r}") from None
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise MalformedLine(line_no, f"{name} {text!r} outside [0, 1]")
    return value


def _parse_terms(line_no: int, text: str) -> tuple[tuple[str, int], ...]:
    parts = text.split()
    if not parts:
        raise MalformedLine(line_no, "empty SynsetTerms field")
    terms = []
    for part in parts:
        lemma, sep, rank_text = part.rpartition("#")
        if not sep or not lemma:
            raise MalformedLine(line_no, f"term {part!r} is not of the form lemma#rank")
        try:
            rank = int(rank_text)
        except ValueError:
            raise MalformedLine(line_no, f"bad sense rank in term {part!r}") from None
        if rank < 1:
            raise MalformedLine(line_no, f"sense rank must be >= 1 in term {part!r}")
        terms.append((lemma.lower(), rank))
    return tuple(terms)


def parse_sentiwordnet(source: Iterable[str]) -> list[SynsetRecord]:
    """Parse tab-separated synset lines into records.

    ``source`` is any iterable of text lines (an open file works).
    Comment lines (leading ``#``) and blank lines are skipped.  The first
    malformed line raises :class:`MalformedLine` with its 1-based number.
    """
    records: list[SynsetRecord] = []
    for line_no, raw in enumerate(source, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 6:
            raise MalformedLine(line_no,
                                f"expected 6 tab-separated fields, got {len(fields)}")
        pos_tag, id_text, pos_text, neg_text, terms_text, gloss = fields
        if pos_tag not in _POS_TAGS:
            raise MalformedLine(line_no, f"unknown POS tag {pos_tag!r}")
        try:
            synset_id = int(id_text)
        except ValueError:
            raise MalformedLine(line_no, f"bad synset id {id_text!r}") from None
        if synset_id < 0:
            raise MalformedLine(line_no, f"negative synset id {synset_id}")
        pos_score = _parse_score(line_no, "PosScore", pos_text)
        neg_score = _parse_score(line_no, "NegScore", neg_text)
        if pos_score + neg_score > 1.0 + _SCORE_SUM_SLACK:
            raise MalformedLine(
                line_no, f"PosScore + NegScore = {pos_score + neg_score} exceeds 1")
        terms = _parse_terms(line_no, terms_text)
        records.append(SynsetRecord(pos_tag, synset_id, pos_score, neg_score,
                                    terms, gloss))
    return records


def load_sentiwordnet(path: str | Path) -> list[SynsetRecord]:
    with open(path, encoding="utf-8") as fh:
        return parse_sentiwordnet(fh)


def build_word_table(
    records: Iterable[SynsetRecord],
    policy: AggregationPolicy = AggregationPolicy.MEAN_ALL_SENSES,
) -> WordScoreTable:
    """Collapse synset records into one (neg, pos) entry per lemma.

    Every lemma appearing in any record gets exactly one entry; POS tags
    are merged.  Multiword (underscored) lemmas are kept in the table even
    though the unigram tokenizer can never produce them.
    """
    grouped: dict[str, list[tuple[int, int, float, float]]] = {}
    for rec in records:
        for lemma, rank in rec.terms:
            grouped.setdefault(lemma, []).append(
                (rank, rec.synset_id, rec.neg_score, rec.pos_score))
    if not grouped:
        raise EmptyLexicon("no synset records to aggregate")

    entries: dict[str, WordScore] = {}
    for lemma, rows in grouped.items():
        if policy is AggregationPolicy.MEAN_ALL_SENSES:
            neg = math.fsum(r[2] for r in rows) / len(rows)
            pos = math.fsum(r[3] for r in rows) / len(rows)
        elif policy is AggregationPolicy.FIRST_SENSE:
            # lowest sense rank wins, ties by lowest synset id
            _, _, neg, pos = min(rows)
        else:
            weights = [1.0 / r[0] for r in rows]
            total = math.fsum(weights)
            neg = math.fsum(w * r[2] for w, r in zip(weights, rows)) / total
            pos = math.fsum(w * r[3] for w, r in zip(weights, rows)) / total
        entries[lemma] = WordScore(neg=neg, pos=pos, synset_count=len(rows))
    return WordScoreTable(entries, policy)


def write_table(table: WordScoreTable, path: str | Path) -> None:
    """Write the compiled table sidecar: word, neg, pos, synset_count.

    Rows are sorted by word and scores printed with 6 decimal places,
    so identical tables always produce byte-identical files.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for word, score in table.sorted_items():
            fh.write(f"{word}\t{score.neg:.6f}\t{score.pos:.6f}"
                     f"\t{score.synset_count}\n")


def read_table(path: str | Path) -> WordScoreTable:
    """Read a table sidecar written by :func:`write_table`."""
    entries: dict[str, WordScore] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise MalformedLine(line_no,
                                    f"expected 4 tab-separated fields, got {len(fields)}")
            word, neg_text, pos_text, count_text = fields
            neg = _parse_score(line_no, "neg", neg_text)
            pos = _parse_score(line_no, "pos", pos_text)
            try:
                count = int(count_text)
            except ValueError:
                raise MalformedLine(line_no, f"bad synset_count {count_text!r}") from None
            if count < 1:
                raise MalformedLine(line_no, f"synset_count {count} < 1")
            if word.lower() in entries:
                raise MalformedLine(line_no, f"duplicate word {word!r}")
            entries[word.lower()] = WordScore(neg, pos, count)
    if not entries:
        raise EmptyLexicon(f"no entries in table file {path}")
    return WordScoreTable(entries, policy=None)


def load_lexicon(
    path: str | Path,
    fmt: str = "auto",
    policy: AggregationPolicy = AggregationPolicy.MEAN_ALL_SENSES,
) -> WordScoreTable:
    """Load a word table from either a raw lexicon or a compiled sidecar.

    ``fmt`` is "sentiwordnet", "table", or "auto" (detect by the field
    count of the first data line: 6 = raw lexicon, 4 = sidecar).
    """
    if fmt == "auto":
        fmt = _detect_format(path)
    if fmt == "sentiwordnet":
        return build_word_table(load_sentiwordnet(path), policy)
    if fmt == "table":
        return read_table(path)
    raise ValueError(f"unknown lexicon format {fmt!r}")


def _detect_format(path: str | Path) -> str:
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            n = len(line.split("\t"))
            if n == 6:
                return "sentiwordnet"
            if n == 4:
                return "table"
            raise MalformedLine(line_no,
                                f"cannot detect lexicon format from {n} fields")
    raise EmptyLexicon(f"no data lines in {path}")
