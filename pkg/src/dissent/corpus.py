"""Longitudinal corpus ingestion, keyword filtering, and per-period sampling.

Corpora arrive as delimited files (header row required) or JSON lines;
a schema config maps field names.  Filtering uses the wildcard keyword
patterns: '%'-delimited patterns match as case-insensitive substrings
(SQL-LIKE restricted to "contains"), plain single-word patterns match
whole tokens, and anything else (phrases, obfuscated spellings such as
"va((ine") matches as a raw substring of the lowercased text.
"""

from __future__ import annotations

import csv
import enum
import functools
import json
import re
from dataclasses import dataclass
from datetime import date, datetime
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DissentError
from .scoring import Document, tokenize

__all__ = [
    "CorpusFormat",
    "CorpusRecord",
    "CorpusSchema",
    "EmptyPatternList",
    "Granularity",
    "INTERMEDIATE_SCHEMA",
    "KeywordPattern",
    "MissingField",
    "ParseError",
    "PatternKind",
    "PeriodKey",
    "SplitMix64",
    "default_vaccine_patterns",
    "filter_corpus",
    "ingest",
    "load_keyword_file",
    "match_keyword",
    "parse_patterns",
    "period_of",
    "sample_per_period",
    "write_jsonl",
]


class ParseError(DissentError):
    """A corpus row that cannot be parsed; ingestion is fail-fast."""

    def __init__(self, line_no: int, cause: str) -> None:
        super().__init__(f"line {line_no}: {cause}")
        self.line_no = line_no
        self.cause = cause


class MissingField(DissentError):
    def __init__(self, name: str) -> None:
        super().__init__(f"missing field {name!r}")
        self.name = name


class EmptyPatternList(DissentError):
    """filter_corpus needs at least one keyword pattern."""


class Granularity(str, enum.Enum):
    YEAR = "year"
    MONTH = "month"


@functools.total_ordering
@dataclass(frozen=True)
class PeriodKey:
    """An aggregation bucket: a calendar year or a calendar month."""

    granularity: Granularity
    year: int
    month: int | None = None

    def __post_init__(self) -> None:
        if self.granularity is Granularity.MONTH:
            if self.month is None or not 1 <= self.month <= 12:
                raise ValueError(f"monthly period needs month 1..12, got {self.month}")
        elif self.month is not None:
            raise ValueError("yearly period must not carry a month")

    def _key(self) -> tuple[int, int]:
        return (self.year, self.month or 0)

    def __lt__(self, other: "PeriodKey") -> bool:
        if not isinstance(other, PeriodKey):
            return NotImplemented
        if self.granularity is not other.granularity:
            raise ValueError("cannot order periods of different granularity")
        return self._key() < other._key()

    def label(self) -> str:
        if self.granularity is Granularity.YEAR:
            return f"{self.year:04d}"
        return f"{self.year:04d}-{self.month:02d}"

    @classmethod
    def parse(cls, text: str) -> "PeriodKey":
        """Parse "YYYY" or "YYYY-MM" labels."""
        m = re.fullmatch(r"(\d{4})(?:-(\d{2}))?", text.strip())
        if m is None:
            raise ValueError(f"bad period label {text!r} (expected YYYY or YYYY-MM)")
        year = int(m.group(1))
        if m.group(2) is None:
            return cls(Granularity.YEAR, year)
        return cls(Granularity.MONTH, year, int(m.group(2)))

    def next(self) -> "PeriodKey":
        """The immediately following period (for gap detection)."""
        if self.granularity is Granularity.YEAR:
            return PeriodKey(Granularity.YEAR, self.year + 1)
        if self.month == 12:
            return PeriodKey(Granularity.MONTH, self.year + 1, 1)
        return PeriodKey(Granularity.MONTH, self.year, self.month + 1)


def period_of(day: date, granularity: Granularity) -> PeriodKey:
    if granularity is Granularity.YEAR:
        return PeriodKey(Granularity.YEAR, day.year)
    return PeriodKey(Granularity.MONTH, day.year, day.month)


@dataclass(frozen=True)
class CorpusRecord(Document):
    """A document plus an optional gold label (for validation corpora)."""

    gold_label: str | None = None


class CorpusFormat(str, enum.Enum):
    DELIMITED = "delimited"
    JSON_LINES = "json-lines"


@dataclass(frozen=True)
class CorpusSchema:
    """Field mapping for corpus files.

    ``id_field`` None synthesizes ids as "<filename>:<line_no>".
    ``timestamp_format`` None accepts ISO dates (YYYY-MM-DD) and bare
    years (YYYY, pinned to July 1); otherwise a strptime format string.
    ``delimiter`` applies to delimited files only.
    """

    id_field: str | None = "id"
    timestamp_field: str = "timestamp"
    text_field: str = "text"
    label_field: str | None = None
    timestamp_format: str | None = None
    delimiter: str = "\t"


# schema of the JSON-lines files the pipeline writes between stages
INTERMEDIATE_SCHEMA = CorpusSchema(id_field="id", timestamp_field="timestamp",
                                   text_field="text", label_field=None)

_YEAR_RE = re.compile(r"\d{4}")


def _parse_date(text: str, fmt: str | None) -> date:
    s = text.strip()
    if fmt is None:
        if _YEAR_RE.fullmatch(s):
            return date(int(s), 7, 1)
        return date.fromisoformat(s)
    parsed = datetime.strptime(s, fmt)
    if fmt == "%Y":
        # year-only sources get the same mid-year pin as the default path
        return date(parsed.year, 7, 1)
    return parsed.date()


def ingest(path: str | Path, schema: CorpusSchema = CorpusSchema(),
           fmt: CorpusFormat = CorpusFormat.JSON_LINES) -> list[CorpusRecord]:
    """Read a corpus file into records, preserving file order.

    Fail-fast: the first bad row raises :class:`ParseError` with its
    physical line number; a row lacking a mapped field raises
    :class:`MissingField`.  When ``schema.label_field`` is mapped, every
    record must carry a label (all-or-none within one file).
    """
    path = Path(path)
    if fmt is CorpusFormat.JSON_LINES:
        rows = _iter_jsonl(path, schema)
    else:
        rows = _iter_delimited(path, schema)

    records: list[CorpusRecord] = []
    seen_ids: set[str] = set()
    for line_no, rec_id, ts_text, text, label in rows:
        try:
            day = _parse_date(ts_text, schema.timestamp_format)
        except ValueError as exc:
            raise ParseError(line_no, f"bad timestamp {ts_text!r}: {exc}") from None
        try:
            record = CorpusRecord(id=rec_id, timestamp=day, text=text,
                                  gold_label=label)
        except ValueError as exc:
            raise ParseError(line_no, str(exc)) from None
        if record.id in seen_ids:
            raise ParseError(line_no, f"duplicate id {record.id!r}")
        seen_ids.add(record.id)
        records.append(record)
    return records


def _iter_jsonl(path: Path, schema: CorpusSchema):
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(line_no, f"bad JSON: {exc}") from None
            if not isinstance(obj, dict):
                raise ParseError(line_no, "JSON line is not an object")
            rec_id = (_field(obj, schema.id_field) if schema.id_field
                      else f"{path.name}:{line_no}")
            ts_text = _field(obj, schema.timestamp_field)
            text = obj.get(schema.text_field)
            if text is None:
                raise MissingField(schema.text_field)
            if not isinstance(text, str):
                raise ParseError(line_no, f"field {schema.text_field!r} is not a string")
            label = (str(_field(obj, schema.label_field))
                     if schema.label_field else None)
            yield line_no, str(rec_id), str(ts_text), text, label


def _field(obj: dict, name: str):
    value = obj.get(name)
    if value is None:
        raise MissingField(name)
    return value


def _iter_delimited(path: Path, schema: CorpusSchema):
    if len(schema.delimiter) != 1:
        raise DissentError(f"delimiter must be one character, got {schema.delimiter!r}")
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=schema.delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingField(schema.text_field) from None
        index: dict[str, int] = {name: i for i, name in enumerate(header)}
        for name in (schema.text_field, schema.timestamp_field):
            if name not in index:
                raise MissingField(name)
        for name in (schema.id_field, schema.label_field):
            if name is not None and name not in index:
                raise MissingField(name)
        for row in reader:
            line_no = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(line_no,
                                 f"expected {len(header)} fields, got {len(row)}")
            rec_id = (row[index[schema.id_field]] if schema.id_field
                      else f"{path.name}:{line_no}")
            if schema.id_field and not rec_id:
                raise MissingField(schema.id_field)
            label = None
            if schema.label_field:
                label = row[index[schema.label_field]]
                if not label:
                    raise MissingField(schema.label_field)
            yield (line_no, rec_id, row[index[schema.timestamp_field]],
                   row[index[schema.text_field]], label)


def write_jsonl(records: Iterable[CorpusRecord], path: str | Path) -> None:
    """Lossless corpus serialization; ingest() round-trips it exactly."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            obj: dict = {"id": rec.id, "timestamp": rec.timestamp.isoformat(),
                         "text": rec.text}
            if rec.gold_label is not None:
                obj["label"] = rec.gold_label
            fh.write(json.dumps(obj, ensure_ascii=True, sort_keys=True))
            fh.write("\n")


class PatternKind(enum.Enum):
    SUBSTRING = "substring"
    WHOLE_TOKEN = "whole-token"


@dataclass(frozen=True)
class KeywordPattern:
    raw: str
    kind: PatternKind
    segments: tuple[str, ...]

    @classmethod
    def from_raw(cls, raw: str) -> "KeywordPattern":
        """Classify a raw keyword.

        '%' anywhere makes a wildcard pattern whose literal segments must
        appear in order.  A pattern that is itself one clean token matches
        whole tokens.  Everything else (phrases, hyphenated or obfuscated
        spellings) matches as one literal substring of the raw text.
        """
        if "%" in raw:
            segments = tuple(s for s in raw.lower().split("%") if s)
            return cls(raw, PatternKind.SUBSTRING, segments)
        tokens = tokenize(raw)
        if len(tokens) == 1 and tokens[0] == raw.lower():
            return cls(raw, PatternKind.WHOLE_TOKEN, (raw.lower(),))
        return cls(raw, PatternKind.SUBSTRING, (raw.lower(),))


def _match_prepared(low: str, tokens: frozenset[str],
                    pattern: KeywordPattern) -> bool:
    if pattern.kind is PatternKind.WHOLE_TOKEN:
        return pattern.segments[0] in tokens
    pos = 0
    for segment in pattern.segments:
        hit = low.find(segment, pos)
        if hit < 0:
            return False
        pos = hit + len(segment)
    return True


def match_keyword(text: str, pattern: KeywordPattern) -> bool:
    """Case-insensitive match of one pattern against one text."""
    return _match_prepared(text.lower(), frozenset(tokenize(text)), pattern)


def parse_patterns(lines: Iterable[str]) -> list[KeywordPattern]:
    """One pattern per line; '#' lines are comments, blanks skipped."""
    patterns = []
    for raw in lines:
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        patterns.append(KeywordPattern.from_raw(line.strip()))
    return patterns


def load_keyword_file(path: str | Path) -> list[KeywordPattern]:
    with open(path, encoding="utf-8") as fh:
        return parse_patterns(fh)


def default_vaccine_patterns() -> list[KeywordPattern]:
    """The bundled vaccine keyword list."""
    text = (resources.files("dissent") / "data" / "vaccine_keywords.txt").read_text("utf-8")
    return parse_patterns(text.splitlines())


def filter_corpus(records: Iterable[CorpusRecord],
                  patterns: Sequence[KeywordPattern]) -> list[CorpusRecord]:
    """Records matching at least one pattern, original order preserved."""
    if not patterns:
        raise EmptyPatternList("no keyword patterns given")
    kept = []
    for rec in records:
        low = rec.text.lower()
        tokens = frozenset(tokenize(rec.text))
        if any(_match_prepared(low, tokens, p) for p in patterns):
            kept.append(rec)
    return kept


_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    # splitmix64 finalizer
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


class SplitMix64:
    """Tiny 64-bit-state PRNG; bit-identical streams on every platform."""

    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix64(self._state)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound), unbiased via rejection."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % bound


def _period_seed(seed: int, period: PeriodKey) -> int:
    # derive one independent stream per period from the run seed
    return _mix64((seed & _MASK64) ^ _mix64(period.year * 32 + (period.month or 0)))


def sample_per_period(records: Iterable[CorpusRecord], n: int, seed: int,
                      granularity: Granularity) -> list[CorpusRecord]:
    """Uniform sample without replacement of min(n, count) per period.

    Deterministic for a given seed regardless of input order and of
    platform; output sorted by (period, id).
    """
    if n <= 0:
        raise ValueError("sample size must be positive")
    by_period: dict[PeriodKey, list[CorpusRecord]] = {}
    for rec in records:
        by_period.setdefault(period_of(rec.timestamp, granularity), []).append(rec)

    sampled: list[CorpusRecord] = []
    for period in sorted(by_period):
        pool = sorted(by_period[period], key=lambda r: r.id)
        if len(pool) <= n:
            chosen = pool
        else:
            rng = SplitMix64(_period_seed(seed, period))
            indices = list(range(len(pool)))
            # partial Fisher-Yates: the first n slots are the sample
            for i in range(n):
                j = i + rng.below(len(pool) - i)
                indices[i], indices[j] = indices[j], indices[i]
            chosen = sorted((pool[k] for k in indices[:n]), key=lambda r: r.id)
        sampled.extend(chosen)
    return sampled
