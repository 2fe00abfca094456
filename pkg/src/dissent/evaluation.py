"""Median-split validation of the disagreement scorer on labeled corpora.

Continuous scores become binary predictions by thresholding at the lower
median (strict '>' above the median is positive), which avoids any
threshold tuning.  The positive class is the one the score is designed
to surface: negative sentiment for review data, "oppose" for stance data.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .errors import DissentError, StatisticsDegenerateError
from .lexicon import WordScoreTable
from .scoring import score_text

__all__ = [
    "EmptyInput",
    "EvalReport",
    "LabeledScore",
    "LabeledText",
    "LengthMismatch",
    "UnknownLabel",
    "collapse_ukp",
    "evaluate",
    "evaluate_labeled_texts",
    "imdb_gold",
    "load_imdb_dir",
    "load_labeled_tsv",
    "load_ukp_tsv",
    "lower_median",
    "median_split",
    "report_json",
    "report_text",
    "score_labeled",
]


class EmptyInput(StatisticsDegenerateError):
    """No defined scores to split at the median."""


class LengthMismatch(DissentError):
    pass


class UnknownLabel(DissentError):
    def __init__(self, label: str) -> None:
        super().__init__(f"unknown label {label!r}")
        self.label = label


@dataclass(frozen=True)
class LabeledText:
    """A raw evaluation item before scoring."""

    id: str
    label: str
    text: str


@dataclass(frozen=True)
class LabeledScore:
    """A defined score paired with its binary gold class."""

    doc_id: str
    d: float
    gold: bool


@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    accuracy: float
    macro_f1: float
    median: float
    n_excluded_undefined: int


def lower_median(values: Sequence[float]) -> float:
    """The element at index ceil(k/2)-1 of the sorted values."""
    if not values:
        raise EmptyInput("no values")
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def median_split(scores: Sequence[tuple[str, float]]) -> list[tuple[str, bool]]:
    """Predict positive for scores strictly above the lower median.

    Ties at the median predict negative, which keeps the split exactly
    balanced whenever the scores are distinct and k is even.
    """
    if not scores:
        raise EmptyInput("no scores to split")
    median = lower_median([d for _, d in scores])
    return [(doc_id, d > median) for doc_id, d in scores]


_UKP_POSITIVE = {"argument_against", "oppose argument"}
_UKP_NEGATIVE = {"noargument", "no argument", "argument_for", "support argument"}


def collapse_ukp(label: str) -> bool:
    """Binary stance collapse: oppose/against is positive, the rest negative.

    Accepts both the corpus spellings (NoArgument, Argument_for,
    Argument_against) and their prose aliases.
    """
    low = label.strip().lower()
    if low in _UKP_POSITIVE:
        return True
    if low in _UKP_NEGATIVE:
        return False
    raise UnknownLabel(label)


def imdb_gold(label: str) -> bool:
    """Review polarity: gold negative reviews are the positive class."""
    low = label.strip().lower()
    if low in ("neg", "negative"):
        return True
    if low in ("pos", "positive"):
        return False
    raise UnknownLabel(label)


def evaluate(pred: Sequence[bool], gold: Sequence[bool], *,
             median: float = math.nan,
             n_excluded_undefined: int = 0) -> EvalReport:
    """Confusion counts and metrics over the positive class.

    macro_f1 averages the positive-class F1 with the F1 of the swapped
    problem (negative class treated as positive).
    """
    if len(pred) != len(gold):
        raise LengthMismatch(f"{len(pred)} predictions vs {len(gold)} gold labels")
    if not pred:
        raise EmptyInput("nothing to evaluate")
    tp = fp = fn = tn = 0
    for p, g in zip(pred, gold):
        if p and g:
            tp += 1
        elif p and not g:
            fp += 1
        elif not p and g:
            fn += 1
        else:
            tn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall else 0.0)
    accuracy = (tp + tn) / (tp + fp + fn + tn)
    neg_precision = tn / (tn + fn) if tn + fn else 0.0
    neg_recall = tn / (tn + fp) if tn + fp else 0.0
    neg_f1 = (2 * neg_precision * neg_recall / (neg_precision + neg_recall)
              if neg_precision + neg_recall else 0.0)
    return EvalReport(tp=tp, fp=fp, fn=fn, tn=tn, precision=precision,
                      recall=recall, f1=f1, accuracy=accuracy,
                      macro_f1=(f1 + neg_f1) / 2.0, median=median,
                      n_excluded_undefined=n_excluded_undefined)


def score_labeled(texts: Iterable[LabeledText], table: WordScoreTable,
                  gold_fn: Callable[[str], bool]) -> tuple[list[LabeledScore], int]:
    """Score texts and collapse gold labels; returns (scores, n_undefined).

    Items whose score is Undefined cannot sit on either side of a median
    and are excluded (the count is reported, not hidden).
    """
    labeled: list[LabeledScore] = []
    excluded = 0
    for item in texts:
        gold = gold_fn(item.label)
        d, _, _ = score_text(item.text, table)
        if d is None:
            excluded += 1
            continue
        labeled.append(LabeledScore(item.id, d, gold))
    return labeled, excluded


def evaluate_labeled_texts(texts: Iterable[LabeledText], table: WordScoreTable,
                           gold_fn: Callable[[str], bool]) -> EvalReport:
    """Full protocol: score, median-split, compare to gold."""
    labeled, excluded = score_labeled(texts, table, gold_fn)
    if not labeled:
        raise EmptyInput("every item scored Undefined")
    predictions = median_split([(s.doc_id, s.d) for s in labeled])
    median = lower_median([s.d for s in labeled])
    return evaluate([p for _, p in predictions], [s.gold for s in labeled],
                    median=median, n_excluded_undefined=excluded)


def load_imdb_dir(root: str | Path) -> list[LabeledText]:
    """Standard review-directory layout: text files under pos/ and neg/.

    Any depth is accepted (train/test splits are pooled); directories
    not named pos or neg (e.g. unsup) are ignored.  Items are ordered by
    relative path so runs are deterministic.
    """
    root = Path(root)
    items: list[LabeledText] = []
    for path in sorted(root.rglob("*.txt")):
        label = path.parent.name
        if label not in ("pos", "neg"):
            continue
        rel = path.relative_to(root).as_posix()
        items.append(LabeledText(id=rel, label=label,
                                 text=path.read_text(encoding="utf-8")))
    return items


def load_labeled_tsv(path: str | Path) -> list[LabeledText]:
    """Pre-flattened review file: id, label, text; no header."""
    items: list[LabeledText] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise DissentError(f"line {line_no}: expected 3 tab-separated "
                                   f"fields, got {len(fields)}")
            items.append(LabeledText(*fields))
    return items


def load_ukp_tsv(paths: Iterable[str | Path] | str | Path,
                 sentence_col: str = "sentence",
                 label_col: str = "annotation") -> list[LabeledText]:
    """Sentence-level stance TSVs with a header row; topics are pooled.

    ``paths`` may be one file, a directory (all *.tsv inside, sorted), or
    an iterable of files.  Raw tab splitting is used because the corpus
    files are not quote-escaped.
    """
    if isinstance(paths, (str, Path)):
        p = Path(paths)
        file_list = sorted(p.glob("*.tsv")) if p.is_dir() else [p]
    else:
        file_list = [Path(p) for p in paths]
    items: list[LabeledText] = []
    for path in file_list:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
            try:
                header = next(reader)
            except StopIteration:
                continue
            index = {name: i for i, name in enumerate(header)}
            for col in (sentence_col, label_col):
                if col not in index:
                    raise DissentError(f"{path}: no column {col!r} in header")
            for row in reader:
                if not row:
                    continue
                if len(row) != len(header):
                    raise DissentError(f"{path} line {reader.line_num}: "
                                       f"expected {len(header)} fields, got {len(row)}")
                items.append(LabeledText(id=f"{path.name}:{reader.line_num}",
                                         label=row[index[label_col]],
                                         text=row[index[sentence_col]]))
    return items


def report_text(report: EvalReport) -> str:
    lines = [
        "Median-split evaluation",
        f"  tp {report.tp}  fp {report.fp}  fn {report.fn}  tn {report.tn}",
        f"  precision  {report.precision:.4f}",
        f"  recall     {report.recall:.4f}",
        f"  f1         {report.f1:.4f}",
        f"  accuracy   {report.accuracy:.4f}",
        f"  macro f1   {report.macro_f1:.4f}",
        f"  median     {report.median:.6g}",
        f"  excluded (undefined d)  {report.n_excluded_undefined}",
    ]
    return "\n".join(lines)


def report_json(report: EvalReport) -> str:
    payload = {
        "tp": report.tp, "fp": report.fp, "fn": report.fn, "tn": report.tn,
        "precision": report.precision, "recall": report.recall,
        "f1": report.f1, "accuracy": report.accuracy,
        "macro_f1": report.macro_f1, "median": report.median,
        "n_excluded_undefined": report.n_excluded_undefined,
    }
    return json.dumps(payload, sort_keys=True)
