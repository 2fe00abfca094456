"""Disagreement measurement for longitudinal text corpora.

Pipeline: parse a sentiment lexicon into a word score table, score each
document as the mean negative score of its lexicon-matched tokens,
aggregate per year or month, min-max normalize, and test association
with an external per-period series via Prais-Winsten AR(1) regression.
A median-split harness validates the scorer against labeled corpora.
"""

from .corpus import (
    CorpusFormat,
    CorpusRecord,
    CorpusSchema,
    Granularity,
    KeywordPattern,
    PeriodKey,
    default_vaccine_patterns,
    filter_corpus,
    ingest,
    match_keyword,
    period_of,
    sample_per_period,
)
from .errors import DissentError, StatisticsDegenerateError
from .evaluation import (
    EvalReport,
    LabeledScore,
    LabeledText,
    collapse_ukp,
    evaluate,
    evaluate_labeled_texts,
    median_split,
)
from .lexicon import (
    AggregationPolicy,
    SynsetRecord,
    WordScore,
    WordScoreTable,
    build_word_table,
    load_lexicon,
    parse_sentiwordnet,
)
from .scoring import Document, DocumentScore, score_corpus, score_document, tokenize
from .timeseries import (
    AggregatedSeries,
    AlignedPairs,
    NormalizedSeries,
    PraisWinstenFit,
    Series,
    aggregate,
    align,
    normalize,
    ols,
    prais_winsten,
    student_t_two_sided_p,
)

__version__ = "0.1.0"

__all__ = [
    "AggregatedSeries",
    "AggregationPolicy",
    "AlignedPairs",
    "CorpusFormat",
    "CorpusRecord",
    "CorpusSchema",
    "DissentError",
    "Document",
    "DocumentScore",
    "EvalReport",
    "Granularity",
    "KeywordPattern",
    "LabeledScore",
    "LabeledText",
    "NormalizedSeries",
    "PeriodKey",
    "PraisWinstenFit",
    "Series",
    "StatisticsDegenerateError",
    "SynsetRecord",
    "WordScore",
    "WordScoreTable",
    "__version__",
    "aggregate",
    "align",
    "build_word_table",
    "collapse_ukp",
    "default_vaccine_patterns",
    "evaluate",
    "evaluate_labeled_texts",
    "filter_corpus",
    "ingest",
    "load_lexicon",
    "match_keyword",
    "median_split",
    "normalize",
    "ols",
    "parse_sentiwordnet",
    "period_of",
    "prais_winsten",
    "sample_per_period",
    "score_corpus",
    "score_document",
    "student_t_two_sided_p",
    "tokenize",
]
