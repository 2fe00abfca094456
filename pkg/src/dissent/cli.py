"""Command-line front end wiring the full measurement pipeline.

Every option can also come from a TOML config file (``--config`` or the
``DISSENT_CONFIG`` environment variable); command-line flags win.  All
intermediate artifacts are plain TSV/JSON-lines so each stage can be
inspected and diffed, and all outputs are byte-stable across runs and
platforms for a fixed config and seed.

Exit codes: 0 ok, 2 input/config error, 3 degenerate-statistics error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .corpus import (
    INTERMEDIATE_SCHEMA,
    CorpusFormat,
    CorpusRecord,
    CorpusSchema,
    Granularity,
    default_vaccine_patterns,
    filter_corpus,
    ingest,
    load_keyword_file,
    period_of,
    sample_per_period,
    write_jsonl,
)
from .errors import DissentError
from .evaluation import (
    collapse_ukp,
    evaluate_labeled_texts,
    imdb_gold,
    load_imdb_dir,
    load_labeled_tsv,
    load_ukp_tsv,
    report_json,
    report_text,
)
from .lexicon import AggregationPolicy, build_word_table, load_lexicon, load_sentiwordnet, write_table
from .scoring import score_corpus
from .timeseries import (
    ScoredRow,
    Series,
    aggregate,
    align,
    fit_report_json,
    fit_report_text,
    normalize,
    prais_winsten,
    read_scored_tsv,
    read_series_tsv,
    write_scored_tsv,
    write_series_tsv,
)

# default sampling seed; override with --seed or `seed` in the config file
DEFAULT_SEED = 0x5EED

CONFIG_ENV_VAR = "DISSENT_CONFIG"


class Options:
    """Flag values with config-file fallback (flags win)."""

    def __init__(self, args: argparse.Namespace, config: dict) -> None:
        self._args = args
        self._config = config

    def get(self, key: str, default=None):
        value = getattr(self._args, key, None)
        if value is not None:
            return value
        if key in self._config:
            return self._config[key]
        return default

    def require(self, key: str):
        value = self.get(key)
        if value is None:
            flag = "--" + key.replace("_", "-")
            raise DissentError(f"{flag} is required (flag or config key {key!r})")
        return value


def _load_config(args: argparse.Namespace) -> dict:
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return {}
    with open(path, "rb") as fh:
        config = tomllib.load(fh)
    if not isinstance(config, dict):
        raise DissentError(f"config file {path} is not a table of keys")
    return config


def _write_text(path: Path, text: str) -> None:
    # explicit newline so outputs are byte-identical on every platform
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _schema(opt: Options) -> CorpusSchema:
    id_field = opt.get("id_field", "id")
    if id_field in ("", "none", "-"):
        id_field = None
    delimiter = opt.get("delimiter", "\t")
    if delimiter == "\\t":
        delimiter = "\t"
    return CorpusSchema(
        id_field=id_field,
        timestamp_field=opt.get("timestamp_field", "timestamp"),
        text_field=opt.get("text_field", "text"),
        label_field=opt.get("label_field") or None,
        timestamp_format=opt.get("timestamp_format") or None,
        delimiter=delimiter,
    )


def _read_corpus(opt: Options) -> list[CorpusRecord]:
    return ingest(opt.require("corpus"), _schema(opt),
                  CorpusFormat(opt.get("format", "json-lines")))


def _load_table(opt: Options):
    policy = AggregationPolicy.from_string(opt.get("policy", "mean"))
    return load_lexicon(opt.require("lexicon"),
                        opt.get("lexicon_format", "auto"), policy)


def _granularity(opt: Options) -> Granularity:
    return Granularity(opt.get("granularity", "year"))


def _patterns(opt: Options):
    keyword_path = opt.get("keywords")
    if keyword_path:
        return load_keyword_file(keyword_path)
    if opt.get("builtin_keywords"):
        return default_vaccine_patterns()
    return None


def _scored_rows(records: Sequence[CorpusRecord], table,
                 granularity: Granularity) -> list[ScoredRow]:
    scores = score_corpus(records, table)
    return [ScoredRow(score.doc_id, period_of(rec.timestamp, granularity),
                      score.d, score.matched, score.total_tokens)
            for rec, score in zip(records, scores)]


def cmd_lexicon_build(opt: Options) -> int:
    records = load_sentiwordnet(opt.require("input"))
    policy = AggregationPolicy.from_string(opt.get("policy", "mean"))
    table = build_word_table(records, policy)
    out = opt.require("output")
    write_table(table, out)
    print(f"{len(table)} words ({policy.value} aggregation) -> {out}")
    return 0


def cmd_score(opt: Options) -> int:
    table = _load_table(opt)
    records = _read_corpus(opt)
    rows = _scored_rows(records, table, _granularity(opt))
    out = opt.require("output")
    write_scored_tsv(rows, out)
    defined = sum(1 for r in rows if r.d is not None)
    print(f"scored {len(rows)} documents ({defined} defined) -> {out}")
    return 0


def cmd_filter(opt: Options) -> int:
    records = _read_corpus(opt)
    patterns = _patterns(opt)
    if patterns is None:
        raise DissentError("--keywords FILE or --builtin-keywords is required")
    kept = filter_corpus(records, patterns)
    out = opt.require("output")
    write_jsonl(kept, out)
    print(f"kept {len(kept)} of {len(records)} records -> {out}")
    return 0


def cmd_sample(opt: Options) -> int:
    records = _read_corpus(opt)
    n = int(opt.require("per_period"))
    seed = int(opt.get("seed", DEFAULT_SEED))
    sampled = sample_per_period(records, n, seed, _granularity(opt))
    out = opt.require("output")
    write_jsonl(sampled, out)
    print(f"sampled {len(sampled)} of {len(records)} records (seed {seed}) -> {out}")
    return 0


def cmd_aggregate(opt: Options) -> int:
    rows = read_scored_tsv(opt.require("scores"))
    series = aggregate(rows)
    out = opt.require("output")
    write_series_tsv(series.to_series(), out)
    print(f"aggregated {len(series.points)} periods -> {out}")
    return 0


def cmd_normalize(opt: Options) -> int:
    series = read_series_tsv(opt.require("series"))
    norm = normalize(series)
    out = opt.require("output")
    write_series_tsv(norm.to_series(), out)
    print(f"normalized {len(norm.points)} periods "
          f"(source range {norm.source_min!r}..{norm.source_max!r}) -> {out}")
    return 0


def cmd_correlate(opt: Options) -> int:
    series_a = read_series_tsv(opt.require("series_a"))
    series_b = read_series_tsv(opt.require("series_b"))
    aligned = align(series_a, series_b)
    fit = prais_winsten(aligned.pairs(), tol=float(opt.get("tol", 1e-6)),
                        max_iter=int(opt.get("max_iter", 100)))
    print(fit_report_text(fit))
    out = opt.get("output")
    if out:
        _write_text(Path(out), fit_report_json(fit) + "\n")
    return 0


def _plot_tsv(columns: list[tuple[str, Series]]) -> str:
    """Two columns (period, value) per series, rows padded when lengths differ."""
    header = "\t".join(f"period_{name}\tvalue_{name}" for name, _ in columns)
    height = max(len(series.points) for _, series in columns)
    lines = [header]
    for i in range(height):
        cells = []
        for _, series in columns:
            if i < len(series.points):
                point = series.points[i]
                cells.extend([point.period.label(), repr(point.value)])
            else:
                cells.extend(["", ""])
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def cmd_pipeline(opt: Options) -> int:
    out_dir = Path(opt.require("output_dir"))
    out_dir.mkdir(parents=True, exist_ok=True)
    table = _load_table(opt)
    granularity = _granularity(opt)
    records = _read_corpus(opt)

    patterns = _patterns(opt)
    if patterns is not None:
        records = filter_corpus(records, patterns)
        write_jsonl(records, out_dir / "filtered.jsonl")
        records = ingest(out_dir / "filtered.jsonl", INTERMEDIATE_SCHEMA,
                         CorpusFormat.JSON_LINES)
        print(f"filtered -> {out_dir / 'filtered.jsonl'} ({len(records)} records)")

    sample_n = opt.get("sample_n")
    if sample_n is not None:
        seed = int(opt.get("seed", DEFAULT_SEED))
        records = sample_per_period(records, int(sample_n), seed, granularity)
        write_jsonl(records, out_dir / "sampled.jsonl")
        records = ingest(out_dir / "sampled.jsonl", INTERMEDIATE_SCHEMA,
                         CorpusFormat.JSON_LINES)
        print(f"sampled -> {out_dir / 'sampled.jsonl'} ({len(records)} records, seed {seed})")

    write_scored_tsv(_scored_rows(records, table, granularity),
                     out_dir / "scored.tsv")
    rows = read_scored_tsv(out_dir / "scored.tsv")
    print(f"scored -> {out_dir / 'scored.tsv'} ({len(rows)} documents)")

    aggregated = aggregate(rows)
    write_series_tsv(aggregated.to_series(), out_dir / "aggregated.tsv")
    raw_series = read_series_tsv(out_dir / "aggregated.tsv")
    normalized = normalize(raw_series)
    write_series_tsv(normalized.to_series(), out_dir / "series.tsv")
    print(f"series -> {out_dir / 'series.tsv'} ({len(normalized.points)} periods)")

    external = None
    correlate_path = opt.get("correlate")
    if correlate_path:
        external = read_series_tsv(correlate_path)
        aligned = align(raw_series, external)
        fit = prais_winsten(aligned.pairs(), tol=float(opt.get("tol", 1e-6)),
                            max_iter=int(opt.get("max_iter", 100)))
        _write_text(out_dir / "fit.txt", fit_report_text(fit) + "\n")
        _write_text(out_dir / "fit.json", fit_report_json(fit) + "\n")
        print(fit_report_text(fit))

    if opt.get("plot_data"):
        columns = [("disagreement", normalized.to_series())]
        if external is not None:
            columns.append(("external", external))
        _write_text(out_dir / "plot.tsv", _plot_tsv(columns))
        print(f"plot data -> {out_dir / 'plot.tsv'}")
    return 0


_DATASETS = {
    "imdb-dir": (load_imdb_dir, imdb_gold),
    "imdb-tsv": (load_labeled_tsv, imdb_gold),
    "ukp": (load_ukp_tsv, collapse_ukp),
}


def cmd_evaluate(opt: Options) -> int:
    dataset = opt.require("dataset")
    if dataset not in _DATASETS:
        raise DissentError(f"unknown dataset {dataset!r} "
                           f"(expected one of {sorted(_DATASETS)})")
    loader, gold_fn = _DATASETS[dataset]
    items = loader(opt.require("data"))
    table = _load_table(opt)
    report = evaluate_labeled_texts(items, table, gold_fn)
    print(report_text(report))
    out = opt.get("output")
    if out:
        _write_text(Path(out), report_json(report) + "\n")
    return 0


def _add_schema_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=[f.value for f in CorpusFormat],
                        help="corpus file format (default json-lines)")
    parser.add_argument("--id-field", dest="id_field",
                        help="id column/key; 'none' synthesizes file:line ids (default id)")
    parser.add_argument("--timestamp-field", dest="timestamp_field",
                        help="timestamp column/key (default timestamp)")
    parser.add_argument("--text-field", dest="text_field",
                        help="text column/key (default text)")
    parser.add_argument("--label-field", dest="label_field",
                        help="gold label column/key (default unmapped)")
    parser.add_argument("--timestamp-format", dest="timestamp_format",
                        help="strptime format; default accepts YYYY-MM-DD and bare YYYY")
    parser.add_argument("--delimiter", help="delimited-format separator (default tab)")


def _add_lexicon_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lexicon", help="raw lexicon or compiled table file")
    parser.add_argument("--lexicon-format", dest="lexicon_format",
                        choices=["auto", "sentiwordnet", "table"],
                        help="input kind (default auto-detect)")
    parser.add_argument("--policy", choices=[p.value for p in AggregationPolicy],
                        help="sense aggregation policy (default mean)")


def _add_keyword_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--keywords", help="keyword pattern file (one per line)")
    parser.add_argument("--builtin-keywords", dest="builtin_keywords",
                        action="store_const", const=True,
                        help="use the bundled vaccine keyword list")


def build_parser() -> argparse.ArgumentParser:
    root = argparse.ArgumentParser(
        prog="dissent",
        description="Disagreement measurement for longitudinal text corpora.")
    root.add_argument("--config",
                      help=f"TOML config file (default ${CONFIG_ENV_VAR})")
    sub = root.add_subparsers(dest="command", metavar="command")

    lex = sub.add_parser("lexicon", help="lexicon table commands")
    lex_sub = lex.add_subparsers(dest="subcommand", metavar="subcommand")
    build = lex_sub.add_parser("build", help="compile a word score table")
    build.add_argument("--input", help="raw lexicon file")
    build.add_argument("--output", help="table sidecar to write")
    build.add_argument("--policy", choices=[p.value for p in AggregationPolicy])
    build.set_defaults(func=cmd_lexicon_build)

    score = sub.add_parser("score", help="score each document")
    score.add_argument("--corpus")
    score.add_argument("--granularity", choices=[g.value for g in Granularity])
    score.add_argument("--output")
    _add_lexicon_flags(score)
    _add_schema_flags(score)
    score.set_defaults(func=cmd_score)

    filt = sub.add_parser("filter", help="keep records matching keywords")
    filt.add_argument("--corpus")
    filt.add_argument("--output", help="filtered corpus (JSON lines)")
    _add_keyword_flags(filt)
    _add_schema_flags(filt)
    filt.set_defaults(func=cmd_filter)

    samp = sub.add_parser("sample", help="seeded per-period sampling")
    samp.add_argument("--corpus")
    samp.add_argument("--per-period", dest="per_period", type=int,
                      help="records to keep per period")
    samp.add_argument("--seed", type=int,
                      help=f"sampling seed (default {DEFAULT_SEED:#x})")
    samp.add_argument("--granularity", choices=[g.value for g in Granularity])
    samp.add_argument("--output", help="sampled corpus (JSON lines)")
    _add_schema_flags(samp)
    samp.set_defaults(func=cmd_sample)

    agg = sub.add_parser("aggregate", help="per-period mean of scores")
    agg.add_argument("--scores", help="scored TSV from the score step")
    agg.add_argument("--output", help="series TSV to write")
    agg.set_defaults(func=cmd_aggregate)

    norm = sub.add_parser("normalize", help="min-max rescale a series to [0, 1]")
    norm.add_argument("--series")
    norm.add_argument("--output")
    norm.set_defaults(func=cmd_normalize)

    corr = sub.add_parser("correlate",
                          help="Prais-Winsten fit of series b on series a")
    corr.add_argument("--series-a", dest="series_a", help="regressor series")
    corr.add_argument("--series-b", dest="series_b", help="response series")
    corr.add_argument("--tol", type=float, help="rho convergence tolerance")
    corr.add_argument("--max-iter", dest="max_iter", type=int)
    corr.add_argument("--output", help="write the single-line JSON fit record here")
    corr.set_defaults(func=cmd_correlate)

    pipe = sub.add_parser("pipeline",
                          help="filter -> sample -> score -> aggregate -> normalize")
    pipe.add_argument("--corpus")
    pipe.add_argument("--granularity", choices=[g.value for g in Granularity])
    pipe.add_argument("--sample-n", dest="sample_n", type=int,
                      help="per-period sample size (omit to keep everything)")
    pipe.add_argument("--seed", type=int,
                      help=f"sampling seed (default {DEFAULT_SEED:#x})")
    pipe.add_argument("--output-dir", dest="output_dir")
    pipe.add_argument("--correlate", help="external series TSV to fit against")
    pipe.add_argument("--tol", type=float)
    pipe.add_argument("--max-iter", dest="max_iter", type=int)
    pipe.add_argument("--plot-data", dest="plot_data", action="store_const",
                      const=True, help="emit plot.tsv with paired period/value columns")
    _add_lexicon_flags(pipe)
    _add_keyword_flags(pipe)
    _add_schema_flags(pipe)
    pipe.set_defaults(func=cmd_pipeline)

    ev = sub.add_parser("evaluate", help="median-split validation on a labeled corpus")
    ev.add_argument("--dataset", choices=sorted(_DATASETS))
    ev.add_argument("--data", help="dataset root directory or file")
    ev.add_argument("--output", help="write the JSON report here")
    _add_lexicon_flags(ev)
    ev.set_defaults(func=cmd_evaluate)

    return root


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        print("error: no command given", file=sys.stderr)
        return 2
    try:
        opt = Options(args, _load_config(args))
        return args.func(opt)
    except DissentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
