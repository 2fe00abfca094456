"""Per-period aggregation, normalization, alignment, and AR(1) regression.

The regression is iterated feasible GLS with the first observation
retained through the sqrt(1 - rho^2) scaling, plus a two-sided Student-t
significance test on the transformed-model slope.  Everything here is a
pure function over immutable inputs and uses compensated summation so
results are bit-identical across platforms.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .corpus import Granularity, ParseError, PeriodKey
from .errors import StatisticsDegenerateError

__all__ = [
    "AggregatePoint",
    "AggregatedSeries",
    "AlignedPairs",
    "ConstantRegressor",
    "DegenerateSeries",
    "NoDefinedScores",
    "NormalizedSeries",
    "OlsFit",
    "PraisWinstenFit",
    "ScoredRow",
    "Series",
    "SeriesPoint",
    "TooFewPoints",
    "aggregate",
    "align",
    "fit_report_json",
    "fit_report_text",
    "normalize",
    "ols",
    "prais_winsten",
    "read_scored_tsv",
    "read_series_tsv",
    "student_t_two_sided_p",
    "write_scored_tsv",
    "write_series_tsv",
]

logger = logging.getLogger(__name__)

MIN_ALIGNED_POINTS = 5


class NoDefinedScores(StatisticsDegenerateError):
    """Every score in every period was Undefined."""


class DegenerateSeries(StatisticsDegenerateError):
    """min-max normalization is undefined (constant or too-short series)."""


class TooFewPoints(StatisticsDegenerateError):
    def __init__(self, m: int, minimum: int = MIN_ALIGNED_POINTS) -> None:
        super().__init__(f"{m} points; need at least {minimum}")
        self.m = m


class ConstantRegressor(StatisticsDegenerateError):
    """The regressor has zero variance; no slope can be fit."""


@dataclass(frozen=True)
class ScoredRow:
    """One scored-document row as carried between pipeline stages."""

    doc_id: str
    period: PeriodKey
    d: float | None
    matched: int
    total_tokens: int


class AggregatePoint(NamedTuple):
    period: PeriodKey
    mean_d: float
    n_defined: int
    n_total: int


class SeriesPoint(NamedTuple):
    period: PeriodKey
    value: float
    n: int


@dataclass(frozen=True)
class Series:
    """A plain per-period value series, as stored in series TSV files."""

    granularity: Granularity
    points: tuple[SeriesPoint, ...]


@dataclass(frozen=True)
class AggregatedSeries:
    granularity: Granularity
    points: tuple[AggregatePoint, ...]
    skipped_periods: tuple[PeriodKey, ...] = ()

    def to_series(self) -> Series:
        return Series(self.granularity, tuple(
            SeriesPoint(p.period, p.mean_d, p.n_defined) for p in self.points))


@dataclass(frozen=True)
class NormalizedSeries:
    granularity: Granularity
    points: tuple[SeriesPoint, ...]
    source_min: float
    source_max: float

    def to_series(self) -> Series:
        return Series(self.granularity, self.points)


def _uniform_granularity(periods: Iterable[PeriodKey]) -> Granularity:
    granularities = {p.granularity for p in periods}
    if len(granularities) != 1:
        raise ValueError(f"mixed period granularities: {sorted(g.value for g in granularities)}")
    return granularities.pop()


def aggregate(rows: Iterable[ScoredRow],
              granularity: Granularity | None = None) -> AggregatedSeries:
    """Per-period arithmetic mean of the defined scores.

    Undefined scores count toward n_total only.  Periods with zero
    defined scores are omitted from the points and reported in
    ``skipped_periods`` (plus a log warning).
    """
    by_period: dict[PeriodKey, list[ScoredRow]] = {}
    for row in rows:
        by_period.setdefault(row.period, []).append(row)
    if not by_period:
        raise NoDefinedScores("no scored rows")
    inferred = _uniform_granularity(by_period)
    if granularity is not None and granularity is not inferred:
        raise ValueError(f"rows are {inferred.value}-keyed, expected {granularity.value}")

    points: list[AggregatePoint] = []
    skipped: list[PeriodKey] = []
    for period in sorted(by_period):
        group = by_period[period]
        defined = sorted((r for r in group if r.d is not None),
                         key=lambda r: r.doc_id)
        if not defined:
            skipped.append(period)
            continue
        mean_d = math.fsum(r.d for r in defined) / len(defined)
        points.append(AggregatePoint(period, mean_d, len(defined), len(group)))
    if not points:
        raise NoDefinedScores("every period had only undefined scores")
    if skipped:
        logger.warning("aggregate: %d period(s) had no defined scores: %s",
                       len(skipped), ", ".join(p.label() for p in skipped))
    return AggregatedSeries(inferred, tuple(points), tuple(skipped))


def normalize(series: AggregatedSeries | Series) -> NormalizedSeries:
    """Min-max rescale of the per-period means onto [0, 1]."""
    plain = series.to_series() if isinstance(series, AggregatedSeries) else series
    if len(plain.points) < 2:
        raise DegenerateSeries(f"need at least 2 points, got {len(plain.points)}")
    values = [p.value for p in plain.points]
    lo, hi = min(values), max(values)
    if lo == hi:
        raise DegenerateSeries(f"constant series (all values {lo!r})")
    span = hi - lo
    points = tuple(SeriesPoint(p.period, (p.value - lo) / span, p.n)
                   for p in plain.points)
    return NormalizedSeries(plain.granularity, points, source_min=lo, source_max=hi)


@dataclass(frozen=True)
class AlignedPairs:
    """Period-matched observations (x from series a, y from series b)."""

    granularity: Granularity
    periods: tuple[PeriodKey, ...]
    x: tuple[float, ...]
    y: tuple[float, ...]
    has_gaps: bool

    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.x, self.y))

    def __len__(self) -> int:
        return len(self.periods)


def align(a: Series, b: Series) -> AlignedPairs:
    """Intersect two series on period, sorted ascending.

    Missing periods inside the window break true AR(1) adjacency; the
    fit treats observations as consecutive regardless, so a gap warning
    is emitted rather than an error.
    """
    if a.granularity is not b.granularity:
        raise ValueError("cannot align series of different granularity")
    a_map = {p.period: p.value for p in a.points}
    b_map = {p.period: p.value for p in b.points}
    common = sorted(set(a_map) & set(b_map))
    if len(common) < MIN_ALIGNED_POINTS:
        raise TooFewPoints(len(common))
    has_gaps = any(common[i].next() != common[i + 1]
                   for i in range(len(common) - 1))
    if has_gaps:
        logger.warning("align: %d aligned periods are not consecutive; "
                       "AR(1) adjacency is approximate", len(common))
    return AlignedPairs(a.granularity, tuple(common),
                        tuple(a_map[p] for p in common),
                        tuple(b_map[p] for p in common), has_gaps)


class OlsFit(NamedTuple):
    intercept: float
    slope: float
    residuals: tuple[float, ...]
    slope_se: float


def ols(x: Sequence[float], y: Sequence[float]) -> OlsFit:
    """Simple least squares with slope_se = sqrt(SSR/(n-2) / Sxx)."""
    n = len(x)
    if n != len(y):
        raise ValueError("x and y lengths differ")
    if n < 3:
        raise TooFewPoints(n, minimum=3)
    if max(x) == min(x):
        raise ConstantRegressor("x is constant")
    x_mean = math.fsum(x) / n
    y_mean = math.fsum(y) / n
    sxx = math.fsum((xi - x_mean) ** 2 for xi in x)
    sxy = math.fsum((xi - x_mean) * (yi - y_mean) for xi, yi in zip(x, y))
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean
    residuals = tuple(yi - intercept - slope * xi for xi, yi in zip(x, y))
    ssr = math.fsum(r * r for r in residuals)
    slope_se = math.sqrt(ssr / (n - 2) / sxx)
    return OlsFit(intercept, slope, residuals, slope_se)


def _lstsq2(c0: Sequence[float], c1: Sequence[float],
            y: Sequence[float]) -> tuple[float, float, float]:
    """Least squares on two explicit columns; returns (b0, b1, se_b1).

    Solves the 2x2 normal equations with compensated sums; used for the
    transformed system where the intercept column is not all ones.
    """
    s00 = math.fsum(a * a for a in c0)
    s01 = math.fsum(a * b for a, b in zip(c0, c1))
    s11 = math.fsum(b * b for b in c1)
    sy0 = math.fsum(a * v for a, v in zip(c0, y))
    sy1 = math.fsum(b * v for b, v in zip(c1, y))
    det = s00 * s11 - s01 * s01
    if det <= 0.0:
        raise ConstantRegressor("transformed design matrix is singular")
    b0 = (s11 * sy0 - s01 * sy1) / det
    b1 = (s00 * sy1 - s01 * sy0) / det
    ssr = math.fsum((v - b0 * a - b1 * b) ** 2
                    for v, a, b in zip(y, c0, c1))
    se_b1 = math.sqrt(ssr / (len(y) - 2) * s00 / det)
    return b0, b1, se_b1


def _rho_hat(e: Sequence[float]) -> float:
    """Lag-1 residual autocorrelation, clamped to keep the transform real."""
    num = math.fsum(e[t] * e[t - 1] for t in range(1, len(e)))
    den = math.fsum(e[t - 1] * e[t - 1] for t in range(1, len(e)))
    if den == 0.0:
        return 0.0
    return max(-0.999, min(0.999, num / den))


@dataclass(frozen=True)
class PraisWinstenFit:
    rho: float
    intercept: float
    slope: float
    slope_se: float
    t_stat: float
    p_value: float
    n: int
    iterations: int
    converged: bool


def prais_winsten(pairs: Iterable[tuple[float, float]], tol: float = 1e-6,
                  max_iter: int = 100) -> PraisWinstenFit:
    """Iterated feasible GLS for a linear fit with AR(1) errors.

    Each round estimates rho from the lag-1 autocorrelation of the
    current original-scale residuals, transforms (first row scaled by
    sqrt(1 - rho^2), later rows quasi-differenced), and refits until the
    rho update falls below ``tol``.  Non-convergence is reported through
    ``converged=False``, not an exception.  Significance is the two-sided
    Student-t test of the transformed-model slope with n-2 df.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    xy = list(pairs)
    m = len(xy)
    if m < MIN_ALIGNED_POINTS:
        raise TooFewPoints(m)
    x = [p[0] for p in xy]
    y = [p[1] for p in xy]
    if max(x) == min(x):
        raise ConstantRegressor("x is constant")

    # center both variables: conditioning only, the slope and its test
    # are invariant and the intercept is restored afterwards
    x_mean = math.fsum(x) / m
    y_mean = math.fsum(y) / m
    xc = [xi - x_mean for xi in x]
    yc = [yi - y_mean for yi in y]

    first = ols(xc, yc)
    b0c, b1 = first.intercept, first.slope
    se = first.slope_se
    resid = list(first.residuals)
    rho = _rho_hat(resid)

    iterations = 0
    converged = False
    while iterations < max_iter:
        iterations += 1
        scale = math.sqrt(1.0 - rho * rho)
        c0 = [scale] + [1.0 - rho] * (m - 1)
        c1 = [scale * xc[0]] + [xc[t] - rho * xc[t - 1] for t in range(1, m)]
        yt = [scale * yc[0]] + [yc[t] - rho * yc[t - 1] for t in range(1, m)]
        b0c, b1, se = _lstsq2(c0, c1, yt)
        resid = [yc[t] - b0c - b1 * xc[t] for t in range(m)]
        rho_new = _rho_hat(resid)
        if abs(rho_new - rho) < tol:
            rho = rho_new
            converged = True
            break
        rho = rho_new

    intercept = y_mean + b0c - b1 * x_mean
    if se == 0.0:
        # perfect fit: deterministic sentinel values
        t_stat = math.copysign(math.inf, b1) if b1 != 0.0 else 0.0
        p_value = 0.0 if b1 != 0.0 else 1.0
    else:
        t_stat = b1 / se
        p_value = student_t_two_sided_p(t_stat, m - 2)
    return PraisWinstenFit(rho=rho, intercept=intercept, slope=b1, slope_se=se,
                           t_stat=t_stat, p_value=p_value, n=m,
                           iterations=iterations, converged=converged)


def _beta_cont_frac(a: float, b: float, x: float,
                    max_iter: int = 300, eps: float = 3e-16) -> float:
    """Incomplete-beta continued fraction by the modified Lentz method."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        coeff = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + coeff * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + coeff / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        coeff = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + coeff * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + coeff / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def _reg_inc_beta(a: float, b: float, x: float, xc: float) -> float:
    """Regularized incomplete beta I_x(a, b), with 1-x passed exactly."""
    if x <= 0.0:
        return 0.0
    if xc <= 0.0:
        return 1.0
    log_gamma = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
    if x < (a + 1.0) / (a + b + 2.0):
        front = math.exp(log_gamma + a * math.log(x) + b * math.log1p(-x))
        return front * _beta_cont_frac(a, b, x) / a
    front = math.exp(log_gamma + a * math.log1p(-xc) + b * math.log(xc))
    return 1.0 - front * _beta_cont_frac(b, a, xc) / b


def student_t_two_sided_p(t: float, df: int) -> float:
    """Two-sided tail probability of Student's t with ``df`` degrees."""
    if df < 1:
        raise ValueError("df must be >= 1")
    if math.isnan(t):
        return math.nan
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    tt = t * t
    denom = df + tt
    return _reg_inc_beta(df / 2.0, 0.5, df / denom, tt / denom)


# ---------------------------------------------------------------------------
# pipeline artifact files (all plain TSV so each stage is diffable)

def write_scored_tsv(rows: Iterable[ScoredRow], path: str | Path) -> None:
    """doc_id, period, d (literal NA when undefined), matched, total."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            d_text = "NA" if row.d is None else repr(row.d)
            fh.write(f"{row.doc_id}\t{row.period.label()}\t{d_text}"
                     f"\t{row.matched}\t{row.total_tokens}\n")


def read_scored_tsv(path: str | Path) -> list[ScoredRow]:
    rows: list[ScoredRow] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 5:
                raise ParseError(line_no, f"expected 5 fields, got {len(fields)}")
            doc_id, period_text, d_text, matched_text, total_text = fields
            try:
                period = PeriodKey.parse(period_text)
                d = None if d_text == "NA" else float(d_text)
                matched = int(matched_text)
                total = int(total_text)
            except ValueError as exc:
                raise ParseError(line_no, str(exc)) from None
            if d is not None and not 0.0 <= d <= 1.0:
                raise ParseError(line_no, f"score {d_text} outside [0, 1]")
            rows.append(ScoredRow(doc_id, period, d, matched, total))
    return rows


def write_series_tsv(series: Series, path: str | Path) -> None:
    """period, value, n; one row per period in order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for point in series.points:
            fh.write(f"{point.period.label()}\t{point.value!r}\t{point.n}\n")


def read_series_tsv(path: str | Path) -> Series:
    """Read a series file; the n column is optional (defaults to 0)."""
    points: list[SeriesPoint] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) not in (2, 3):
                raise ParseError(line_no, f"expected 2 or 3 fields, got {len(fields)}")
            try:
                period = PeriodKey.parse(fields[0])
                value = float(fields[1])
                n = int(fields[2]) if len(fields) == 3 else 0
            except ValueError as exc:
                raise ParseError(line_no, str(exc)) from None
            if not math.isfinite(value):
                raise ParseError(line_no, f"non-finite value {fields[1]!r}")
            points.append(SeriesPoint(period, value, n))
    if not points:
        raise ParseError(0, f"no data rows in series file {path}")
    granularity = _uniform_granularity(p.period for p in points)
    if len({p.period for p in points}) != len(points):
        raise ParseError(0, f"duplicate periods in series file {path}")
    points.sort(key=lambda p: (p.period.year, p.period.month or 0))
    return Series(granularity, tuple(points))


def fit_report_text(fit: PraisWinstenFit) -> str:
    lines = [
        "Prais-Winsten AR(1) regression",
        f"  n            {fit.n}",
        f"  rho          {fit.rho:.6f}",
        f"  intercept    {fit.intercept:.6g}",
        f"  slope        {fit.slope:.6g}",
        f"  slope se     {fit.slope_se:.6g}",
        f"  t            {fit.t_stat:.6g}",
        f"  p (2-sided)  {fit.p_value:.6g}",
        f"  iterations   {fit.iterations}"
        + ("" if fit.converged else "  (NOT converged)"),
    ]
    return "\n".join(lines)


def fit_report_json(fit: PraisWinstenFit) -> str:
    """Single-line machine-readable record with every fit field."""
    payload = {
        "rho": fit.rho, "intercept": fit.intercept, "slope": fit.slope,
        "slope_se": fit.slope_se, "t_stat": fit.t_stat, "p_value": fit.p_value,
        "n": fit.n, "iterations": fit.iterations, "converged": fit.converged,
    }
    return json.dumps(payload, sort_keys=True)
