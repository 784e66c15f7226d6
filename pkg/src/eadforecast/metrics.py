"""Forecast quality metrics and descriptive statistics.

The two headline metrics compare an actual series u with an estimated
series v:

    cc(u, v)  = (n*sum(uv) - sum(u)sum(v)) /
                sqrt([n*sum(u^2) - sum(u)^2] [n*sum(v^2) - sum(v)^2])
    mae(u, v) = (1/n) * sum |u_i - v_i| / u_i        (relative error)

mae skips zero-actual terms and reports how many were skipped.
"""

from __future__ import annotations

import datetime as dt
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError


def corr_coeff(u, v) -> float:
    """Pearson correlation coefficient between two equal-length series."""
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ConfigError(f"corr_coeff needs two equal 1-d series of length >= 2, got {a.shape} and {b.shape}")
    n = a.size
    su, sv = a.sum(), b.sum()
    duu = n * (a @ a) - su * su
    dvv = n * (b @ b) - sv * sv
    if duu <= 0.0 or dvv <= 0.0:
        raise NumericalError("correlation undefined: an input series is constant")
    return float((n * (a @ b) - su * sv) / np.sqrt(duu * dvv))


def mae_with_skip_count(u, v) -> tuple[float, int]:
    """Relative mean absolute error and the number of zero-actual terms skipped."""
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 1:
        raise ConfigError(f"mae needs two equal 1-d series, got {a.shape} and {b.shape}")
    keep = a != 0.0
    skipped = int((~keep).sum())
    if skipped == a.size:
        raise NumericalError("relative MAE undefined: every actual value is zero")
    terms = np.abs(a[keep] - b[keep]) / a[keep]
    return float(terms.mean()), skipped


def mae(u, v) -> float:
    return mae_with_skip_count(u, v)[0]


# ---------------------------------------------------------------------------
# Descriptive statistics
# ---------------------------------------------------------------------------


@dataclass
class StatsRow:
    mean: float
    std_error: float
    median: float
    mode: float
    stdev: float
    kurtosis: float | None  # excess kurtosis; None when undefined (n < 4 or constant)
    skewness: float | None
    range: float
    min: float
    max: float
    sum: float
    n: int


def descriptive_stats(series) -> StatsRow:
    """Sample statistics with bias-corrected skewness and excess kurtosis.

    The mode is the most frequent value after rounding to the nearest
    integer (count data), ties broken toward the smallest value.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < 1:
        raise ConfigError(f"descriptive_stats needs a nonempty 1-d series, got shape {x.shape}")
    n = x.size
    mean = float(x.mean())
    stdev = float(x.std(ddof=1)) if n > 1 else 0.0
    counter = Counter(np.rint(x).astype(np.int64).tolist())
    top = max(counter.values())
    mode = float(min(value for value, cnt in counter.items() if cnt == top))

    skewness: float | None = None
    kurtosis: float | None = None
    if n >= 4 and stdev > 0.0:
        z = (x - mean) / stdev
        s3 = float((z**3).sum())
        s4 = float((z**4).sum())
        skewness = n / ((n - 1) * (n - 2)) * s3
        kurtosis = (
            n * (n + 1) / ((n - 1) * (n - 2) * (n - 3)) * s4
            - 3.0 * (n - 1) ** 2 / ((n - 2) * (n - 3))
        )
    return StatsRow(
        mean=mean,
        std_error=stdev / np.sqrt(n),
        median=float(np.median(x)),
        mode=mode,
        stdev=stdev,
        kurtosis=kurtosis,
        skewness=skewness,
        range=float(x.max() - x.min()),
        min=float(x.min()),
        max=float(x.max()),
        sum=float(x.sum()),
        n=n,
    )


# ---------------------------------------------------------------------------
# Multi-horizon aggregation
# ---------------------------------------------------------------------------


@dataclass
class HorizonSeries:
    """Per-date spread of all K-step forecasts covering that date."""

    dates: list[dt.date]
    mean: np.ndarray
    min: np.ndarray
    max: np.ndarray
    count: np.ndarray
    horizon: int


def horizon_aggregate(forecasts: list[tuple[dt.date, np.ndarray]]) -> HorizonSeries:
    """Collect overlapping K-day forecasts into per-date mean/min/max.

    A forecast anchored at date a covers dates a .. a+K-1. Anchors must be
    consecutive days and every forecast must have the same length.
    """
    if not forecasts:
        raise ConfigError("horizon_aggregate needs at least one forecast")
    k = len(np.asarray(forecasts[0][1]).ravel())
    if k < 1:
        raise ConfigError("forecast vectors must be nonempty")
    per_date: dict[dt.date, list[float]] = {}
    prev: dt.date | None = None
    for anchor, values in forecasts:
        vec = np.asarray(values, dtype=np.float64).ravel()
        if vec.size != k:
            raise ConfigError(f"forecast at {anchor} has length {vec.size}, expected {k}")
        if prev is not None and (anchor - prev).days != 1:
            raise ConfigError(f"anchors must be consecutive; gap before {anchor}")
        prev = anchor
        for step in range(k):
            per_date.setdefault(anchor + dt.timedelta(days=step), []).append(float(vec[step]))
    dates = sorted(per_date)
    stacked = [per_date[d] for d in dates]
    return HorizonSeries(
        dates=dates,
        mean=np.array([np.mean(v) for v in stacked]),
        min=np.array([np.min(v) for v in stacked]),
        max=np.array([np.max(v) for v in stacked]),
        count=np.array([len(v) for v in stacked]),
        horizon=k,
    )


# ---------------------------------------------------------------------------
# Cubic fit (plotting aid)
# ---------------------------------------------------------------------------


def polyfit3(x, y) -> np.ndarray:
    """Least-squares cubic fit; returns coefficients (c0, c1, c2, c3) for
    c0 + c1 x + c2 x^2 + c3 x^3."""
    xv = np.asarray(x, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    if xv.shape != yv.shape or xv.ndim != 1:
        raise ConfigError("polyfit3 needs two equal 1-d series")
    if np.unique(xv).size < 4:
        raise NumericalError("cubic fit needs at least 4 distinct x values")
    design = np.vander(xv, 4, increasing=True)
    coef, _, rank, _ = np.linalg.lstsq(design, yv, rcond=None)
    if rank < 4:
        raise NumericalError("cubic fit design matrix is rank deficient")
    return coef


def polyval(coef, x) -> np.ndarray:
    xv = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(xv)
    for power, c in enumerate(coef):
        out = out + c * xv**power
    return out


# ---------------------------------------------------------------------------
# Report row
# ---------------------------------------------------------------------------


@dataclass
class EvalReport:
    scenario: str
    group: str
    stats_real: StatsRow
    stats_est: StatsRow
    cc: float
    mae: float
    mae_skipped: int = 0


def evaluate_series(actual, estimated, group: str = "all", scenario: str = "") -> EvalReport:
    """Full comparison of an actual and an estimated daily series."""
    a = np.asarray(actual, dtype=np.float64)
    e = np.asarray(estimated, dtype=np.float64)
    value, skipped = mae_with_skip_count(a, e)
    return EvalReport(
        scenario=scenario,
        group=group,
        stats_real=descriptive_stats(a),
        stats_est=descriptive_stats(e),
        cc=corr_coeff(a, e),
        mae=value,
        mae_skipped=skipped,
    )
