"""Storm-mode detection, storm identification, and storm-level statistics.

An outlet is "in storm mode" on a story when, inside some 3-day sliding
window, it devotes at least 3% of its total output to that story's cluster —
but only windows where the outlet published at least 40 articles count at
all (share is meaningless over a trickle). A cluster is a media storm when
its coverage spans at least 7 calendar days and at least 5 distinct outlets
hit storm mode on it. All cluster articles belong to the storm.
"""
from __future__ import annotations

import csv
import datetime as dt
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .clustering import StoryCluster
from .corpus import Corpus

DEFAULT_WINDOW_DAYS = 3
DEFAULT_SHARE_THRESHOLD = 0.03
DEFAULT_MIN_WINDOW_ARTICLES = 40
DEFAULT_MIN_DURATION = 7
DEFAULT_MIN_STORM_OUTLETS = 5


@dataclass(frozen=True)
class StormModeEvent:
    """One (outlet, window) pair where the outlet was in storm mode."""

    outlet: str
    window_start: dt.date
    share: float
    outlet_window_total: int


@dataclass(frozen=True)
class StormRecord:
    """A detected media storm with its per-day coverage series.

    ``peak_day_index`` is 1-based (day 1 = ``start_day``); ties on the
    maximum daily count break to the earliest day. ``daily_counts`` and
    ``daily_state_counts`` both have length ``duration_days``; the state
    series counts distinct US states among local outlets covering the storm
    each day.
    """

    cluster_id: int
    article_ids: tuple[int, ...]
    start_day: dt.date
    peak_day_index: int
    duration_days: int
    outlet_count: int
    storm_mode_outlets: tuple[str, ...]
    pct_national: float
    daily_counts: tuple[int, ...]
    daily_state_counts: tuple[int, ...]

    @property
    def article_count(self) -> int:
        return len(self.article_ids)

    @property
    def peak_day(self) -> dt.date:
        return self.start_day + dt.timedelta(days=self.peak_day_index - 1)


@dataclass(frozen=True)
class FeatureStats:
    min: float
    max: float
    mean: float
    median: float

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "FeatureStats":
        arr = sorted(float(v) for v in values)
        n = len(arr)
        if n == 0:
            raise ValueError("no values")
        mid = n // 2
        median = arr[mid] if n % 2 else (arr[mid - 1] + arr[mid]) / 2.0
        return cls(min=arr[0], max=arr[-1], mean=sum(arr) / n, median=median)


@dataclass(frozen=True)
class StormSummary:
    articles: FeatureStats
    duration: FeatureStats
    outlets: FeatureStats
    pct_national: FeatureStats


def outlet_day_totals(corpus: Corpus) -> dict[str, dict[dt.date, int]]:
    """Per-outlet article counts per day over the whole corpus (all articles)."""
    totals: dict[str, dict[dt.date, int]] = {}
    for art in corpus:
        per_day = totals.setdefault(art.outlet, {})
        per_day[art.date] = per_day.get(art.date, 0) + 1
    return totals


def _window_total(per_day: dict[dt.date, int], start: dt.date, window_days: int) -> int:
    return sum(per_day.get(start + dt.timedelta(days=k), 0) for k in range(window_days))


def detect_storm_mode(
    cluster: StoryCluster,
    corpus: Corpus,
    window_days: int = DEFAULT_WINDOW_DAYS,
    share_threshold: float = DEFAULT_SHARE_THRESHOLD,
    min_window_articles: int = DEFAULT_MIN_WINDOW_ARTICLES,
    outlet_totals: dict[str, dict[dt.date, int]] | None = None,
) -> list[StormModeEvent]:
    """Find every (outlet, window) where the outlet is in storm mode on this cluster.

    Windows slide with stride one day; window starts run from two days before
    the cluster's first day through its last day, so every window overlapping
    the cluster span is examined. For a window the outlet's share is
    S / T where S counts its cluster-member articles in the window and T its
    total output in the window; the event fires when T >= min_window_articles
    (windows with fewer articles are ignored entirely) and S / T >=
    share_threshold. Events come back sorted by (outlet, window_start).
    """
    if window_days < 1:
        raise ValueError(f"window_days must be >= 1, got {window_days}")
    if not (0.0 < share_threshold <= 1.0):
        raise ValueError(f"share_threshold must be in (0, 1], got {share_threshold}")
    if min_window_articles < 1:
        raise ValueError(f"min_window_articles must be >= 1, got {min_window_articles}")
    if outlet_totals is None:
        outlet_totals = outlet_day_totals(corpus)

    # Cluster members per outlet per day. Only covering outlets can ever
    # reach a positive share, so others are skipped outright.
    members_by_outlet: dict[str, dict[dt.date, int]] = {}
    for aid in cluster.article_ids:
        art = corpus.article(aid)
        per_day = members_by_outlet.setdefault(art.outlet, {})
        per_day[art.date] = per_day.get(art.date, 0) + 1

    first_start = cluster.first_day - dt.timedelta(days=window_days - 1)
    events: list[StormModeEvent] = []
    for outlet in sorted(members_by_outlet):
        member_days = members_by_outlet[outlet]
        outlet_days = outlet_totals.get(outlet, {})
        start = first_start
        while start <= cluster.last_day:
            total = _window_total(outlet_days, start, window_days)
            if total >= min_window_articles:
                member = _window_total(member_days, start, window_days)
                if member / total >= share_threshold:
                    events.append(
                        StormModeEvent(
                            outlet=outlet,
                            window_start=start,
                            share=member / total,
                            outlet_window_total=total,
                        )
                    )
            start += dt.timedelta(days=1)
    return events


def _time_series(
    article_ids: Sequence[int], corpus: Corpus
) -> tuple[dt.date, tuple[int, ...], tuple[int, ...]]:
    dates = [corpus.article(aid).date for aid in article_ids]
    first, last = min(dates), max(dates)
    n_days = (last - first).days + 1
    counts = [0] * n_days
    states: list[set[str]] = [set() for _ in range(n_days)]
    for aid in article_ids:
        art = corpus.article(aid)
        day = (art.date - first).days
        counts[day] += 1
        profile = corpus.outlets[art.outlet]
        if profile.scope == "local" and profile.state is not None:
            states[day].add(profile.state)
    return first, tuple(counts), tuple(len(s) for s in states)


def identify_storms(
    clusters: Iterable[StoryCluster],
    corpus: Corpus,
    *,
    window_days: int = DEFAULT_WINDOW_DAYS,
    share_threshold: float = DEFAULT_SHARE_THRESHOLD,
    min_window_articles: int = DEFAULT_MIN_WINDOW_ARTICLES,
    min_duration: int = DEFAULT_MIN_DURATION,
    min_storm_outlets: int = DEFAULT_MIN_STORM_OUTLETS,
) -> list[StormRecord]:
    """Select the clusters that qualify as media storms and populate records.

    A cluster qualifies when its inclusive calendar span reaches
    ``min_duration`` days and at least ``min_storm_outlets`` distinct outlets
    have at least one storm-mode event on it. Output is sorted by cluster id.
    """
    if min_duration < 1:
        raise ValueError(f"min_duration must be >= 1, got {min_duration}")
    if min_storm_outlets < 1:
        raise ValueError(f"min_storm_outlets must be >= 1, got {min_storm_outlets}")
    totals = outlet_day_totals(corpus)
    storms: list[StormRecord] = []
    for cluster in sorted(clusters, key=lambda c: c.cluster_id):
        duration = cluster.duration_days
        if duration < min_duration:
            continue
        events = detect_storm_mode(
            cluster,
            corpus,
            window_days=window_days,
            share_threshold=share_threshold,
            min_window_articles=min_window_articles,
            outlet_totals=totals,
        )
        mode_outlets = tuple(sorted({e.outlet for e in events}))
        if len(mode_outlets) < min_storm_outlets:
            continue
        first, counts, state_counts = _time_series(cluster.article_ids, corpus)
        peak_index = 1 + max(range(len(counts)), key=lambda i: (counts[i], -i))
        outlets = {corpus.article(aid).outlet for aid in cluster.article_ids}
        national = sum(
            1
            for aid in cluster.article_ids
            if corpus.outlets[corpus.article(aid).outlet].scope == "national"
        )
        storms.append(
            StormRecord(
                cluster_id=cluster.cluster_id,
                article_ids=tuple(cluster.article_ids),
                start_day=first,
                peak_day_index=peak_index,
                duration_days=duration,
                outlet_count=len(outlets),
                storm_mode_outlets=mode_outlets,
                pct_national=100.0 * national / len(cluster.article_ids),
                daily_counts=counts,
                daily_state_counts=state_counts,
            )
        )
    return storms


def storm_time_series(storm: StormRecord, corpus: Corpus) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Recompute (daily article counts, daily distinct-state counts) for a storm.

    Day 1 is the storm's start day; both series span its full duration.
    """
    _, counts, states = _time_series(storm.article_ids, corpus)
    return counts, states


def storm_summary(storms: Sequence[StormRecord]) -> StormSummary:
    """Min/max/mean/median for article count, duration, outlet count, %national."""
    if not storms:
        raise ValueError("cannot summarize zero storms")
    return StormSummary(
        articles=FeatureStats.from_values([s.article_count for s in storms]),
        duration=FeatureStats.from_values([s.duration_days for s in storms]),
        outlets=FeatureStats.from_values([s.outlet_count for s in storms]),
        pct_national=FeatureStats.from_values([s.pct_national for s in storms]),
    )


@dataclass(frozen=True)
class AverageSeries:
    """Per-day mean across storms with a percentile-bootstrap 95% band."""

    mean: tuple[float, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]


def average_storm_series(
    storms: Sequence[StormRecord],
    horizon_days: int = 30,
    bootstrap_reps: int = 1000,
    seed: int = 0,
    values: str = "articles",
) -> AverageSeries:
    """Average a per-day storm series over the first ``horizon_days`` days.

    Storms shorter than the horizon pad with zeros; longer ones truncate.
    The band is a percentile bootstrap (resample storms with replacement,
    ``bootstrap_reps`` times, 2.5th/97.5th percentiles), deterministic in
    ``seed``. ``values`` selects the series: "articles" or "states".
    """
    if len(storms) < 2:
        raise ValueError("averaging needs at least two storms")
    if horizon_days < 1:
        raise ValueError(f"horizon_days must be >= 1, got {horizon_days}")
    if bootstrap_reps < 1:
        raise ValueError(f"bootstrap_reps must be >= 1, got {bootstrap_reps}")
    if values == "articles":
        rows = [s.daily_counts for s in storms]
    elif values == "states":
        rows = [s.daily_state_counts for s in storms]
    else:
        raise ValueError(f"values must be 'articles' or 'states', got {values!r}")

    matrix = np.zeros((len(rows), horizon_days), dtype=np.float64)
    for i, row in enumerate(rows):
        take = min(len(row), horizon_days)
        matrix[i, :take] = row[:take]

    mean = matrix.mean(axis=0)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(rows), size=(bootstrap_reps, len(rows)))
    boot_means = matrix[idx].mean(axis=1)
    lower, upper = np.percentile(boot_means, [2.5, 97.5], axis=0)
    return AverageSeries(
        mean=tuple(float(x) for x in mean),
        lower=tuple(float(x) for x in lower),
        upper=tuple(float(x) for x in upper),
    )


def duration_ecdf(durations: Sequence[float]) -> list[tuple[float, float]]:
    """Empirical CDF sampled at each distinct value, ascending.

    Each point is (x, fraction of values <= x); the final point has F = 1.
    """
    if len(durations) == 0:
        raise ValueError("ecdf of empty sample")
    values = sorted(float(d) for d in durations)
    n = len(values)
    out: list[tuple[float, float]] = []
    for i, v in enumerate(values):
        if i + 1 == n or values[i + 1] != v:
            out.append((v, (i + 1) / n))
    return out


@dataclass(frozen=True)
class PeakStats:
    histogram: dict[int, int]
    median: float
    mode: int


def peak_statistics(storms: Sequence[StormRecord]) -> PeakStats:
    """Histogram, median and mode of 1-based peak day indices; mode ties break low."""
    if not storms:
        raise ValueError("no storms")
    peaks = sorted(s.peak_day_index for s in storms)
    hist: dict[int, int] = {}
    for p in peaks:
        hist[p] = hist.get(p, 0) + 1
    n = len(peaks)
    mid = n // 2
    median = float(peaks[mid]) if n % 2 else (peaks[mid - 1] + peaks[mid]) / 2.0
    mode = min(hist, key=lambda d: (-hist[d], d))
    return PeakStats(histogram=hist, median=median, mode=mode)


# --- serialization ----------------------------------------------------------


def storm_to_record(storm: StormRecord) -> dict:
    return {
        "cluster_id": storm.cluster_id,
        "article_ids": list(storm.article_ids),
        "start_day": storm.start_day.isoformat(),
        "peak_day_index": storm.peak_day_index,
        "duration_days": storm.duration_days,
        "outlet_count": storm.outlet_count,
        "storm_mode_outlets": list(storm.storm_mode_outlets),
        "pct_national": storm.pct_national,
        "daily_counts": list(storm.daily_counts),
        "daily_state_counts": list(storm.daily_state_counts),
    }


def write_storms_jsonl(storms: Iterable[StormRecord], path: str | Path) -> int:
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for s in storms:
            fh.write(json.dumps(storm_to_record(s), separators=(",", ":")))
            fh.write("\n")
            n += 1
    return n


def read_storms_jsonl(path: str | Path) -> list[StormRecord]:
    storms = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            storms.append(
                StormRecord(
                    cluster_id=obj["cluster_id"],
                    article_ids=tuple(obj["article_ids"]),
                    start_day=dt.date.fromisoformat(obj["start_day"]),
                    peak_day_index=obj["peak_day_index"],
                    duration_days=obj["duration_days"],
                    outlet_count=obj["outlet_count"],
                    storm_mode_outlets=tuple(obj["storm_mode_outlets"]),
                    pct_national=obj["pct_national"],
                    daily_counts=tuple(obj["daily_counts"]),
                    daily_state_counts=tuple(obj["daily_state_counts"]),
                )
            )
    return storms


def write_storms_csv(storms: Iterable[StormRecord], path: str | Path) -> None:
    """Summary table: one row per storm, with a blank description slot."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["start_date", "peak_date", "length_days", "article_count", "pct_national", "description"]
        )
        for s in storms:
            writer.writerow(
                [
                    s.start_day.isoformat(),
                    s.peak_day.isoformat(),
                    s.duration_days,
                    s.article_count,
                    f"{s.pct_national:.1f}",
                    "",
                ]
            )


def write_average_series_csv(
    path: str | Path,
    articles: AverageSeries,
    states: AverageSeries | None = None,
) -> None:
    """Per-day averaged series with 95% bands, day index 1-based."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        header = ["day", "mean_articles", "articles_lo", "articles_hi"]
        if states is not None:
            header += ["mean_states", "states_lo", "states_hi"]
        writer.writerow(header)
        for i in range(len(articles.mean)):
            row = [i + 1, repr(articles.mean[i]), repr(articles.lower[i]), repr(articles.upper[i])]
            if states is not None:
                row += [repr(states.mean[i]), repr(states.lower[i]), repr(states.upper[i])]
            writer.writerow(row)


def write_duration_ecdf_csv(
    path: str | Path,
    samples: dict[str, Sequence[float]],
) -> None:
    """ECDFs for several labeled duration samples in one long-format CSV."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "duration_days", "cdf"])
        for kind in sorted(samples):
            for x, f in duration_ecdf(samples[kind]):
                writer.writerow([kind, repr(x), repr(f)])
