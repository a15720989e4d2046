from __future__ import annotations

import random
import statistics

import pytest

from helpers import day, local, make_article, make_corpus, national
from stormpipe.clustering import StoryCluster
from stormpipe.storms import (
    AverageSeries,
    FeatureStats,
    StormRecord,
    average_storm_series,
    detect_storm_mode,
    duration_ecdf,
    identify_storms,
    peak_statistics,
    read_storms_jsonl,
    storm_summary,
    storm_time_series,
    write_duration_ecdf_csv,
    write_storms_csv,
    write_storms_jsonl,
)


class CorpusBuilder:
    """Incrementally add articles and remember which ids belong to the cluster."""

    def __init__(self):
        self.articles = []
        self.members = []
        self.outlets = {}
        self._next = 0

    def outlet(self, profile):
        self.outlets[profile.name] = profile
        return self

    def add(self, outlet, day_offset, n=1, member=False):
        if outlet not in self.outlets:
            self.outlets[outlet] = national(outlet)
        for _ in range(n):
            self.articles.append(make_article(self._next, outlet=outlet, day_offset=day_offset))
            if member:
                self.members.append(self._next)
            self._next += 1
        return self

    def build(self):
        corpus = make_corpus(self.articles, outlets=self.outlets)
        first = min(corpus.article(i).date for i in self.members)
        last = max(corpus.article(i).date for i in self.members)
        cluster = StoryCluster(
            cluster_id=0, article_ids=tuple(sorted(self.members)), first_day=first, last_day=last
        )
        return corpus, cluster


# --- storm mode -----------------------------------------------------------------


def test_storm_mode_hand_enumeration():
    """Four outlets, every (outlet, window) event enumerated by hand.

    window=3, share threshold 0.3, volume floor 6. Cluster spans days 0..9.
    """
    b = CorpusBuilder()
    # O1: 2 background/day on days -2..11 plus 1 member/day on days 0..9
    for d in range(-2, 12):
        b.add("O1", d, n=2)
    for d in range(0, 10):
        b.add("O1", d, member=True)
    # O2: 3 background/day, single burst of 2 members on day 4 (diluted away)
    for d in range(-2, 12):
        b.add("O2", d, n=3)
    b.add("O2", 4, n=2, member=True)
    # O3: no background, 3 members on day 5 (fails the volume floor)
    b.add("O3", 5, n=3, member=True)
    # O4: 1 background/day, 2 members/day on days 6..8
    for d in range(-2, 12):
        b.add("O4", d)
    for d in (6, 7, 8):
        b.add("O4", d, n=2, member=True)

    corpus, cluster = b.build()
    events = detect_storm_mode(
        cluster, corpus, window_days=3, share_threshold=0.3, min_window_articles=6
    )

    expected = [
        # O1: windows fully inside the member run have total 9, share 3/9;
        # edge windows dilute below 0.3
        *[("O1", day(w), 3 / 9, 9) for w in range(0, 8)],
        ("O4", day(5), 4 / 7, 7),
        ("O4", day(6), 6 / 9, 9),
        ("O4", day(7), 4 / 7, 7),
    ]
    got = [(e.outlet, e.window_start, e.share, e.outlet_window_total) for e in events]
    assert got == expected


def test_storm_mode_share_exactly_at_threshold_is_event():
    b = CorpusBuilder()
    # one member on each of days 0,1,2; background 32,32,33 -> window total 100
    for d, bg in zip(range(3), (32, 32, 33)):
        b.add("O1", d, n=bg)
        b.add("O1", d, member=True)
    corpus, cluster = b.build()
    events = detect_storm_mode(cluster, corpus, window_days=3, share_threshold=0.03, min_window_articles=40)
    at_zero = [e for e in events if e.window_start == day(0)]
    assert len(at_zero) == 1
    assert at_zero[0].outlet_window_total == 100
    assert at_zero[0].share == 0.03  # 3/100 is exact at this resolution


def test_storm_mode_volume_floor_is_inclusive():
    def build(extra_bg):
        b = CorpusBuilder()
        for d, bg in zip(range(3), (12, 12, 12 + extra_bg)):
            b.add("O1", d, n=bg)
            b.add("O1", d, member=True)
        return b.build()

    corpus39, cluster39 = build(0)  # window total 36 + 3 members = 39
    events39 = detect_storm_mode(cluster39, corpus39, min_window_articles=40)
    assert [e for e in events39 if e.window_start == day(0)] == []

    corpus40, cluster40 = build(1)  # 40 exactly
    events40 = detect_storm_mode(cluster40, corpus40, min_window_articles=40)
    hit = [e for e in events40 if e.window_start == day(0)]
    assert len(hit) == 1 and hit[0].outlet_window_total == 40


def test_storm_mode_rejects_bad_knobs():
    b = CorpusBuilder()
    b.add("O1", 0, member=True)
    b.add("O1", 1, member=True)
    corpus, cluster = b.build()
    with pytest.raises(ValueError):
        detect_storm_mode(cluster, corpus, window_days=0)
    with pytest.raises(ValueError):
        detect_storm_mode(cluster, corpus, share_threshold=0.0)
    with pytest.raises(ValueError):
        detect_storm_mode(cluster, corpus, min_window_articles=0)


# --- storm identification -----------------------------------------------------------


def storm_fixture(*, outlets=5, duration=7, bg_per_day=30, start=10, national_count=None, extra_peak_day=None):
    """Every outlet posts 1 member/day for `duration` days plus steady background."""
    b = CorpusBuilder()
    names = [f"Out{i}" for i in range(outlets)]
    states = ["CA", "NY", "TX", "OH", "WA"]
    for i, name in enumerate(names):
        if national_count is not None and i >= national_count:
            b.outlet(local(name, state=states[i % len(states)]))
        else:
            b.outlet(national(name))
    for name in names:
        for d in range(start - 5, start + duration + 5):
            b.add(name, d, n=bg_per_day)
        for d in range(start, start + duration):
            b.add(name, d, member=True)
    if extra_peak_day is not None:
        b.add(names[0], start + extra_peak_day, n=2, member=True)
    return b.build()


def test_identify_storms_qualifying_cluster():
    corpus, cluster = storm_fixture()
    found = identify_storms([cluster], corpus)
    assert len(found) == 1
    s = found[0]
    assert s.cluster_id == 0
    assert s.start_day == day(10)
    assert s.duration_days == 7
    assert s.outlet_count == 5
    assert set(s.storm_mode_outlets) == {f"Out{i}" for i in range(5)}
    assert s.daily_counts == (5,) * 7
    assert s.peak_day_index == 1  # all-tie breaks earliest
    assert s.pct_national == 100.0


def test_identify_storms_duration_below_minimum():
    corpus, cluster = storm_fixture(duration=6)
    assert identify_storms([cluster], corpus) == []
    # the same cluster qualifies when the duration knob is relaxed
    assert len(identify_storms([cluster], corpus, min_duration=6)) == 1


def test_identify_storms_too_few_storm_mode_outlets():
    corpus, cluster = storm_fixture(outlets=4)
    assert identify_storms([cluster], corpus) == []
    assert len(identify_storms([cluster], corpus, min_storm_outlets=4)) == 1


def test_identify_storms_share_dilution():
    # heavy background: member share 3/153 < 3%, so no outlet enters storm mode
    corpus, cluster = storm_fixture(bg_per_day=50)
    assert identify_storms([cluster], corpus) == []
    assert len(identify_storms([cluster], corpus, share_threshold=0.019)) == 1


def test_identify_storms_volume_floor():
    # thin outlets: window totals 3*(5+1)=18 < 40 keep every outlet out of mode
    corpus, cluster = storm_fixture(bg_per_day=5)
    assert identify_storms([cluster], corpus) == []
    assert len(identify_storms([cluster], corpus, min_window_articles=18)) == 1


def test_identify_storms_peak_and_mixed_scopes():
    corpus, cluster = storm_fixture(national_count=3, extra_peak_day=2)
    found = identify_storms([cluster], corpus)
    assert len(found) == 1
    s = found[0]
    # day offsets 0..6 have 5 members except offset 2 which has 7
    assert s.daily_counts == (5, 5, 7, 5, 5, 5, 5)
    assert s.peak_day_index == 3
    assert s.peak_day == day(12)
    # 3 national outlets of 5, plus 2 extra national member articles at peak
    total = s.article_count
    national_articles = 3 * 7 + 2
    assert s.pct_national == pytest.approx(100.0 * national_articles / total)
    # two distinct local states cover the storm every day
    assert s.daily_state_counts == (2,) * 7


def test_storm_time_series_matches_record():
    corpus, cluster = storm_fixture(national_count=3)
    s = identify_storms([cluster], corpus)[0]
    counts, states = storm_time_series(s, corpus)
    assert counts == s.daily_counts
    assert states == s.daily_state_counts


def test_identify_storms_output_sorted_by_cluster_id():
    corpus1, cluster1 = storm_fixture()
    # same corpus reused with a second qualifying cluster id
    clusters = [
        StoryCluster(cluster_id=7, article_ids=cluster1.article_ids, first_day=cluster1.first_day, last_day=cluster1.last_day),
        cluster1,
    ]
    found = identify_storms(clusters, corpus1)
    assert [s.cluster_id for s in found] == [0, 7]


# --- descriptive statistics -------------------------------------------------------


def make_storm(cluster_id=0, daily=(5, 5, 5, 5, 5, 5, 5), states=None, outlets=5, pct_national=60.0, peak=None, start=day(0)):
    daily = tuple(daily)
    if states is None:
        states = tuple(0 for _ in daily)
    if peak is None:
        peak = 1 + max(range(len(daily)), key=lambda i: (daily[i], -i))
    return StormRecord(
        cluster_id=cluster_id,
        article_ids=tuple(range(sum(daily))),
        start_day=start,
        peak_day_index=peak,
        duration_days=len(daily),
        outlet_count=outlets,
        storm_mode_outlets=tuple(f"O{i}" for i in range(outlets)),
        pct_national=pct_national,
        daily_counts=daily,
        daily_state_counts=tuple(states),
    )


def test_feature_stats_hand_values():
    stats = FeatureStats.from_values([7, 11])
    assert (stats.min, stats.max, stats.mean, stats.median) == (7.0, 11.0, 9.0, 9.0)
    odd = FeatureStats.from_values([3, 9, 4])
    assert odd.median == 4.0
    with pytest.raises(ValueError):
        FeatureStats.from_values([])


def test_feature_stats_random_oracle():
    rng = random.Random(21)
    for _ in range(200):
        values = [rng.uniform(-50, 50) for _ in range(rng.randrange(1, 40))]
        stats = FeatureStats.from_values(values)
        assert stats.min == min(values)
        assert stats.max == max(values)
        assert stats.mean == pytest.approx(statistics.fmean(values), abs=1e-9)
        assert stats.median == pytest.approx(statistics.median(values), abs=1e-9)


def test_storm_summary_hand():
    storms = [
        make_storm(0, daily=(10,) * 7, outlets=5, pct_national=40.0),
        make_storm(1, daily=(2,) * 10, outlets=9, pct_national=80.0),
    ]
    summary = storm_summary(storms)
    assert summary.articles.min == 20.0 and summary.articles.max == 70.0
    assert summary.articles.mean == 45.0 and summary.articles.median == 45.0
    assert summary.duration.min == 7.0 and summary.duration.max == 10.0
    assert summary.outlets.mean == 7.0
    assert summary.pct_national.median == 60.0
    with pytest.raises(ValueError):
        storm_summary([])


def test_average_series_identical_storms_zero_width_band():
    storms = [make_storm(i, daily=(4, 2)) for i in range(3)]
    series = average_storm_series(storms, horizon_days=5, bootstrap_reps=200, seed=1)
    assert series.mean == (4.0, 2.0, 0.0, 0.0, 0.0)
    assert series.lower == series.mean
    assert series.upper == series.mean


def test_average_series_mean_oracle_and_determinism():
    rng = random.Random(8)
    storms = [
        make_storm(i, daily=tuple(rng.randrange(0, 20) for _ in range(rng.randrange(1, 15))))
        for i in range(12)
    ]
    horizon = 10
    series = average_storm_series(storms, horizon_days=horizon, bootstrap_reps=300, seed=4)
    for i in range(horizon):
        padded = [
            (s.daily_counts[i] if i < len(s.daily_counts) else 0) for s in storms
        ]
        assert series.mean[i] == pytest.approx(statistics.fmean(padded), abs=1e-9)
        assert series.lower[i] <= series.mean[i] + 1e-12
        assert series.upper[i] >= series.mean[i] - 1e-12

    again = average_storm_series(storms, horizon_days=horizon, bootstrap_reps=300, seed=4)
    assert series == again
    other_seed = average_storm_series(storms, horizon_days=horizon, bootstrap_reps=300, seed=5)
    assert other_seed.mean == series.mean  # the mean is seed-free


def test_average_series_states_and_errors():
    storms = [
        make_storm(0, daily=(3, 3), states=(2, 1)),
        make_storm(1, daily=(1,), states=(4,)),
    ]
    series = average_storm_series(storms, horizon_days=2, values="states")
    assert series.mean == (3.0, 0.5)
    with pytest.raises(ValueError):
        average_storm_series(storms[:1])
    with pytest.raises(ValueError):
        average_storm_series(storms, values="rainfall")
    with pytest.raises(ValueError):
        average_storm_series(storms, horizon_days=0)


def test_duration_ecdf_hand():
    points = duration_ecdf([7, 10, 10, 20])
    assert points == [(7.0, 0.25), (10.0, 0.75), (20.0, 1.0)]
    with pytest.raises(ValueError):
        duration_ecdf([])


def test_duration_ecdf_random_oracle():
    rng = random.Random(17)
    values = [float(rng.randrange(1, 60)) for _ in range(1000)]
    points = duration_ecdf(values)
    xs = [x for x, _ in points]
    assert xs == sorted(set(values))
    n = len(values)
    for x, f in points:
        assert f == pytest.approx(sum(1 for v in values if v <= x) / n, abs=1e-12)
    assert points[-1][1] == 1.0


def test_peak_statistics_hand():
    storms = [make_storm(i, peak=p, daily=(1,) * 12) for i, p in enumerate([5, 9, 9, 2])]
    stats = peak_statistics(storms)
    assert stats.histogram == {2: 1, 5: 1, 9: 2}
    assert stats.mode == 9
    assert stats.median == 7.0
    uniform = peak_statistics([make_storm(i, peak=p, daily=(1,) * 5) for i, p in enumerate([1, 2, 3])])
    assert uniform.mode == 1  # all counts tie; lowest day wins
    assert uniform.median == 2.0


# --- persistence --------------------------------------------------------------------


def test_storms_jsonl_round_trip(tmp_path):
    storms = [
        make_storm(0, daily=(5, 8, 5), states=(1, 2, 0), pct_national=62.5),
        make_storm(3, daily=(4,) * 9, outlets=7),
    ]
    path = tmp_path / "storms.jsonl"
    write_storms_jsonl(storms, path)
    assert read_storms_jsonl(path) == storms


def test_storms_csv_golden(tmp_path):
    storm = make_storm(0, daily=(5, 8, 5), pct_national=62.5, start=day(3))
    path = tmp_path / "storms.csv"
    write_storms_csv([storm], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "start_date,peak_date,length_days,article_count,pct_national,description"
    assert lines[1] == "2021-01-04,2021-01-05,3,18,62.5,"


def test_duration_ecdf_csv(tmp_path):
    path = tmp_path / "ecdf.csv"
    write_duration_ecdf_csv(path, {"storm": [7, 8], "nonstorm": [1, 1, 2]})
    lines = path.read_text().splitlines()
    assert lines[0] == "kind,duration_days,cdf"
    # kinds in sorted order: nonstorm first
    assert lines[1].startswith("nonstorm,1.0,")
    assert lines[-1].startswith("storm,8.0,1.0")
