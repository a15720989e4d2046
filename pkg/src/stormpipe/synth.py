"""Synthetic corpus generation with planted storms and labeled near-misses.

The generator is the test bench for the whole pipeline: it builds corpora in
which story clusters are planted by construction (shared entity + near-
identical token sets, so blocking and similarity scoring must recover them)
on top of per-outlet background noise, and it knows — before a single
article is written — whether each planted cluster must come out a storm.
Clusters marked as near-misses violate exactly one named criterion:

- ``duration``       span one day short, everything else qualifying
- ``outlets``        one storm-mode outlet short, everything else qualifying
- ``share``          coverage share below threshold in every window
- ``window_volume``  outlet volume below the window floor in every window

Everything is deterministic in (spec, seed).
"""
from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Article, Corpus, OutletProfile, export_articles, export_outlets
from .similarity import mock_embed, write_embeddings

NEAR_MISS_REASONS = ("duration", "outlets", "share", "window_volume")


class InfeasibleSpecError(ValueError):
    """The planted schedule cannot satisfy (or correctly miss) the storm criteria."""


@dataclass(frozen=True)
class SyntheticOutlet:
    name: str
    scope: str
    daily_volume: int
    state: str | None = None
    reliability: str = "reliable"


@dataclass(frozen=True)
class PlantedCluster:
    """One planted story: per-(day, outlet) member article counts.

    ``schedule`` entries are (day offset from corpus start, outlet name,
    article count). ``expect_storm`` declares the ground truth; a near-miss
    must name the single criterion it violates.
    """

    name: str
    schedule: tuple[tuple[int, str, int], ...]
    expect_storm: bool
    near_miss_reason: str | None = None
    topic: int = 0

    def __post_init__(self) -> None:
        if self.expect_storm and self.near_miss_reason is not None:
            raise ValueError(f"cluster {self.name!r}: a storm cannot also be a near-miss")
        if self.near_miss_reason is not None and self.near_miss_reason not in NEAR_MISS_REASONS:
            raise ValueError(
                f"cluster {self.name!r}: unknown near-miss reason {self.near_miss_reason!r}"
            )
        if not self.schedule:
            raise ValueError(f"cluster {self.name!r}: empty schedule")

    @property
    def total_articles(self) -> int:
        return sum(count for _, _, count in self.schedule)

    @property
    def first_day(self) -> int:
        return min(day for day, _, count in self.schedule if count > 0)

    @property
    def last_day(self) -> int:
        return max(day for day, _, count in self.schedule if count > 0)

    @property
    def span_days(self) -> int:
        return self.last_day - self.first_day + 1


@dataclass(frozen=True)
class SyntheticSpec:
    """Declarative description of a synthetic corpus.

    Background volume comes from each outlet's ``daily_volume`` (articles per
    day, every day). The criteria knobs are used to pre-validate planted
    clusters against their declared labels; keep them in sync with whatever
    the pipeline run under test uses.
    """

    start: dt.date
    days: int
    outlets: tuple[SyntheticOutlet, ...]
    clusters: tuple[PlantedCluster, ...] = ()
    topics_k: int = 10
    embed_dim: int = 64
    vocab_size: int = 50_000
    background_entity_pool: int = 500
    entities_per_background: int = 2
    text_words: int = 60
    window_days: int = 3
    share_threshold: float = 0.03
    min_window_articles: int = 40
    min_duration: int = 7
    min_storm_outlets: int = 5

    def __post_init__(self) -> None:
        if self.days < 1:
            raise ValueError("corpus must span at least one day")
        if not self.outlets:
            raise ValueError("need at least one outlet")
        if self.topics_k < 2:
            raise ValueError("topics_k must be >= 2")
        names = [o.name for o in self.outlets]
        if len(set(names)) != len(names):
            raise ValueError("duplicate outlet names")


@dataclass(frozen=True)
class GroundTruthCluster:
    name: str
    article_ids: tuple[int, ...]
    expect_storm: bool
    near_miss_reason: str | None
    first_day: dt.date
    duration_days: int


@dataclass(frozen=True)
class GroundTruth:
    clusters: tuple[GroundTruthCluster, ...]
    background_articles: int
    total_articles: int

    @property
    def storms(self) -> tuple[GroundTruthCluster, ...]:
        return tuple(c for c in self.clusters if c.expect_storm)

    @property
    def near_misses(self) -> tuple[GroundTruthCluster, ...]:
        return tuple(c for c in self.clusters if c.near_miss_reason is not None)


@dataclass(frozen=True)
class SyntheticDataset:
    corpus: Corpus
    ground_truth: GroundTruth
    spec: SyntheticSpec
    seed: int


# --- schedule constructors --------------------------------------------------


def spread_counts(total: int, duration: int, peak_index: int | None = None) -> list[int]:
    """Distribute ``total`` articles over ``duration`` days, every day >= 1.

    Remainder goes to the earliest days. With ``peak_index`` (1-based) the
    named day is made the strict maximum by shifting articles from the latest
    days, so earliest-tie peak detection lands exactly there.
    """
    if duration < 1:
        raise ValueError("duration must be >= 1")
    if total < duration:
        raise ValueError(f"cannot spread {total} articles over {duration} days at >= 1/day")
    base, rem = divmod(total, duration)
    counts = [base + (1 if i < rem else 0) for i in range(duration)]
    if peak_index is not None:
        p = peak_index - 1
        if not (0 <= p < duration):
            raise ValueError(f"peak_index {peak_index} outside 1..{duration}")
        need = max(c for i, c in enumerate(counts) if i != p) + 1 - counts[p]
        donor = duration - 1
        while need > 0:
            if donor == p:
                donor -= 1
            if donor < 0:
                raise ValueError("cannot make peak strict")
            if counts[donor] > 1:
                counts[donor] -= 1
                counts[p] += 1
                need -= 1
            else:
                donor -= 1
    return counts


def cycled_schedule(
    outlets: list[str] | tuple[str, ...],
    start_day: int,
    duration: int,
    total: int,
    peak_index: int | None = None,
) -> tuple[tuple[int, str, int], ...]:
    """Assign articles day-major, cycling outlets globally.

    The global cycle makes per-outlet totals as even as integers allow, so
    e.g. an alternating national/local cycle of even length splits an even
    total exactly 50/50.
    """
    counts = spread_counts(total, duration, peak_index)
    per: dict[tuple[int, str], int] = {}
    slot = 0
    for offset, n in enumerate(counts):
        for _ in range(n):
            outlet = outlets[slot % len(outlets)]
            per[(start_day + offset, outlet)] = per.get((start_day + offset, outlet), 0) + 1
            slot += 1
    return tuple((day, outlet, count) for (day, outlet), count in sorted(per.items()))


def uniform_schedule(
    outlets: list[str] | tuple[str, ...],
    start_day: int,
    duration: int,
    per_day: int,
) -> tuple[tuple[int, str, int], ...]:
    """Every outlet publishes ``per_day`` members on every day of the span."""
    return tuple(
        (start_day + offset, outlet, per_day)
        for offset in range(duration)
        for outlet in outlets
    )


def sparse_schedule(
    outlets: list[str] | tuple[str, ...],
    start_day: int,
    day_offsets: list[int] | tuple[int, ...],
) -> tuple[tuple[int, str, int], ...]:
    """One member per outlet on each listed day (offsets relative to start_day)."""
    return tuple(
        (start_day + offset, outlet, 1) for offset in day_offsets for outlet in outlets
    )


# --- feasibility validation -------------------------------------------------


def _cluster_mode_profile(
    spec: SyntheticSpec,
    cluster: PlantedCluster,
    day_totals: dict[tuple[str, int], int],
) -> tuple[int, int, int, int]:
    """(storm-mode outlets, share-blocked outlets, volume-blocked outlets, covering outlets).

    share-blocked: outlets passing the volume floor in some member window but
    never the share test; volume-blocked: outlets passing the share test in
    some window when the floor is ignored, but never the floor.
    """
    members: dict[str, dict[int, int]] = {}
    for day, outlet, count in cluster.schedule:
        if count > 0:
            members.setdefault(outlet, {}).setdefault(day, 0)
            members[outlet][day] += count
    first, last = cluster.first_day, cluster.last_day
    in_mode = 0
    volume_ok_share_never = 0
    share_ok_volume_never = 0
    for outlet, per_day in members.items():
        any_mode = False
        any_volume_ok = False
        any_share_ok = False
        for w in range(first - (spec.window_days - 1), last + 1):
            s = sum(per_day.get(w + k, 0) for k in range(spec.window_days))
            if s == 0:
                continue
            t = sum(day_totals.get((outlet, w + k), 0) for k in range(spec.window_days))
            volume_ok = t >= spec.min_window_articles
            share_ok = s / t >= spec.share_threshold
            any_volume_ok = any_volume_ok or volume_ok
            any_share_ok = any_share_ok or share_ok
            if volume_ok and share_ok:
                any_mode = True
        if any_mode:
            in_mode += 1
        else:
            if any_volume_ok and not any_share_ok:
                volume_ok_share_never += 1
            if any_share_ok and not any_volume_ok:
                share_ok_volume_never += 1
    return in_mode, volume_ok_share_never, share_ok_volume_never, len(members)


def validate_spec(spec: SyntheticSpec) -> None:
    """Check every planted cluster against its declared label; raise if impossible.

    Totals include background volume and members of *all* clusters, so
    overlapping plantings are accounted for.
    """
    by_name = {o.name: o for o in spec.outlets}
    day_totals: dict[tuple[str, int], int] = {}
    for outlet in spec.outlets:
        for day in range(spec.days):
            day_totals[(outlet.name, day)] = outlet.daily_volume
    for cluster in spec.clusters:
        for day, outlet, count in cluster.schedule:
            if count < 0:
                raise InfeasibleSpecError(f"cluster {cluster.name!r}: negative count")
            if outlet not in by_name:
                raise InfeasibleSpecError(f"cluster {cluster.name!r}: unknown outlet {outlet!r}")
            if not (0 <= day < spec.days):
                raise InfeasibleSpecError(
                    f"cluster {cluster.name!r}: day {day} outside corpus span 0..{spec.days - 1}"
                )
            day_totals[(outlet, day)] = day_totals.get((outlet, day), 0) + count
        if not (0 <= cluster.topic < spec.topics_k):
            raise InfeasibleSpecError(f"cluster {cluster.name!r}: topic outside 0..{spec.topics_k - 1}")

    for cluster in spec.clusters:
        in_mode, share_blocked, volume_blocked, covering = _cluster_mode_profile(
            spec, cluster, day_totals
        )
        span = cluster.span_days
        is_storm = span >= spec.min_duration and in_mode >= spec.min_storm_outlets
        label = f"cluster {cluster.name!r}"
        if cluster.expect_storm:
            if not is_storm:
                raise InfeasibleSpecError(
                    f"{label} marked storm but span={span} (need >= {spec.min_duration}) and "
                    f"storm-mode outlets={in_mode} (need >= {spec.min_storm_outlets})"
                )
            continue
        if is_storm:
            raise InfeasibleSpecError(f"{label} not marked storm but satisfies all criteria")
        reason = cluster.near_miss_reason
        if reason is None:
            continue
        if reason == "duration":
            if not (span < spec.min_duration and in_mode >= spec.min_storm_outlets):
                raise InfeasibleSpecError(
                    f"{label} near-miss 'duration' must fail only the duration criterion "
                    f"(span={span}, storm-mode outlets={in_mode})"
                )
        elif reason == "outlets":
            if not (span >= spec.min_duration and 1 <= in_mode < spec.min_storm_outlets):
                raise InfeasibleSpecError(
                    f"{label} near-miss 'outlets' must fail only the outlet-count criterion "
                    f"(span={span}, storm-mode outlets={in_mode})"
                )
        elif reason == "share":
            if not (span >= spec.min_duration and in_mode == 0 and share_blocked >= spec.min_storm_outlets):
                raise InfeasibleSpecError(
                    f"{label} near-miss 'share' needs >= {spec.min_storm_outlets} outlets blocked "
                    f"by the share test alone (span={span}, in_mode={in_mode}, blocked={share_blocked})"
                )
        elif reason == "window_volume":
            if not (span >= spec.min_duration and in_mode == 0 and volume_blocked >= spec.min_storm_outlets):
                raise InfeasibleSpecError(
                    f"{label} near-miss 'window_volume' needs >= {spec.min_storm_outlets} outlets blocked "
                    f"by the window floor alone (span={span}, in_mode={in_mode}, blocked={volume_blocked})"
                )


# --- generation --------------------------------------------------------------


def _peaked_topic_dist(topic: int, k: int, peak: float = 0.8) -> tuple[float, ...]:
    rest = (1.0 - peak) / (k - 1)
    return tuple(peak if i == topic else rest for i in range(k))


def generate_synthetic_corpus(spec: SyntheticSpec, seed: int = 0) -> SyntheticDataset:
    """Build the corpus and its ground truth; deterministic in (spec, seed).

    Article ids run 0..N-1 in day-major generation order. Members of one
    planted cluster share a dedicated entity and a dedicated token block (plus
    one unique token each), so entity blocking pairs them and the mock
    embedder scores them near cosine 1; background articles draw tokens and
    entities from pools disjoint from every cluster's.
    """
    validate_spec(spec)
    rng = np.random.default_rng(seed)
    cluster_index = {c.name: i for i, c in enumerate(spec.clusters)}
    by_day: dict[int, list[tuple[PlantedCluster, str, int]]] = {}
    for cluster in spec.clusters:
        for day, outlet, count in cluster.schedule:
            if count > 0:
                by_day.setdefault(day, []).append((cluster, outlet, count))

    outlets = {o.name: OutletProfile(o.name, o.scope, o.state, o.reliability) for o in spec.outlets}
    articles: list[Article] = []
    member_ids: dict[str, list[int]] = {c.name: [] for c in spec.clusters}
    member_seq: dict[str, int] = {c.name: 0 for c in spec.clusters}
    background = 0
    next_id = 0

    for day in range(spec.days):
        date = spec.start + dt.timedelta(days=day)
        for outlet in spec.outlets:
            for i in range(outlet.daily_volume):
                tokens = rng.integers(0, spec.vocab_size, size=spec.text_words)
                ent_ids = rng.integers(0, spec.background_entity_pool, size=spec.entities_per_background)
                topic = int(rng.integers(0, spec.topics_k))
                articles.append(
                    Article(
                        id=next_id,
                        outlet=outlet.name,
                        date=date,
                        title=f"{outlet.name} brief {day}-{i}",
                        text=" ".join(f"w{t}" for t in tokens),
                        entities=tuple((f"Desk Item {e}", "ORG") for e in sorted(set(int(x) for x in ent_ids))),
                        topic_dist=_peaked_topic_dist(topic, spec.topics_k),
                    )
                )
                background += 1
                next_id += 1
        for cluster, outlet_name, count in by_day.get(day, ()):
            ci = cluster_index[cluster.name]
            base_text = " ".join(f"c{ci}w{j}" for j in range(spec.text_words))
            for _ in range(count):
                seq = member_seq[cluster.name]
                member_seq[cluster.name] = seq + 1
                articles.append(
                    Article(
                        id=next_id,
                        outlet=outlet_name,
                        date=date,
                        title=f"{cluster.name} update {seq}",
                        text=f"{base_text} u{next_id}",
                        entities=((f"{cluster.name} Focus", "EVENT"),),
                        topic_dist=_peaked_topic_dist(cluster.topic, spec.topics_k),
                    )
                )
                member_ids[cluster.name].append(next_id)
                next_id += 1

    corpus = Corpus(
        articles=tuple(articles),
        outlets=outlets,
        date_range=(spec.start, spec.start + dt.timedelta(days=spec.days - 1)),
    )
    gt_clusters = tuple(
        GroundTruthCluster(
            name=c.name,
            article_ids=tuple(member_ids[c.name]),
            expect_storm=c.expect_storm,
            near_miss_reason=c.near_miss_reason,
            first_day=spec.start + dt.timedelta(days=c.first_day),
            duration_days=c.span_days,
        )
        for c in spec.clusters
    )
    ground_truth = GroundTruth(
        clusters=gt_clusters,
        background_articles=background,
        total_articles=len(articles),
    )
    return SyntheticDataset(corpus=corpus, ground_truth=ground_truth, spec=spec, seed=seed)


def ground_truth_to_dict(gt: GroundTruth) -> dict:
    return {
        "clusters": [
            {
                "name": c.name,
                "article_ids": list(c.article_ids),
                "expect_storm": c.expect_storm,
                "near_miss_reason": c.near_miss_reason,
                "first_day": c.first_day.isoformat(),
                "duration_days": c.duration_days,
                "size": len(c.article_ids),
            }
            for c in gt.clusters
        ],
        "totals": {
            "articles": gt.total_articles,
            "background": gt.background_articles,
            "planted": gt.total_articles - gt.background_articles,
        },
    }


def ground_truth_from_dict(obj: dict) -> GroundTruth:
    clusters = tuple(
        GroundTruthCluster(
            name=c["name"],
            article_ids=tuple(c["article_ids"]),
            expect_storm=c["expect_storm"],
            near_miss_reason=c["near_miss_reason"],
            first_day=dt.date.fromisoformat(c["first_day"]),
            duration_days=c["duration_days"],
        )
        for c in obj["clusters"]
    )
    return GroundTruth(
        clusters=clusters,
        background_articles=obj["totals"]["background"],
        total_articles=obj["totals"]["articles"],
    )


def write_synthetic_dataset(dataset: SyntheticDataset, out_dir: str | Path) -> dict[str, Path]:
    """Write articles, outlets, mock embeddings (EMB1 + ids) and ground truth.

    Embeddings use the dataset's generation seed, so two writes of the same
    dataset are byte-identical.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "articles": out / "articles.jsonl",
        "outlets": out / "outlets.jsonl",
        "embeddings": out / "embeddings.emb1",
        "ground_truth": out / "groundtruth.json",
    }
    export_articles(dataset.corpus, paths["articles"])
    export_outlets(dataset.corpus, paths["outlets"])
    dim = dataset.spec.embed_dim
    vectors = np.empty((len(dataset.corpus), dim), dtype=np.float32)
    ids = []
    for i, art in enumerate(dataset.corpus):
        vectors[i] = mock_embed(art.title, art.text, dim=dim, seed=dataset.seed)
        ids.append(art.id)
    write_embeddings(ids, vectors, paths["embeddings"])
    paths["ground_truth"].write_text(
        json.dumps(ground_truth_to_dict(dataset.ground_truth), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return paths


# --- presets ------------------------------------------------------------------


def _main_outlets(n_national: int, n_local: int, volume: int) -> list[SyntheticOutlet]:
    states = [
        "CA", "TX", "NY", "FL", "IL", "PA", "OH", "GA", "NC", "MI",
        "WA", "AZ", "MA", "TN", "IN", "MO", "MD", "WI", "CO", "MN",
    ]
    reliab = ["reliable", "reliable", "mixed", "unreliable"]
    outlets = [
        SyntheticOutlet(
            name=f"National Desk {i}",
            scope="national",
            daily_volume=volume,
            reliability=reliab[i % len(reliab)],
        )
        for i in range(n_national)
    ]
    outlets += [
        SyntheticOutlet(
            name=f"Local Ledger {i}",
            scope="local",
            daily_volume=volume,
            state=states[i % len(states)],
            reliability=reliab[(i + 1) % len(reliab)],
        )
        for i in range(n_local)
    ]
    return outlets


def tiny_spec() -> SyntheticSpec:
    """Small corpus (~2k articles): one storm, one duration near-miss. Fast tests."""
    outlets = _main_outlets(4, 2, volume=14)
    names = [o.name for o in outlets]
    clusters = (
        PlantedCluster(
            name="Alpha Affair",
            schedule=uniform_schedule(names[:5], start_day=4, duration=8, per_day=2),
            expect_storm=True,
            topic=1,
        ),
        PlantedCluster(
            name="Beta Blip",
            schedule=uniform_schedule(names[:5], start_day=13, duration=6, per_day=2),
            expect_storm=False,
            near_miss_reason="duration",
            topic=2,
        ),
    )
    return SyntheticSpec(
        start=dt.date(2021, 1, 1),
        days=22,
        outlets=tuple(outlets),
        clusters=clusters,
        topics_k=6,
        background_entity_pool=120,
    )


def benchmark_spec() -> SyntheticSpec:
    """The 100,000-article benchmark: 10 planted storms, 20 labeled near-misses."""
    main = _main_outlets(12, 12, volume=14)
    thin = [
        SyntheticOutlet(
            name=f"Thin Wire {i}",
            scope="local",
            daily_volume=8,
            state=["OR", "NV", "UT", "KS", "IA", "AL"][i],
            reliability="mixed",
        )
        for i in range(6)
    ]
    outlets = main + thin
    names = [o.name for o in main]
    thin_names = [o.name for o in thin]

    def pick(k: int, n: int) -> list[str]:
        return [names[(k * 3 + j) % len(names)] for j in range(n)]

    storm_shapes = [
        # (total, start, duration, outlets)
        (500, 10, 25, 8),
        (460, 30, 23, 8),
        (400, 55, 20, 7),
        (360, 80, 18, 7),
        (320, 105, 16, 6),
        (280, 130, 14, 6),
        (260, 155, 13, 6),
        (240, 180, 12, 5),
        (165, 200, 11, 5),
        (120, 220, 12, 5),
    ]
    clusters: list[PlantedCluster] = []
    for k, (total, start, duration, n_out) in enumerate(storm_shapes):
        clusters.append(
            PlantedCluster(
                name=f"Storm Case {k}",
                schedule=cycled_schedule(pick(k, n_out), start, duration, total),
                expect_storm=True,
                topic=k % 10,
            )
        )
    for k in range(5):
        clusters.append(
            PlantedCluster(
                name=f"Short Fuse {k}",
                schedule=uniform_schedule(pick(k + 10, 5), 15 + 45 * k, duration=6, per_day=2),
                expect_storm=False,
                near_miss_reason="duration",
                topic=k % 10,
            )
        )
    for k in range(5):
        clusters.append(
            PlantedCluster(
                name=f"Quiet Quartet {k}",
                schedule=uniform_schedule(pick(k + 3, 4), 25 + 45 * k, duration=8, per_day=2),
                expect_storm=False,
                near_miss_reason="outlets",
                topic=(k + 3) % 10,
            )
        )
    for k in range(5):
        clusters.append(
            PlantedCluster(
                name=f"Faint Echo {k}",
                schedule=sparse_schedule(pick(k + 6, 5), 35 + 45 * k, day_offsets=[0, 4, 8]),
                expect_storm=False,
                near_miss_reason="share",
                topic=(k + 5) % 10,
            )
        )
    for k in range(5):
        clusters.append(
            PlantedCluster(
                name=f"Thin Thread {k}",
                schedule=uniform_schedule(thin_names[:5], 20 + 45 * k, duration=8, per_day=1),
                expect_storm=False,
                near_miss_reason="window_volume",
                topic=(k + 7) % 10,
            )
        )
    return SyntheticSpec(
        start=dt.date(2020, 4, 1),
        days=250,
        outlets=tuple(outlets),
        clusters=tuple(clusters),
        topics_k=10,
        background_entity_pool=4000,
    )


def flashpoint_trial_spec() -> SyntheticSpec:
    """One long storm shaped like a famous trial-coverage case.

    Starts 2021-03-04, spans 54 days, 1378 articles split exactly 689/689
    national/local (an even alternating outlet cycle), peaking on day 48
    (2021-04-20).
    """
    nat = [SyntheticOutlet(f"National Desk {i}", "national", 14) for i in range(10)]
    states = ["CA", "TX", "NY", "FL", "IL", "PA", "OH", "GA", "NC", "MI"]
    loc = [
        SyntheticOutlet(f"Local Ledger {i}", "local", 14, state=states[i]) for i in range(10)
    ]
    cycle: list[str] = []
    for i in range(10):
        cycle.append(nat[i].name)
        cycle.append(loc[i].name)
    cluster = PlantedCluster(
        name="Flashpoint Trial",
        schedule=cycled_schedule(cycle, start_day=3, duration=54, total=1378, peak_index=48),
        expect_storm=True,
        topic=4,
    )
    return SyntheticSpec(
        start=dt.date(2021, 3, 1),
        days=64,
        outlets=tuple(nat + loc),
        clusters=(cluster,),
        topics_k=10,
        background_entity_pool=800,
    )


PRESETS = {
    "tiny": tiny_spec,
    "benchmark": benchmark_spec,
    "flashpoint": flashpoint_trial_spec,
}
