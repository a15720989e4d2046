from __future__ import annotations

import dataclasses
import datetime as dt

import pytest

from stormpipe.synth import (
    InfeasibleSpecError,
    PlantedCluster,
    SyntheticOutlet,
    SyntheticSpec,
    benchmark_spec,
    cycled_schedule,
    flashpoint_trial_spec,
    generate_synthetic_corpus,
    ground_truth_from_dict,
    ground_truth_to_dict,
    spread_counts,
    tiny_spec,
    uniform_schedule,
    validate_spec,
    write_synthetic_dataset,
)


# --- count spreading -------------------------------------------------------------


def test_spread_counts_uniform_remainder_to_earliest():
    assert spread_counts(10, 4) == [3, 3, 2, 2]
    assert spread_counts(8, 4) == [2, 2, 2, 2]
    assert spread_counts(5, 5) == [1, 1, 1, 1, 1]


def test_spread_counts_peak_is_strict_max():
    # peak_index is 1-based, matching storm records
    for total, duration, peak in [(20, 6, 4), (9, 8, 1), (100, 7, 7)]:
        counts = spread_counts(total, duration, peak_index=peak)
        assert sum(counts) == total
        assert all(c >= 1 for c in counts)
        assert all(counts[peak - 1] > c for i, c in enumerate(counts) if i != peak - 1)


def test_spread_counts_rejects_impossible():
    with pytest.raises(ValueError):
        spread_counts(3, 4)  # cannot give every day an article


def test_cycled_schedule_exact_totals():
    outlets = ["A", "B", "C"]
    schedule = cycled_schedule(outlets, start_day=5, duration=4, total=14)
    assert sum(n for _, _, n in schedule) == 14
    days = {d for d, _, _ in schedule}
    assert days == {5, 6, 7, 8}
    assert {o for _, o, _ in schedule} <= set(outlets)


def test_uniform_schedule_shape():
    schedule = uniform_schedule(["A", "B"], start_day=0, duration=3, per_day=2)
    assert len(schedule) == 6
    assert all(n == 2 for _, _, n in schedule)


# --- feasibility validation --------------------------------------------------------


def outlet_row(name, volume=14, scope="national"):
    state = "CA" if scope == "local" else None
    return SyntheticOutlet(name=name, scope=scope, daily_volume=volume, state=state)


def small_spec(clusters):
    return SyntheticSpec(
        start=dt.date(2021, 1, 1),
        days=30,
        outlets=tuple(outlet_row(f"O{i}") for i in range(6)),
        clusters=tuple(clusters),
        topics_k=5,
        background_entity_pool=80,
    )


def test_validate_rejects_storm_claim_with_too_few_outlets():
    cluster = PlantedCluster(
        name="Thin Story",
        schedule=uniform_schedule(["O0", "O1", "O2"], start_day=5, duration=8, per_day=2),
        expect_storm=True,
        near_miss_reason=None,
        topic=1,
    )
    with pytest.raises(InfeasibleSpecError, match="storm"):
        validate_spec(small_spec([cluster]))


def test_validate_rejects_mislabeled_near_miss():
    # 8 qualifying days and 5 outlets: this IS a storm, so the duration
    # near-miss label must be rejected
    cluster = PlantedCluster(
        name="Actually Big",
        schedule=uniform_schedule([f"O{i}" for i in range(5)], start_day=5, duration=8, per_day=2),
        expect_storm=False,
        near_miss_reason="duration",
        topic=1,
    )
    with pytest.raises(InfeasibleSpecError):
        validate_spec(small_spec([cluster]))


def test_validate_accepts_duration_near_miss():
    cluster = PlantedCluster(
        name="Short Story",
        schedule=uniform_schedule([f"O{i}" for i in range(5)], start_day=5, duration=6, per_day=2),
        expect_storm=False,
        near_miss_reason="duration",
        topic=1,
    )
    validate_spec(small_spec([cluster]))


# --- generation ---------------------------------------------------------------------


def test_tiny_dataset_ground_truth_wiring():
    spec = tiny_spec()
    ds = generate_synthetic_corpus(spec, seed=11)
    gt = ds.ground_truth
    assert len(gt.storms) == 1
    assert len(gt.near_misses) == 1
    assert gt.near_misses[0].near_miss_reason == "duration"
    storm = gt.storms[0]
    # membership ids exist and carry the planted entity
    for aid in storm.article_ids:
        art = ds.corpus.article(aid)
        assert any(t == "EVENT" for _, t in art.entities)
    # planted article counts match the schedule
    by_name = {c.name: c for c in spec.clusters}
    assert len(storm.article_ids) == by_name[storm.name].total_articles
    # background + planted = corpus size
    planted = sum(c.total_articles for c in spec.clusters)
    background = sum(o.daily_volume for o in spec.outlets) * spec.days
    assert len(ds.corpus) == planted + background


def test_generation_deterministic_per_seed(tmp_path):
    spec = tiny_spec()
    a_dir, b_dir, c_dir = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    write_synthetic_dataset(generate_synthetic_corpus(spec, seed=5), a_dir)
    write_synthetic_dataset(generate_synthetic_corpus(spec, seed=5), b_dir)
    write_synthetic_dataset(generate_synthetic_corpus(spec, seed=6), c_dir)
    for name in ("articles.jsonl", "outlets.jsonl", "embeddings.emb1", "embeddings.emb1.ids", "groundtruth.json"):
        assert (a_dir / name).read_bytes() == (b_dir / name).read_bytes(), name
    assert (a_dir / "articles.jsonl").read_bytes() != (c_dir / "articles.jsonl").read_bytes()


def test_ground_truth_round_trip():
    ds = generate_synthetic_corpus(tiny_spec(), seed=2)
    again = ground_truth_from_dict(ground_truth_to_dict(ds.ground_truth))
    assert again == ds.ground_truth


def test_benchmark_spec_is_feasible_and_sized():
    spec = benchmark_spec()
    validate_spec(spec)
    background = sum(o.daily_volume for o in spec.outlets) * spec.days
    planted = sum(c.total_articles for c in spec.clusters)
    assert background + planted == 100_000
    storms = [c for c in spec.clusters if c.expect_storm]
    near = [c for c in spec.clusters if not c.expect_storm]
    assert len(storms) == 10
    assert len(near) == 20
    reasons = {c.near_miss_reason for c in near}
    assert reasons == {"duration", "outlets", "share", "window_volume"}


def test_flashpoint_spec_matches_case_profile():
    spec = flashpoint_trial_spec()
    validate_spec(spec)
    (cluster,) = [c for c in spec.clusters if c.expect_storm]
    assert cluster.total_articles == 1378
    assert cluster.span_days == 54
    first_date = spec.start + dt.timedelta(days=cluster.first_day)
    assert first_date == dt.date(2021, 3, 4)
    # alternating national/local outlets split the coverage 50/50
    by_scope = {o.name: o.scope for o in spec.outlets}
    national_articles = sum(n for _, o, n in cluster.schedule if by_scope[o] == "national")
    assert national_articles * 2 == cluster.total_articles
