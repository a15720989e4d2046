"""Staged execution: artifacts, manifests, resumability, reproducibility.

Every stage reads its upstream artifacts from the work directory, writes its
own artifacts plus a ``manifest_<stage>.json`` recording input/output SHA-256
hashes, a config snapshot, record counts and wall time. Before a stage
consumes upstream artifacts it re-hashes them against the upstream manifest,
so truncated or hand-edited files surface as errors instead of silent bad
numbers. Reruns with unchanged inputs and config are byte-identical on every
data artifact (manifests differ only in wall time).
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import time
from pathlib import Path

import numpy as np

from . import analysis, clustering, entities, similarity, storms as storms_mod
from .config import ConfigError, PipelineConfig
from .corpus import Corpus, dedup, export_articles, export_outlets, ingest
from .synth import SyntheticDataset, write_synthetic_dataset

logger = logging.getLogger(__name__)

STAGE_ORDER = (
    "ingest",
    "index",
    "candidates",
    "score",
    "cluster",
    "storms",
    "stats",
    "topics",
    "gatekeeping",
    "influence",
)

DEPENDENCIES: dict[str, tuple[str, ...]] = {
    "ingest": (),
    "index": ("ingest",),
    "candidates": ("ingest", "index"),
    "score": ("ingest", "candidates"),
    "cluster": ("ingest", "score"),
    "storms": ("ingest", "cluster"),
    "stats": ("cluster", "storms"),
    "topics": ("ingest", "storms"),
    "gatekeeping": ("ingest", "storms"),
    "influence": ("ingest", "storms"),
}


class UpstreamError(RuntimeError):
    """A required upstream artifact is missing, stale, or partially written (exit 3)."""


@dataclasses.dataclass(frozen=True)
class StageResult:
    stage: str
    outputs: dict[str, str]
    counts: dict
    wall_time_s: float


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _manifest_path(workdir: Path, stage: str) -> Path:
    return workdir / f"manifest_{stage}.json"


def _write_manifest(
    workdir: Path,
    stage: str,
    config: PipelineConfig,
    inputs: dict[str, Path],
    outputs: dict[str, Path],
    counts: dict,
    wall_time_s: float,
) -> None:
    manifest = {
        "stage": stage,
        "config": config.snapshot(),
        "inputs": {str(p): _sha256(p) for p in inputs.values()},
        "outputs": {p.name: _sha256(p) for p in outputs.values()},
        "counts": counts,
        "wall_time_s": wall_time_s,
    }
    _manifest_path(workdir, stage).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def verify_stage_outputs(workdir: Path, stage: str) -> None:
    """Check that a stage ran and its recorded outputs are intact on disk."""
    mpath = _manifest_path(workdir, stage)
    if not mpath.exists():
        raise UpstreamError(f"stage {stage!r} has not run in {workdir} (missing {mpath.name})")
    try:
        manifest = json.loads(mpath.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UpstreamError(f"{mpath}: unreadable manifest: {exc}") from exc
    for name, digest in manifest.get("outputs", {}).items():
        path = workdir / name
        if not path.exists():
            raise UpstreamError(f"stage {stage!r} artifact missing: {path}")
        if _sha256(path) != digest:
            raise UpstreamError(
                f"stage {stage!r} artifact {path.name} does not match its manifest hash "
                "(partial write or external modification)"
            )


def _require_upstream(workdir: Path, stage: str) -> None:
    for dep in DEPENDENCIES[stage]:
        verify_stage_outputs(workdir, dep)


def _load_corpus(workdir: Path) -> Corpus:
    result = ingest(workdir / "corpus.articles.jsonl", workdir / "corpus.outlets.jsonl")
    if result.rejected:
        raise UpstreamError(
            f"canonical corpus artifacts are corrupt: {len(result.rejected)} bad records"
        )
    return result.corpus


def _load_storms(workdir: Path) -> list[storms_mod.StormRecord]:
    return storms_mod.read_storms_jsonl(workdir / "storms.jsonl")


# --- stage bodies -----------------------------------------------------------


def _stage_ingest(config: PipelineConfig, workdir: Path):
    articles_in = Path(config.articles_path)
    outlets_in = Path(config.outlets_path)
    for p in (articles_in, outlets_in):
        if not p.exists():
            raise UpstreamError(f"input file not found: {p}")
    declared = None
    if config.start_date is not None and config.end_date is not None:
        declared = (config.start_date, config.end_date)
    result = ingest(articles_in, outlets_in, date_range=declared)
    deduped = dedup(result.corpus)

    out_articles = workdir / "corpus.articles.jsonl"
    out_outlets = workdir / "corpus.outlets.jsonl"
    out_rejects = workdir / "ingest_rejects.jsonl"
    export_articles(deduped, out_articles)
    export_outlets(deduped, out_outlets)
    with out_rejects.open("w", encoding="utf-8") as fh:
        for rec in result.rejected:
            fh.write(
                json.dumps(
                    {"line": rec.line, "reason": rec.reason, "detail": rec.detail},
                    separators=(",", ":"),
                )
            )
            fh.write("\n")
    counts = {
        "accepted": len(result.corpus),
        "rejected": len(result.rejected),
        "after_dedup": len(deduped),
        "outlets": len(deduped.outlets),
    }
    inputs = {"articles": articles_in, "outlets": outlets_in}
    outputs = {"articles": out_articles, "outlets": out_outlets, "rejects": out_rejects}
    return counts, inputs, outputs


def _stage_index(config: PipelineConfig, workdir: Path):
    corpus = _load_corpus(workdir)
    index = entities.build_index(corpus, max_count=config.max_count)
    out = workdir / "entity_index.json"
    out.write_text(
        json.dumps(entities.index_to_dict(index), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    counts = {"entities": len(index.postings), "excluded": len(index.excluded)}
    inputs = {"articles": workdir / "corpus.articles.jsonl"}
    return counts, inputs, {"index": out}


def _stage_candidates(config: PipelineConfig, workdir: Path):
    corpus = _load_corpus(workdir)
    index_path = workdir / "entity_index.json"
    index = entities.index_from_dict(json.loads(index_path.read_text(encoding="utf-8")))
    out = workdir / "candidates.cnd1"
    pairs = entities.generate_candidates(index, corpus, max_day_gap=config.max_day_gap)
    n = entities.write_candidates_cnd1(pairs, out)
    counts = {"pairs": n}
    inputs = {"articles": workdir / "corpus.articles.jsonl", "index": index_path}
    return counts, inputs, {"candidates": out}


def _stage_score(config: PipelineConfig, workdir: Path):
    corpus = _load_corpus(workdir)
    cand_path = workdir / "candidates.cnd1"
    inputs = {"articles": workdir / "corpus.articles.jsonl", "candidates": cand_path}
    outputs: dict[str, Path] = {}

    if config.embeddings_path:
        emb_path = Path(config.embeddings_path)
        if not emb_path.exists():
            raise UpstreamError(f"embeddings file not found: {emb_path}")
        matrix = similarity.load_embeddings(emb_path)
        inputs["embeddings"] = emb_path
        ids_file = similarity.default_ids_path(emb_path)
        if ids_file.exists():
            inputs["embedding_ids"] = ids_file
    else:
        # Self-contained mode: embed the corpus with the deterministic mock.
        vectors = [
            similarity.mock_embed(a.title, a.text, dim=config.embed_dim, seed=config.seed)
            for a in corpus
        ]
        emb_path = workdir / "embeddings.emb1"
        similarity.write_embeddings(corpus.ids, np.stack(vectors), emb_path)
        matrix = similarity.load_embeddings(emb_path)
        outputs["embeddings"] = emb_path
        outputs["embedding_ids"] = similarity.default_ids_path(emb_path)

    result = similarity.score_candidates(
        entities.read_candidates_cnd1(cand_path),
        matrix,
        threshold=config.threshold,
        threads=config.threads,
    )
    edges_path = workdir / "edges.jsonl"
    similarity.write_edges_jsonl(result.edges, edges_path)
    outputs["edges"] = edges_path
    counts = {
        "pairs": result.scored_pairs + result.skipped_pairs,
        "scored_pairs": result.scored_pairs,
        "edges": len(result.edges),
        "articles_missing_embeddings": len(result.missing_ids),
        "skipped_pairs": result.skipped_pairs,
    }
    return counts, inputs, outputs


def _stage_cluster(config: PipelineConfig, workdir: Path):
    corpus = _load_corpus(workdir)
    edges_path = workdir / "edges.jsonl"
    edge_pairs = ((e.a, e.b) for e in similarity.read_edges_jsonl(edges_path))
    assignment = clustering.connected_components(edge_pairs, corpus.ids)
    clusters = clustering.build_story_clusters(assignment, corpus, min_size=config.min_cluster_size)
    out = workdir / "clusters.jsonl"
    clustering.write_clusters_jsonl(clusters, out)
    counts = {
        "clusters": len(clusters),
        "clustered_articles": sum(c.size for c in clusters),
    }
    inputs = {"articles": workdir / "corpus.articles.jsonl", "edges": edges_path}
    return counts, inputs, {"clusters": out}


def _stage_storms(config: PipelineConfig, workdir: Path):
    corpus = _load_corpus(workdir)
    clusters_path = workdir / "clusters.jsonl"
    clusters = list(clustering.read_clusters_jsonl(clusters_path))
    found = storms_mod.identify_storms(
        clusters,
        corpus,
        window_days=config.window_days,
        share_threshold=config.share_threshold,
        min_window_articles=config.min_window_articles,
        min_duration=config.min_duration,
        min_storm_outlets=config.min_storm_outlets,
    )
    out_jsonl = workdir / "storms.jsonl"
    out_csv = workdir / "storms.csv"
    storms_mod.write_storms_jsonl(found, out_jsonl)
    storms_mod.write_storms_csv(found, out_csv)
    counts = {
        "storms": len(found),
        "storm_articles": sum(s.article_count for s in found),
    }
    inputs = {"articles": workdir / "corpus.articles.jsonl", "clusters": clusters_path}
    return counts, inputs, {"storms": out_jsonl, "storms_csv": out_csv}


def _stage_stats(config: PipelineConfig, workdir: Path):
    storm_list = _load_storms(workdir)
    clusters = list(clustering.read_clusters_jsonl(workdir / "clusters.jsonl"))
    storm_cluster_ids = {s.cluster_id for s in storm_list}
    outputs: dict[str, Path] = {}
    counts: dict = {"storms": len(storm_list)}

    summary_path = workdir / "storm_summary.json"
    if storm_list:
        summary = storms_mod.storm_summary(storm_list)
        payload = {
            "storms": len(storm_list),
            "articles": dataclasses.asdict(summary.articles),
            "duration_days": dataclasses.asdict(summary.duration),
            "outlets": dataclasses.asdict(summary.outlets),
            "pct_national": dataclasses.asdict(summary.pct_national),
        }
        peaks = storms_mod.peak_statistics(storm_list)
        peaks_payload = {
            "histogram": {str(k): v for k, v in sorted(peaks.histogram.items())},
            "median": peaks.median,
            "mode": peaks.mode,
        }
    else:
        payload = {"storms": 0}
        peaks_payload = {"histogram": {}, "median": None, "mode": None}
    summary_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    outputs["summary"] = summary_path

    peaks_path = workdir / "peak_stats.json"
    peaks_path.write_text(json.dumps(peaks_payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    outputs["peaks"] = peaks_path

    ecdf_samples: dict[str, list[float]] = {}
    if storm_list:
        ecdf_samples["storm"] = [float(s.duration_days) for s in storm_list]
    nonstorm = [float(c.duration_days) for c in clusters if c.cluster_id not in storm_cluster_ids]
    if nonstorm:
        ecdf_samples["nonstorm"] = nonstorm
    ecdf_path = workdir / "duration_ecdf.csv"
    storms_mod.write_duration_ecdf_csv(ecdf_path, ecdf_samples)
    outputs["ecdf"] = ecdf_path

    if len(storm_list) >= 2:
        articles_series = storms_mod.average_storm_series(
            storm_list,
            horizon_days=config.horizon_days,
            bootstrap_reps=config.bootstrap_reps,
            seed=config.seed,
            values="articles",
        )
        states_series = storms_mod.average_storm_series(
            storm_list,
            horizon_days=config.horizon_days,
            bootstrap_reps=config.bootstrap_reps,
            seed=config.seed,
            values="states",
        )
        series_path = workdir / "average_series.csv"
        storms_mod.write_average_series_csv(series_path, articles_series, states_series)
        outputs["series"] = series_path
        counts["series_horizon_days"] = config.horizon_days
    else:
        counts["series_skipped"] = "needs >= 2 storms"

    inputs = {"storms": workdir / "storms.jsonl", "clusters": workdir / "clusters.jsonl"}
    return counts, inputs, outputs


def _topic_k_for(corpus: Corpus, config: PipelineConfig) -> int:
    for art in corpus:
        if art.topic_dist is not None:
            k = len(art.topic_dist)
            if k != config.topics_k:
                raise ConfigError(
                    f"topics_k={config.topics_k} but corpus distributions have length {k}"
                )
            return k
    raise analysis.MissingTopicsError([a.id for a in corpus][:20], "topics stage")


def _stage_topics(config: PipelineConfig, workdir: Path):
    corpus = _load_corpus(workdir)
    storm_list = _load_storms(workdir)
    k = _topic_k_for(corpus, config)
    storm_topics = {s.cluster_id: analysis.storm_topic(s, corpus, k=k) for s in storm_list}
    topics_path = workdir / "storm_topics.json"
    topics_path.write_text(
        json.dumps({str(cid): t for cid, t in sorted(storm_topics.items())}, indent=2, sort_keys=True)
        + "\n",
        encoding="utf-8",
    )

    member_ids = {aid for s in storm_list for aid in s.article_ids}
    storm_articles = [corpus.article(aid) for aid in sorted(member_ids)]
    nonstorm_articles = [a for a in corpus if a.id not in member_ids]
    skew_path = workdir / "topic_skew.csv"
    if storm_articles and nonstorm_articles:
        skew = analysis.topic_skew(storm_articles, nonstorm_articles, k)
        with skew_path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["topic", "skew_pct_points"])
            for topic, value in enumerate(skew):
                writer.writerow([topic, repr(float(value))])
    else:
        skew_path.write_text("topic,skew_pct_points\n", encoding="utf-8")
    counts = {
        "topics_k": k,
        "storms": len(storm_list),
        "storm_articles": len(storm_articles),
        "nonstorm_articles": len(nonstorm_articles),
    }
    inputs = {"articles": workdir / "corpus.articles.jsonl", "storms": workdir / "storms.jsonl"}
    return counts, inputs, {"storm_topics": topics_path, "skew": skew_path}


def _stage_gatekeeping(config: PipelineConfig, workdir: Path):
    corpus = _load_corpus(workdir)
    storm_list = _load_storms(workdir)
    out = workdir / "gatekeeping.csv"
    window = config.gatekeeping_window
    if storm_list:
        series_all = analysis.average_gatekeeping_series(
            storm_list, corpus, window=window, exclude_storm_articles=False
        )
        series_excl = analysis.average_gatekeeping_series(
            storm_list, corpus, window=window, exclude_storm_articles=True
        )
        analysis.write_gatekeeping_csv(
            out,
            {"pct_all_articles": series_all, "pct_excluding_members": series_excl},
            window=window,
        )
    else:
        analysis.write_gatekeeping_csv(
            out,
            {
                "pct_all_articles": [None] * (2 * window + 1),
                "pct_excluding_members": [None] * (2 * window + 1),
            },
            window=window,
        )
    counts = {"storms": len(storm_list), "window": window}
    inputs = {"articles": workdir / "corpus.articles.jsonl", "storms": workdir / "storms.jsonl"}
    return counts, inputs, {"gatekeeping": out}


def _stage_influence(config: PipelineConfig, workdir: Path):
    corpus = _load_corpus(workdir)
    storm_list = _load_storms(workdir)
    outlet_graph = analysis.build_influence_graph(
        storm_list, corpus, lookback_days=config.lookback_days, node_key="outlet"
    )
    type_graph = analysis.build_influence_graph(
        storm_list, corpus, lookback_days=config.lookback_days, node_key="outlet-type"
    )
    top_graph = analysis.top_outlets_subgraph(
        outlet_graph,
        storm_list,
        corpus,
        n=config.top_n_outlets,
        outlet_filter=lambda p: p.scope == "national" and p.reliability == "reliable",
    )
    outputs: dict[str, Path] = {}
    for label, graph in (
        ("influence_outlets", outlet_graph),
        ("influence_types", type_graph),
        ("influence_top", top_graph),
    ):
        jpath = workdir / f"{label}.json"
        dpath = workdir / f"{label}.dot"
        analysis.write_influence_json(graph, jpath)
        analysis.write_influence_dot(graph, dpath)
        outputs[f"{label}.json"] = jpath
        outputs[f"{label}.dot"] = dpath
    counts = {
        "outlet_nodes": len(outlet_graph.nodes),
        "outlet_edges": len(outlet_graph.edges),
        "total_weight": sum(outlet_graph.edges.values()),
    }
    inputs = {"articles": workdir / "corpus.articles.jsonl", "storms": workdir / "storms.jsonl"}
    return counts, inputs, outputs


_STAGE_BODIES = {
    "ingest": _stage_ingest,
    "index": _stage_index,
    "candidates": _stage_candidates,
    "score": _stage_score,
    "cluster": _stage_cluster,
    "storms": _stage_storms,
    "stats": _stage_stats,
    "topics": _stage_topics,
    "gatekeeping": _stage_gatekeeping,
    "influence": _stage_influence,
}


def run_stage(config: PipelineConfig, stage: str) -> list[StageResult]:
    """Run one named stage, or every stage in order for ``all``.

    Raises :class:`stormpipe.config.ConfigError` for bad configuration and
    :class:`UpstreamError` when required upstream artifacts are missing or
    fail their manifest hashes.
    """
    config.validate()
    if stage != "all" and stage not in _STAGE_BODIES:
        raise ConfigError(f"unknown stage {stage!r}; expected one of {', '.join(STAGE_ORDER)} or all")
    workdir = Path(config.workdir)
    workdir.mkdir(parents=True, exist_ok=True)

    stages = STAGE_ORDER if stage == "all" else (stage,)
    results: list[StageResult] = []
    for name in stages:
        _require_upstream(workdir, name)
        started = time.perf_counter()
        counts, inputs, outputs = _STAGE_BODIES[name](config, workdir)
        wall = time.perf_counter() - started
        _write_manifest(workdir, name, config, inputs, outputs, counts, wall)
        logger.info("stage %s done in %.2fs: %s", name, wall, counts)
        results.append(
            StageResult(
                stage=name,
                outputs={k: str(v) for k, v in outputs.items()},
                counts=counts,
                wall_time_s=wall,
            )
        )
    return results


def generate_synthetic_dataset(dataset: SyntheticDataset, out_dir: str | Path) -> dict[str, Path]:
    """Write a generated dataset to disk (articles, outlets, embeddings, truth)."""
    return write_synthetic_dataset(dataset, out_dir)
