"""Topic assignment, storm topic skew, gatekeeping series, and influence graphs."""
from __future__ import annotations

import csv
import json
import datetime as dt
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .corpus import Article, Corpus, OutletProfile
from .storms import StormRecord

logger = logging.getLogger(__name__)

DEFAULT_LOOKBACK_DAYS = 2
DEFAULT_GATEKEEPING_WINDOW = 14


class MissingTopicsError(ValueError):
    """An operation needed topic distributions that some articles lack."""

    def __init__(self, article_ids: Sequence[int], context: str):
        ids = sorted(article_ids)
        shown = ", ".join(str(i) for i in ids[:20])
        more = f" (+{len(ids) - 20} more)" if len(ids) > 20 else ""
        super().__init__(f"{context}: articles without topic_dist: {shown}{more}")
        self.article_ids = tuple(ids)


@dataclass(frozen=True)
class TopicModelMeta:
    """Shape of the external topic model whose distributions articles carry."""

    k: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError(f"topic count must be >= 2, got {self.k}")
        if self.labels is not None and len(self.labels) != self.k:
            raise ValueError(f"{len(self.labels)} labels for {self.k} topics")


def assign_article_topic(topic_dist: Sequence[float] | None, k: int | None = None) -> int:
    """Index of the highest-probability topic; ties break to the lowest index."""
    if topic_dist is None:
        raise MissingTopicsError([], "assign_article_topic: no distribution given")
    if k is not None and len(topic_dist) != k:
        raise ValueError(f"distribution has {len(topic_dist)} entries, expected {k}")
    best = 0
    for i in range(1, len(topic_dist)):
        if topic_dist[i] > topic_dist[best]:
            best = i
    return best


def storm_topic(storm: StormRecord, corpus: Corpus, k: int | None = None) -> int:
    """Dominant topic of a storm: argmax of the element-wise sum of member distributions."""
    missing = [aid for aid in storm.article_ids if corpus.article(aid).topic_dist is None]
    if missing:
        raise MissingTopicsError(missing, f"storm_topic(cluster {storm.cluster_id})")
    total: np.ndarray | None = None
    for aid in storm.article_ids:
        dist = np.asarray(corpus.article(aid).topic_dist, dtype=np.float64)
        if k is not None and dist.shape[0] != k:
            raise ValueError(f"article {aid}: distribution has {dist.shape[0]} entries, expected {k}")
        if total is None:
            total = dist.copy()
        elif dist.shape != total.shape:
            raise ValueError(f"article {aid}: inconsistent distribution length {dist.shape[0]}")
        else:
            total += dist
    assert total is not None
    return int(np.argmax(total))


def _topic_histogram_pct(articles: Iterable[Article], k: int, context: str) -> np.ndarray:
    counts = np.zeros(k, dtype=np.float64)
    missing: list[int] = []
    n = 0
    for art in articles:
        if art.topic_dist is None:
            missing.append(art.id)
            continue
        if len(art.topic_dist) != k:
            raise ValueError(
                f"article {art.id}: distribution has {len(art.topic_dist)} entries, expected {k}"
            )
        counts[assign_article_topic(art.topic_dist)] += 1
        n += 1
    if missing:
        raise MissingTopicsError(missing, context)
    if n == 0:
        raise ValueError(f"{context}: no articles")
    return 100.0 * counts / n


def topic_skew(
    storm_articles: Sequence[Article],
    nonstorm_articles: Sequence[Article],
    k: int,
) -> np.ndarray:
    """Per-topic percentage-point difference: storm share minus non-storm share.

    Both populations are histogrammed by assigned topic and normalized to
    percentages, so the returned vector sums to ~0.
    """
    storm_pct = _topic_histogram_pct(storm_articles, k, "topic_skew(storm articles)")
    nonstorm_pct = _topic_histogram_pct(nonstorm_articles, k, "topic_skew(non-storm articles)")
    return storm_pct - nonstorm_pct


def gatekeeping_series(
    storm: StormRecord,
    corpus: Corpus,
    window: int = DEFAULT_GATEKEEPING_WINDOW,
    exclude_storm_articles: bool = False,
    topic: int | None = None,
) -> list[float | None]:
    """Share of storm-topic coverage around a storm's start, day by day.

    Returns 2*window+1 points for day offsets -window..+window relative to
    the storm's start day (offset 0). Each point is the percentage of that
    day's articles — published by outlets that covered the storm — whose
    assigned topic equals the storm's topic. Days with zero qualifying
    articles yield None. With ``exclude_storm_articles`` the storm's own
    member articles drop out of both numerator and denominator. Articles
    without a topic distribution cannot be assigned a topic and are left out
    of both sides as well.
    """
    if window < 0:
        raise ValueError(f"window must be >= 0, got {window}")
    target = storm_topic(storm, corpus) if topic is None else topic
    member_ids = set(storm.article_ids)
    covering = {corpus.article(aid).outlet for aid in storm.article_ids}

    by_day: dict[dt.date, list[Article]] = {}
    for art in corpus:
        if art.outlet in covering:
            by_day.setdefault(art.date, []).append(art)

    series: list[float | None] = []
    for offset in range(-window, window + 1):
        day = storm.start_day + dt.timedelta(days=offset)
        num = 0
        den = 0
        for art in by_day.get(day, ()):
            if exclude_storm_articles and art.id in member_ids:
                continue
            if art.topic_dist is None:
                continue
            den += 1
            if assign_article_topic(art.topic_dist) == target:
                num += 1
        series.append(100.0 * num / den if den else None)
    return series


def average_gatekeeping_series(
    storms: Sequence[StormRecord],
    corpus: Corpus,
    window: int = DEFAULT_GATEKEEPING_WINDOW,
    exclude_storm_articles: bool = False,
) -> list[float | None]:
    """Mean gatekeeping series across storms, ignoring null points per offset.

    An offset where every storm is null stays null.
    """
    if not storms:
        raise ValueError("no storms")
    per_storm = [
        gatekeeping_series(s, corpus, window=window, exclude_storm_articles=exclude_storm_articles)
        for s in storms
    ]
    return _mean_ignoring_none(per_storm)


def _mean_ignoring_none(rows: Sequence[Sequence[float | None]]) -> list[float | None]:
    out: list[float | None] = []
    for i in range(len(rows[0])):
        vals = [row[i] for row in rows if row[i] is not None]
        out.append(sum(vals) / len(vals) if vals else None)
    return out


# --- influence graphs -------------------------------------------------------


@dataclass(frozen=True)
class InfluenceGraph:
    """Directed lead-lag graph; ``net`` is out-weight minus in-weight per node."""

    nodes: tuple[str, ...]
    edges: dict[tuple[str, str], int]
    net: dict[str, int]

    def __post_init__(self) -> None:
        for (src, dst), w in self.edges.items():
            if src == dst:
                raise ValueError(f"self-edge on {src!r}")
            if w < 0:
                raise ValueError(f"negative weight on {(src, dst)}")


def _outlet_type_key(profile: OutletProfile) -> str:
    if profile.scope == "local":
        return "local"
    return f"national-{profile.reliability}"


def build_influence_graph(
    storms: Sequence[StormRecord],
    corpus: Corpus,
    lookback_days: int = DEFAULT_LOOKBACK_DAYS,
    node_key: str = "outlet",
) -> InfluenceGraph:
    """Count, per ordered outlet pair, the storms where one led the other in.

    For each storm and each covering outlet j (first member article on day
    d_j), every other outlet i with a member article dated within
    [d_j - lookback_days, d_j - 1] gets one credit on edge i -> j — at most
    one per storm per ordered pair, and never for same-day coverage.

    ``node_key`` "outlet" keeps outlet-name nodes; "outlet-type" relabels
    nodes to 'local' or 'national-<reliability>' and sums the outlet-level
    credits over each type pair (credits mapping to a single type are
    dropped: the graph carries no self-edges).
    """
    if lookback_days < 1:
        raise ValueError(f"lookback_days must be >= 1, got {lookback_days}")
    if node_key not in ("outlet", "outlet-type"):
        raise ValueError(f"node_key must be 'outlet' or 'outlet-type', got {node_key!r}")

    outlet_nodes: set[str] = set()
    edges: dict[tuple[str, str], int] = {}
    for storm in storms:
        dates_by_outlet: dict[str, set[dt.date]] = {}
        for aid in storm.article_ids:
            art = corpus.article(aid)
            dates_by_outlet.setdefault(art.outlet, set()).add(art.date)
        outlet_nodes.update(dates_by_outlet)
        firsts = {o: min(ds) for o, ds in dates_by_outlet.items()}
        for j, dj in firsts.items():
            lookback = {dj - dt.timedelta(days=k) for k in range(1, lookback_days + 1)}
            for i, di_dates in dates_by_outlet.items():
                if i != j and di_dates & lookback:
                    edges[(i, j)] = edges.get((i, j), 0) + 1

    if node_key == "outlet-type":
        key_of = {o: _outlet_type_key(corpus.outlets[o]) for o in outlet_nodes}
        typed: dict[tuple[str, str], int] = {}
        for (i, j), w in edges.items():
            ti, tj = key_of[i], key_of[j]
            if ti != tj:
                typed[(ti, tj)] = typed.get((ti, tj), 0) + w
        edges = typed
        nodes = tuple(sorted(set(key_of.values())))
    else:
        nodes = tuple(sorted(outlet_nodes))

    net = {n: 0 for n in nodes}
    for (i, j), w in edges.items():
        net[i] += w
        net[j] -= w
    return InfluenceGraph(nodes=nodes, edges=edges, net=net)


def top_outlets_subgraph(
    graph: InfluenceGraph,
    storms: Sequence[StormRecord],
    corpus: Corpus,
    n: int = 20,
    outlet_filter: Callable[[OutletProfile], bool] | None = None,
) -> InfluenceGraph:
    """Restrict an outlet-granularity graph to the n outlets with most storm coverage.

    Outlets are ranked by their total storm-member article count (ties break
    by name) among those passing ``outlet_filter``; edges are re-restricted
    and net recomputed within the subgraph. Asking for more outlets than
    qualify clamps with a warning.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    coverage: dict[str, int] = {}
    for storm in storms:
        for aid in storm.article_ids:
            outlet = corpus.article(aid).outlet
            coverage[outlet] = coverage.get(outlet, 0) + 1
    qualifying = [
        o
        for o in graph.nodes
        if outlet_filter is None or outlet_filter(corpus.outlets[o])
    ]
    if n > len(qualifying):
        logger.warning(
            "requested top %d outlets but only %d qualify; clamping", n, len(qualifying)
        )
        n = len(qualifying)
    ranked = sorted(qualifying, key=lambda o: (-coverage.get(o, 0), o))[:n]
    keep = set(ranked)
    edges = {(i, j): w for (i, j), w in graph.edges.items() if i in keep and j in keep}
    net = {o: 0 for o in ranked}
    for (i, j), w in edges.items():
        net[i] += w
        net[j] -= w
    return InfluenceGraph(nodes=tuple(ranked), edges=edges, net=net)


# --- fixture helper ---------------------------------------------------------


def keyword_bucket_topics(text: str, buckets: Sequence[Sequence[str]]) -> tuple[float, ...]:
    """Toy topic distribution from keyword counts. Fixture helper only.

    Counts case-insensitive keyword hits per bucket and normalizes; a text
    hitting nothing comes back uniform. This is not a topic model and must
    not back any real analysis.
    """
    if len(buckets) < 2:
        raise ValueError("need at least two buckets")
    lowered = text.lower()
    hits = [float(sum(lowered.count(kw.lower()) for kw in bucket)) for bucket in buckets]
    total = sum(hits)
    if total == 0.0:
        return tuple(1.0 / len(buckets) for _ in buckets)
    return tuple(h / total for h in hits)


# --- serialization ----------------------------------------------------------


def influence_graph_to_dict(graph: InfluenceGraph) -> dict:
    return {
        "nodes": [{"id": node, "net": graph.net[node]} for node in graph.nodes],
        "edges": [
            {"src": src, "dst": dst, "weight": w}
            for (src, dst), w in sorted(graph.edges.items())
        ],
    }


def write_influence_json(graph: InfluenceGraph, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(influence_graph_to_dict(graph), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def write_influence_dot(graph: InfluenceGraph, path: str | Path) -> None:
    """Graphviz rendering with pen widths proportional to edge weight."""
    lines = ["digraph influence {"]
    for node in graph.nodes:
        lines.append(f'  "{node}" [label="{node}\\nnet {graph.net[node]:+d}"];')
    max_w = max(graph.edges.values(), default=1)
    for (src, dst), w in sorted(graph.edges.items()):
        penwidth = 0.5 + 2.5 * w / max_w
        lines.append(f'  "{src}" -> "{dst}" [penwidth={penwidth:.3f}, label="{w}"];')
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_gatekeeping_csv(
    path: str | Path,
    series_by_label: dict[str, Sequence[float | None]],
    window: int = DEFAULT_GATEKEEPING_WINDOW,
) -> None:
    """Offsets -window..window as rows, one column per labeled series; nulls empty."""
    labels = sorted(series_by_label)
    for label in labels:
        if len(series_by_label[label]) != 2 * window + 1:
            raise ValueError(f"series {label!r} has wrong length for window {window}")
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["offset"] + labels)
        for i, offset in enumerate(range(-window, window + 1)):
            row: list[str | int] = [offset]
            for label in labels:
                v = series_by_label[label][i]
                row.append("" if v is None else repr(v))
            writer.writerow(row)
