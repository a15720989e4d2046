"""Connected-component story clustering over the similarity edge graph."""
from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .corpus import Corpus


class UnionFind:
    """Disjoint sets with path compression and union by size.

    Examples
    --------
    >>> uf = UnionFind()
    >>> for x in (1, 2, 3, 4):
    ...     uf.add(x)
    >>> _ = uf.union(1, 2)
    >>> _ = uf.union(2, 3)
    >>> uf.find(3) == uf.find(1)
    True
    >>> uf.find(4) == uf.find(1)
    False
    """

    def __init__(self) -> None:
        self._parent: dict[int, int] = {}
        self._size: dict[int, int] = {}

    def add(self, x: int) -> None:
        if x not in self._parent:
            self._parent[x] = x
            self._size[x] = 1

    def __contains__(self, x: int) -> bool:
        return x in self._parent

    def find(self, x: int) -> int:
        root = x
        while self._parent[root] != root:
            root = self._parent[root]
        # second pass: compress the walked path
        while self._parent[x] != root:
            self._parent[x], x = root, self._parent[x]
        return root

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self._size[ra] < self._size[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        self._size[ra] += self._size[rb]
        return ra

    def groups(self) -> dict[int, list[int]]:
        """Map each root to the sorted list of its members."""
        out: dict[int, list[int]] = {}
        for x in self._parent:
            out.setdefault(self.find(x), []).append(x)
        for members in out.values():
            members.sort()
        return out


@dataclass(frozen=True)
class StoryCluster:
    """One story: a connected component of the similarity graph."""

    cluster_id: int
    article_ids: tuple[int, ...]
    first_day: dt.date
    last_day: dt.date

    @property
    def size(self) -> int:
        return len(self.article_ids)

    @property
    def duration_days(self) -> int:
        """Inclusive calendar span in days."""
        return (self.last_day - self.first_day).days + 1


def connected_components(
    edges: Iterable[tuple[int, int]],
    article_universe: Iterable[int],
) -> dict[int, int]:
    """Assign every article in the universe to a connected component.

    Articles with no edges become singleton components. Component ids are
    renumbered 0..C-1 in ascending order of each component's minimum member
    id, so the labeling is independent of edge order. An edge endpoint
    outside the universe raises ``ValueError``.
    """
    uf = UnionFind()
    universe = set(article_universe)
    for x in universe:
        uf.add(x)
    for a, b in edges:
        if a not in universe or b not in universe:
            missing = a if a not in universe else b
            raise ValueError(f"edge endpoint {missing} not in article universe")
        uf.union(a, b)
    components = sorted(uf.groups().values(), key=lambda members: members[0])
    assignment: dict[int, int] = {}
    for cid, members in enumerate(components):
        for aid in members:
            assignment[aid] = cid
    return assignment


def build_story_clusters(
    assignment: dict[int, int],
    corpus: Corpus,
    min_size: int = 2,
) -> list[StoryCluster]:
    """Materialize clusters of at least ``min_size`` articles, with date spans.

    Cluster ids are taken from the assignment unchanged (dropping small
    clusters may leave id gaps); output is sorted by cluster id.
    """
    if min_size < 1:
        raise ValueError(f"min_size must be >= 1, got {min_size}")
    members: dict[int, list[int]] = {}
    for aid, cid in assignment.items():
        members.setdefault(cid, []).append(aid)
    clusters: list[StoryCluster] = []
    for cid in sorted(members):
        ids = sorted(members[cid])
        if len(ids) < min_size:
            continue
        dates = [corpus.article(aid).date for aid in ids]
        clusters.append(
            StoryCluster(
                cluster_id=cid,
                article_ids=tuple(ids),
                first_day=min(dates),
                last_day=max(dates),
            )
        )
    return clusters


def write_clusters_jsonl(clusters: Iterable[StoryCluster], path: str | Path) -> int:
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for c in clusters:
            rec = {
                "cluster_id": c.cluster_id,
                "articles": list(c.article_ids),
                "first_day": c.first_day.isoformat(),
                "last_day": c.last_day.isoformat(),
            }
            fh.write(json.dumps(rec, separators=(",", ":")))
            fh.write("\n")
            n += 1
    return n


def read_clusters_jsonl(path: str | Path) -> Iterator[StoryCluster]:
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            yield StoryCluster(
                cluster_id=obj["cluster_id"],
                article_ids=tuple(obj["articles"]),
                first_day=dt.date.fromisoformat(obj["first_day"]),
                last_day=dt.date.fromisoformat(obj["last_day"]),
            )
