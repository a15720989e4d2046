"""Named-entity blocking: entity index, candidate pair generation, fallback extraction.

Scoring every article pair in a large corpus is quadratic and hopeless; the
pipeline only ever scores pairs that share at least one indexed named entity
and were published at most ``max_day_gap`` days apart. This module builds the
entity -> article postings index and streams the blocked candidate pairs.
"""
from __future__ import annotations

import heapq
import json
import re
import string
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .corpus import Corpus

# Entity type tags admitted by default. The first five follow the usual NER
# tag set for organizations, events, people, works of art and products; the
# FALLBACK tag is what extract_entities_fallback produces, so un-annotated
# corpora work out of the box. Place names (GPE etc.) stay excluded: they
# link too many unrelated articles.
DEFAULT_TYPE_FILTER = frozenset({"ORG", "EVENT", "PERSON", "WORK_OF_ART", "PRODUCT", "FALLBACK"})

DEFAULT_MAX_COUNT = 20_000
DEFAULT_MAX_DAY_GAP = 7

CND_MAGIC = b"CND1"
_CND_RECORD = struct.Struct("<QQ")


@dataclass(frozen=True, order=True)
class CandidatePair:
    """An unordered article pair, canonicalized so that a < b."""

    a: int
    b: int

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise ValueError(f"candidate pair endpoints must differ, got ({self.a}, {self.b})")
        if self.a > self.b:
            lo, hi = self.b, self.a
            object.__setattr__(self, "a", lo)
            object.__setattr__(self, "b", hi)


@dataclass(frozen=True)
class EntityIndex:
    """Postings from entity surface form to the sorted ids of articles naming it.

    ``excluded`` lists (surface, article count) for entities whose article
    count exceeded ``max_count``; entities backed by fewer than two articles
    are silently omitted (they can never produce a pair).
    """

    postings: dict[str, tuple[int, ...]]
    excluded: tuple[tuple[str, int], ...]
    type_filter: frozenset[str]
    max_count: int

    def __len__(self) -> int:
        return len(self.postings)


def build_index(
    corpus: Corpus,
    type_filter: frozenset[str] | set[str] = DEFAULT_TYPE_FILTER,
    max_count: int = DEFAULT_MAX_COUNT,
) -> EntityIndex:
    """Index entity surface forms over the corpus.

    Only entity occurrences whose type tag is in ``type_filter`` count.
    Counts are measured after type filtering and before capping; an entity
    associated with more than ``max_count`` distinct articles is dropped to
    the excluded list. The result is independent of article input order and
    of the order of each article's entity list.
    """
    if max_count < 2:
        raise ValueError(f"max_count must be at least 2, got {max_count}")
    acc: dict[str, set[int]] = {}
    for art in corpus:
        for surface, tag in art.entities:
            if tag in type_filter:
                acc.setdefault(surface, set()).add(art.id)

    postings: dict[str, tuple[int, ...]] = {}
    excluded: list[tuple[str, int]] = []
    for surface in sorted(acc):
        ids = acc[surface]
        if len(ids) > max_count:
            excluded.append((surface, len(ids)))
        elif len(ids) >= 2:
            postings[surface] = tuple(sorted(ids))
    return EntityIndex(
        postings=postings,
        excluded=tuple(excluded),
        type_filter=frozenset(type_filter),
        max_count=max_count,
    )


def _entity_pairs(ids: tuple[int, ...], day: dict[int, int], max_day_gap: int) -> Iterator[tuple[int, int]]:
    # ids is sorted ascending, so (ids[i], ids[j]) with i < j comes out in
    # ascending (a, b) order without materializing anything.
    for i, a in enumerate(ids):
        da = day[a]
        for b in ids[i + 1 :]:
            if abs(day[b] - da) <= max_day_gap:
                yield (a, b)


def generate_candidates(
    index: EntityIndex,
    corpus: Corpus,
    max_day_gap: int = DEFAULT_MAX_DAY_GAP,
) -> Iterator[CandidatePair]:
    """Stream candidate pairs: same indexed entity, published <= max_day_gap days apart.

    Each qualifying unordered pair is emitted exactly once, in ascending
    (a, b) order. Per-entity generators are lazily heap-merged, so memory
    stays proportional to the number of indexed entities rather than the
    number of pairs.
    """
    if max_day_gap < 0:
        raise ValueError(f"max_day_gap must be non-negative, got {max_day_gap}")
    day: dict[int, int] = {a.id: a.date.toordinal() for a in corpus}
    for ids in index.postings.values():
        for aid in ids:
            if aid not in day:
                raise ValueError(f"index references article {aid} absent from corpus")
    streams = (_entity_pairs(ids, day, max_day_gap) for ids in index.postings.values())
    last: tuple[int, int] | None = None
    for pair in heapq.merge(*streams):
        if pair != last:
            yield CandidatePair(pair[0], pair[1])
            last = pair


# --- fallback entity extraction -------------------------------------------

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")
_STRIP_CHARS = string.punctuation + "“”‘’«»"

FALLBACK_TYPE = "FALLBACK"


def _word_form(token: str) -> str:
    return token.strip(_STRIP_CHARS)


def extract_entities_fallback(text: str) -> list[tuple[str, str]]:
    """Heuristic entity spans: maximal runs of >= 2 capitalized tokens.

    Runs never cross sentence boundaries. A sentence-initial capitalized
    token only counts when the run extends past it (a lone capitalized
    sentence opener is just a sentence opener). Every occurrence is returned,
    in text order, tagged ``FALLBACK``. Deterministic; no model involved.
    """
    spans: list[tuple[str, str]] = []
    for sentence in _SENTENCE_SPLIT.split(text):
        tokens = sentence.split()
        words = [_word_form(t) for t in tokens]
        run: list[str] = []
        for word in words:
            if word and word[0].isalpha() and word[0].isupper():
                run.append(word)
            else:
                if len(run) >= 2:
                    spans.append((" ".join(run), FALLBACK_TYPE))
                run = []
        if len(run) >= 2:
            spans.append((" ".join(run), FALLBACK_TYPE))
    return spans


# --- serialization ----------------------------------------------------------


def write_candidates_cnd1(pairs: Iterable[CandidatePair], path: str | Path) -> int:
    """Write pairs to the binary pair format; returns the pair count.

    Layout: 4-byte magic ``CND1``, then one little-endian (u64 a, u64 b)
    record per pair, in input order.
    """
    n = 0
    with Path(path).open("wb") as fh:
        fh.write(CND_MAGIC)
        for p in pairs:
            fh.write(_CND_RECORD.pack(p.a, p.b))
            n += 1
    return n


def read_candidates_cnd1(path: str | Path) -> Iterator[CandidatePair]:
    """Stream pairs back from the binary pair format."""
    with Path(path).open("rb") as fh:
        magic = fh.read(4)
        if magic != CND_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {CND_MAGIC!r}")
        while True:
            chunk = fh.read(_CND_RECORD.size)
            if not chunk:
                return
            if len(chunk) != _CND_RECORD.size:
                raise ValueError(f"{path}: truncated record at end of file")
            a, b = _CND_RECORD.unpack(chunk)
            yield CandidatePair(a, b)


def write_candidates_jsonl(pairs: Iterable[CandidatePair], path: str | Path) -> int:
    """Human-inspectable JSONL mirror of the binary pair format."""
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(json.dumps({"a": p.a, "b": p.b}, separators=(",", ":")))
            fh.write("\n")
            n += 1
    return n


def read_candidates_jsonl(path: str | Path) -> Iterator[CandidatePair]:
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                obj = json.loads(line)
                yield CandidatePair(obj["a"], obj["b"])


def index_to_dict(index: EntityIndex) -> dict:
    """JSON-safe form of the index (postings keys sorted)."""
    return {
        "type_filter": sorted(index.type_filter),
        "max_count": index.max_count,
        "postings": {k: list(v) for k, v in sorted(index.postings.items())},
        "excluded": [[s, n] for s, n in index.excluded],
    }


def index_from_dict(obj: dict) -> EntityIndex:
    return EntityIndex(
        postings={k: tuple(v) for k, v in obj["postings"].items()},
        excluded=tuple((s, n) for s, n in obj["excluded"]),
        type_filter=frozenset(obj["type_filter"]),
        max_count=obj["max_count"],
    )
