"""Embedding storage, cosine scoring of candidate pairs, and a mock embedder.

Vectors are stored in float32 and L2-normalized on load; all similarity
arithmetic accumulates in float64. The binary embedding format (magic
``EMB1``) is the interchange surface with external encoders: a header of
``EMB1``, u32 LE row count, u32 LE dimension, followed by count x dim float32
LE values row-major, with article ids in a sibling newline-delimited decimal
file (``<path>.ids`` by default).
"""
from __future__ import annotations

import json
import struct
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import islice
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .entities import CandidatePair

EMB_MAGIC = b"EMB1"
EDG_MAGIC = b"EDG1"
_EMB_HEADER = struct.Struct("<4sII")
_EDG_RECORD = struct.Struct("<QQf")

DEFAULT_THRESHOLD = 0.9
NORM_TOL = 1e-4

# Word window mirrored from the trained encoder's input truncation: the
# leading head plus trailing tail of the title+body word sequence.
MOCK_HEAD_WORDS = 288
MOCK_TAIL_WORDS = 96


class EmbeddingFormatError(ValueError):
    """Malformed embedding file: bad magic, truncated payload, id mismatch..."""


@dataclass(frozen=True)
class SimilarityEdge:
    a: int
    b: int
    score: float


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Article embeddings keyed by id. Rows are unit-norm float32."""

    ids: tuple[int, ...]
    vectors: np.ndarray

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2 or len(self.ids) != self.vectors.shape[0]:
            raise ValueError("ids/vectors shape mismatch")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("duplicate ids in embedding matrix")
        object.__setattr__(self, "_row_of", {aid: i for i, aid in enumerate(self.ids)})

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, article_id: int) -> bool:
        return article_id in self._row_of  # type: ignore[attr-defined]

    def row_index(self, article_id: int) -> int:
        return self._row_of[article_id]  # type: ignore[attr-defined]

    def vector(self, article_id: int) -> np.ndarray:
        return self.vectors[self.row_index(article_id)]

    @classmethod
    def from_vectors(
        cls, ids: Sequence[int], vectors: np.ndarray, normalize: bool = True
    ) -> "EmbeddingMatrix":
        vectors = np.asarray(vectors, dtype=np.float32)
        if normalize:
            norms = np.linalg.norm(vectors.astype(np.float64), axis=1)
            if np.any(norms == 0.0):
                bad = [ids[i] for i in np.nonzero(norms == 0.0)[0][:5]]
                raise ValueError(f"zero-norm embedding rows (first ids: {bad})")
            vectors = (vectors.astype(np.float64) / norms[:, None]).astype(np.float32)
        return cls(ids=tuple(int(i) for i in ids), vectors=vectors)


def default_ids_path(path: str | Path) -> Path:
    return Path(str(path) + ".ids")


def write_embeddings(
    ids: Sequence[int],
    vectors: np.ndarray,
    path: str | Path,
    ids_path: str | Path | None = None,
) -> None:
    """Write float32 vectors and the sibling ids file.

    Values are written exactly as given (no normalization), little-endian,
    row-major.
    """
    vectors = np.ascontiguousarray(np.asarray(vectors, dtype=np.float32))
    if vectors.ndim != 2:
        raise ValueError("vectors must be a 2-D array")
    count, dim = vectors.shape
    if count != len(ids):
        raise ValueError(f"{len(ids)} ids for {count} vector rows")
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(_EMB_HEADER.pack(EMB_MAGIC, count, dim))
        fh.write(vectors.astype("<f4", copy=False).tobytes())
    ids_file = Path(ids_path) if ids_path is not None else default_ids_path(path)
    with ids_file.open("w", encoding="ascii") as fh:
        for aid in ids:
            fh.write(f"{int(aid)}\n")


def load_embeddings(
    path: str | Path,
    ids_path: str | Path | None = None,
    expected_dim: int | None = None,
) -> EmbeddingMatrix:
    """Load an EMB1 file; rows come back L2-normalized.

    Raises :class:`EmbeddingFormatError` for a bad magic, a truncated or
    oversized payload, a dimension mismatch against ``expected_dim``, an ids
    file whose line count disagrees with the header, duplicate ids, or
    zero-norm rows (which cannot be normalized).
    """
    path = Path(path)
    if not path.exists():
        raise EmbeddingFormatError(f"embeddings file not found: {path}")
    raw = path.read_bytes()
    if len(raw) < _EMB_HEADER.size:
        raise EmbeddingFormatError(f"{path}: file shorter than header")
    magic, count, dim = _EMB_HEADER.unpack_from(raw, 0)
    if magic != EMB_MAGIC:
        raise EmbeddingFormatError(f"{path}: bad magic {magic!r}, expected {EMB_MAGIC!r}")
    if dim == 0:
        raise EmbeddingFormatError(f"{path}: zero dimension in header")
    if expected_dim is not None and dim != expected_dim:
        raise EmbeddingFormatError(f"{path}: dimension {dim}, expected {expected_dim}")
    payload = raw[_EMB_HEADER.size :]
    want = count * dim * 4
    if len(payload) < want:
        raise EmbeddingFormatError(f"{path}: truncated payload ({len(payload)} < {want} bytes)")
    if len(payload) > want:
        raise EmbeddingFormatError(f"{path}: {len(payload) - want} trailing bytes after payload")
    vectors = np.frombuffer(payload, dtype="<f4").reshape(count, dim)

    ids_file = Path(ids_path) if ids_path is not None else default_ids_path(path)
    if not ids_file.exists():
        raise EmbeddingFormatError(f"ids file not found: {ids_file}")
    id_lines = [ln for ln in ids_file.read_text(encoding="ascii").splitlines() if ln.strip()]
    if len(id_lines) != count:
        raise EmbeddingFormatError(
            f"{ids_file}: {len(id_lines)} ids for {count} vector rows"
        )
    try:
        ids = [int(ln) for ln in id_lines]
    except ValueError as exc:
        raise EmbeddingFormatError(f"{ids_file}: non-integer id line: {exc}") from exc
    try:
        return EmbeddingMatrix.from_vectors(ids, vectors, normalize=True)
    except ValueError as exc:
        raise EmbeddingFormatError(f"{path}: {exc}") from exc


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity of two vectors, accumulated in float64."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine undefined for zero-norm input")
    return float(np.dot(u, v) / (nu * nv))


@dataclass(frozen=True)
class ScoringResult:
    """Edges above threshold plus the run report on unresolvable pairs."""

    edges: tuple[SimilarityEdge, ...]
    missing_ids: tuple[int, ...]
    skipped_pairs: int
    scored_pairs: int


def _chunks(it: Iterable[CandidatePair], size: int) -> Iterator[list[CandidatePair]]:
    it = iter(it)
    while True:
        block = list(islice(it, size))
        if not block:
            return
        yield block


def _score_chunk(
    chunk: list[CandidatePair],
    emb: EmbeddingMatrix,
    threshold: float,
) -> tuple[list[SimilarityEdge], set[int], int]:
    row_of = emb._row_of  # type: ignore[attr-defined]
    a_rows: list[int] = []
    b_rows: list[int] = []
    kept: list[CandidatePair] = []
    missing: set[int] = set()
    skipped = 0
    for p in chunk:
        ra = row_of.get(p.a)
        rb = row_of.get(p.b)
        if ra is None or rb is None:
            skipped += 1
            if ra is None:
                missing.add(p.a)
            if rb is None:
                missing.add(p.b)
            continue
        a_rows.append(ra)
        b_rows.append(rb)
        kept.append(p)
    edges: list[SimilarityEdge] = []
    if kept:
        va = emb.vectors[a_rows].astype(np.float64)
        vb = emb.vectors[b_rows].astype(np.float64)
        scores = np.einsum("ij,ij->i", va, vb)
        for p, s in zip(kept, scores):
            if s > threshold:
                edges.append(SimilarityEdge(p.a, p.b, float(s)))
    return edges, missing, skipped


def score_candidates(
    pairs: Iterable[CandidatePair],
    embeddings: EmbeddingMatrix,
    threshold: float = DEFAULT_THRESHOLD,
    threads: int = 1,
    chunk_size: int = 65536,
) -> ScoringResult:
    """Score candidate pairs and keep those with cosine strictly above threshold.

    Pairs whose articles lack embeddings are skipped and surfaced in the
    result report. Work is chunked; with ``threads > 1`` chunks run on a
    thread pool but chunk boundaries and merge order are fixed, so the output
    is identical for every thread count. Edges come back sorted by (a, b).
    """
    if not (0.0 < threshold <= 1.0):
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")

    all_edges: list[SimilarityEdge] = []
    missing: set[int] = set()
    skipped = 0
    total = 0

    if threads == 1:
        for chunk in _chunks(pairs, chunk_size):
            total += len(chunk)
            edges, miss, skip = _score_chunk(chunk, embeddings, threshold)
            all_edges.extend(edges)
            missing.update(miss)
            skipped += skip
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pending = []
            for chunk in _chunks(pairs, chunk_size):
                total += len(chunk)
                pending.append(pool.submit(_score_chunk, chunk, embeddings, threshold))
                # Keep a bounded window of chunks in flight, draining in
                # submission order so the merge stays deterministic.
                while len(pending) > threads * 2:
                    edges, miss, skip = pending.pop(0).result()
                    all_edges.extend(edges)
                    missing.update(miss)
                    skipped += skip
            for fut in pending:
                edges, miss, skip = fut.result()
                all_edges.extend(edges)
                missing.update(miss)
                skipped += skip

    all_edges.sort(key=lambda e: (e.a, e.b))
    return ScoringResult(
        edges=tuple(all_edges),
        missing_ids=tuple(sorted(missing)),
        skipped_pairs=skipped,
        scored_pairs=total - skipped,
    )


# --- mock embedder ----------------------------------------------------------


@lru_cache(maxsize=1 << 20)
def _word_hash(word: str, seed_key: int) -> int:
    return zlib.crc32(word.encode("utf-8"), seed_key)


def _seed_key(seed: int) -> int:
    return zlib.crc32(repr(int(seed)).encode("ascii"))


def mock_embed(title: str, text: str, dim: int = 64, seed: int = 0) -> np.ndarray:
    """Deterministic signed-feature-hash embedding of an article.

    Word unigrams and bigrams of the head-288/tail-96 word window (title
    prepended to body) hash into ``dim`` signed buckets; the result is
    L2-normalized float32. Near-identical texts land near cosine 1, unrelated
    texts near 0. Fully determined by (title, text, dim, seed); crc32-based
    hashing keeps it stable across processes and platforms.
    """
    if dim < 8:
        raise ValueError(f"dim must be at least 8, got {dim}")
    words = (title + " " + text).split()
    if len(words) > MOCK_HEAD_WORDS + MOCK_TAIL_WORDS:
        words = words[:MOCK_HEAD_WORDS] + words[-MOCK_TAIL_WORDS:]
    key = _seed_key(seed)
    acc = [0.0] * dim
    prev = None
    for w in words:
        h = _word_hash(w, key)
        acc[h % dim] += 1.0 if h & 0x10000 else -1.0
        if prev is not None:
            rot = (prev << 5) & 0xFFFFFFFF | prev >> 27
            g = (rot ^ h) * 0x01000193 & 0xFFFFFFFF
            acc[g % dim] += 1.0 if g & 0x10000 else -1.0
        prev = h
    vec = np.asarray(acc, dtype=np.float64)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        vec[0] = 1.0
        norm = 1.0
    return (vec / norm).astype(np.float32)


# --- edge serialization -----------------------------------------------------


def write_edges_edg1(edges: Iterable[SimilarityEdge], path: str | Path) -> int:
    """Binary edge format: magic ``EDG1`` then (u64 a, u64 b, f32 score) LE records."""
    n = 0
    with Path(path).open("wb") as fh:
        fh.write(EDG_MAGIC)
        for e in edges:
            fh.write(_EDG_RECORD.pack(e.a, e.b, e.score))
            n += 1
    return n


def read_edges_edg1(path: str | Path) -> Iterator[SimilarityEdge]:
    with Path(path).open("rb") as fh:
        magic = fh.read(4)
        if magic != EDG_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {EDG_MAGIC!r}")
        while True:
            chunk = fh.read(_EDG_RECORD.size)
            if not chunk:
                return
            if len(chunk) != _EDG_RECORD.size:
                raise ValueError(f"{path}: truncated record at end of file")
            a, b, s = _EDG_RECORD.unpack(chunk)
            yield SimilarityEdge(a, b, s)


def write_edges_jsonl(edges: Iterable[SimilarityEdge], path: str | Path) -> int:
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for e in edges:
            fh.write(json.dumps({"a": e.a, "b": e.b, "score": e.score}, separators=(",", ":")))
            fh.write("\n")
            n += 1
    return n


def read_edges_jsonl(path: str | Path) -> Iterator[SimilarityEdge]:
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                obj = json.loads(line)
                yield SimilarityEdge(obj["a"], obj["b"], obj["score"])
