"""Corpus embedding export in the EMB1 binary format.

Layout: 4-byte magic ``EMB1``, then two little-endian u32s (row count, vector
dimension), then count x dim float32 values, row-major. A sidecar file at
``<path>.ids`` lists one decimal article id per line, in row order, so
downstream readers can join vectors back to articles.
"""
from __future__ import annotations

import json
import logging
import struct
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .models import BiEncoder

logger = logging.getLogger(__name__)

MAGIC = b"EMB1"
TITLE_BODY_SEPARATOR = ". "


class ArticleFormatError(ValueError):
    """An articles JSONL line could not be parsed into (id, title, text)."""


@dataclass(frozen=True)
class SkippedArticle:
    article_id: int
    reason: str


@dataclass
class ExportReport:
    written: int
    dimension: int
    out_path: Path
    ids_path: Path
    skipped: list[SkippedArticle] = field(default_factory=list)


def compose_text(title: str, body: str) -> str:
    """Join title and body so truncation keeps the title in the head window."""
    title = title.strip()
    body = body.strip()
    if not title:
        return body
    if not body:
        return title
    return title + TITLE_BODY_SEPARATOR + body


def _read_articles(path: Path) -> Iterable[tuple[int, str, str]]:
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ArticleFormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(row, dict):
                raise ArticleFormatError(f"{path}:{lineno}: expected an object")
            try:
                article_id = int(row["id"])
            except (KeyError, TypeError, ValueError):
                raise ArticleFormatError(f"{path}:{lineno}: missing or non-integer 'id'") from None
            title = row.get("title", "")
            text = row.get("text", "")
            if not isinstance(title, str) or not isinstance(text, str):
                raise ArticleFormatError(f"{path}:{lineno}: 'title' and 'text' must be strings")
            yield article_id, title, text


def write_emb1(vectors: np.ndarray, ids: list[int], path: str | Path) -> None:
    """Write a (count, dim) float32 matrix plus the ids sidecar."""
    path = Path(path)
    matrix = np.ascontiguousarray(vectors, dtype="<f4")
    if matrix.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {matrix.shape}")
    count, dim = matrix.shape
    if count != len(ids):
        raise ValueError(f"{count} rows but {len(ids)} ids")
    with path.open("wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<II", count, dim))
        handle.write(matrix.tobytes())
    ids_path = path.with_name(path.name + ".ids")
    ids_path.write_text("".join(f"{i}\n" for i in ids), encoding="utf-8")


def embed_articles_jsonl(
    encoder: BiEncoder,
    articles_path: str | Path,
    out_path: str | Path,
    head: int = 288,
    tail: int = 96,
    batch_size: int = 32,
) -> ExportReport:
    """Embed every article in a JSONL corpus and write the EMB1 file.

    Each line must carry integer ``id`` plus string ``title`` and ``text``;
    the title is prepended to the body before truncation. An article whose
    encoding fails is skipped and reported — its id does not appear in the
    sidecar — rather than aborting the whole export. Row order follows input
    order, so reruns over the same corpus are byte-identical.
    """
    articles_path = Path(articles_path)
    out_path = Path(out_path)
    rows = list(_read_articles(articles_path))

    vectors: list[np.ndarray] = []
    kept_ids: list[int] = []
    skipped: list[SkippedArticle] = []
    for start in range(0, len(rows), batch_size):
        batch = rows[start : start + batch_size]
        texts = [compose_text(title, text) for _, title, text in batch]
        try:
            block = encoder.encode(texts, head=head, tail=tail, batch_size=batch_size)
        except Exception:
            # Batch failed; retry one by one so a single bad article cannot
            # take its neighbours down with it.
            block = None
        if block is not None:
            vectors.extend(block)
            kept_ids.extend(article_id for article_id, _, _ in batch)
            continue
        for (article_id, title, text) in batch:
            try:
                one = encoder.encode(
                    [compose_text(title, text)], head=head, tail=tail, batch_size=1
                )
            except Exception as exc:
                skipped.append(SkippedArticle(article_id=article_id, reason=str(exc)))
                logger.warning("skipping article %d: %s", article_id, exc)
                continue
            vectors.append(one[0])
            kept_ids.append(article_id)

    dim = encoder.hidden_size
    matrix = (
        np.stack(vectors).astype("<f4")
        if vectors
        else np.zeros((0, dim), dtype="<f4")
    )
    write_emb1(matrix, kept_ids, out_path)
    return ExportReport(
        written=len(kept_ids),
        dimension=int(matrix.shape[1]),
        out_path=out_path,
        ids_path=out_path.with_name(out_path.name + ".ids"),
        skipped=skipped,
    )
