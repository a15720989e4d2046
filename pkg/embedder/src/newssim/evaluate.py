"""Evaluation: Pearson correlation between predicted cosines and labels."""
from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np

from .data import PairExample
from .models import BiEncoder


def pearson_r(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation; errors on mismatched or degenerate input."""
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 3:
        raise ValueError(f"need at least 3 points, got {len(xs)}")
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("correlation undefined: an input has zero variance")
    return float(dx @ dy) / (sx * sy)


def evaluate(
    encoder: BiEncoder,
    pairs: Sequence[PairExample],
    head: int = 288,
    tail: int = 96,
    batch_size: int = 32,
) -> float:
    """Pearson r between cosine predictions and labels on original-language pairs.

    Machine-translated pairs are always excluded here, whatever the training
    configuration did with them: scores on translations measure the
    translator as much as the encoder.
    """
    kept = [p for p in pairs if not p.translated]
    if len(kept) < 3:
        raise ValueError(
            f"need at least 3 non-translated pairs to evaluate, got {len(kept)}"
        )
    emb_a = encoder.encode([p.text_a for p in kept], head=head, tail=tail, batch_size=batch_size)
    emb_b = encoder.encode([p.text_b for p in kept], head=head, tail=tail, batch_size=batch_size)
    predictions = np.einsum("ij,ij->i", emb_a.astype(np.float64), emb_b.astype(np.float64))
    labels = [p.label for p in kept]
    return pearson_r(predictions.tolist(), labels)
