"""Cross-validated comparison of truncation and data-inclusion settings."""
from __future__ import annotations

import logging
import statistics
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from .data import PairExample
from .evaluate import evaluate
from .models import BiEncoder
from .train import TrainConfig, finetune

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AblationSetting:
    head_tokens: int
    tail_tokens: int
    include_translated: bool = True

    def label(self) -> str:
        translated = "with" if self.include_translated else "without"
        return f"head={self.head_tokens} tail={self.tail_tokens} {translated} translated"


@dataclass(frozen=True)
class AblationRow:
    setting: AblationSetting
    fold_rs: tuple[float, ...]
    mean_r: float
    max_r: float
    sd_r: float


def run_ablation(
    pairs: Sequence[PairExample],
    settings: Sequence[AblationSetting],
    encoder_factory: Callable[[], BiEncoder],
    folds: int = 5,
    seed: int = 0,
    epochs: int = 2,
    batch_size: int = 5,
    lr: float = 2e-6,
) -> list[AblationRow]:
    """k-fold comparison: train on k-1 folds, score the held-out fold.

    The fold split is fixed by ``seed`` and shared across settings so rows
    differ only in the setting under test. Each fold gets a fresh encoder
    from ``encoder_factory``. Evaluation always drops translated pairs, so
    every held-out fold must keep at least 3 original-language pairs.
    """
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    if len(pairs) < folds:
        raise ValueError(f"need at least {folds} pairs for {folds} folds, got {len(pairs)}")

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(pairs))
    fold_indices: list[np.ndarray] = np.array_split(order, folds)
    for k, idx in enumerate(fold_indices):
        held = [pairs[i] for i in idx]
        originals = sum(1 for p in held if not p.translated)
        if originals < 3:
            raise ValueError(
                f"fold {k} holds only {originals} non-translated pairs; "
                "evaluation needs at least 3 — use fewer folds or more data"
            )

    rows: list[AblationRow] = []
    for setting in settings:
        fold_rs: list[float] = []
        for k, idx in enumerate(fold_indices):
            held_out = set(idx.tolist())
            train_pairs = [p for i, p in enumerate(pairs) if i not in held_out]
            eval_pairs = [pairs[i] for i in idx]

            encoder = encoder_factory()
            config = TrainConfig(
                head_tokens=setting.head_tokens,
                tail_tokens=setting.tail_tokens,
                epochs=epochs,
                batch_size=batch_size,
                lr=lr,
                include_translated=setting.include_translated,
                seed=seed,
            )
            finetune(encoder, train_pairs, config)
            r = evaluate(
                encoder,
                eval_pairs,
                head=setting.head_tokens,
                tail=setting.tail_tokens,
            )
            fold_rs.append(r)
            logger.info("%s fold %d/%d: r=%.4f", setting.label(), k + 1, folds, r)

        rows.append(
            AblationRow(
                setting=setting,
                fold_rs=tuple(fold_rs),
                mean_r=sum(fold_rs) / len(fold_rs),
                max_r=max(fold_rs),
                sd_r=statistics.stdev(fold_rs),
            )
        )
    return rows
