"""Fine-tuning: MSE between pair cosine similarity and human labels."""
from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

import torch

from .data import PairExample
from .models import BiEncoder

logger = logging.getLogger(__name__)


class TrainingDivergedError(RuntimeError):
    """Loss became NaN/inf; carries the step and learning rate for diagnosis."""


@dataclass(frozen=True)
class TrainConfig:
    """Training knobs. Defaults are the production fine-tuning recipe."""

    head_tokens: int = 288
    tail_tokens: int = 96
    epochs: int = 2
    batch_size: int = 5
    lr: float = 2e-6
    include_translated: bool = True
    seed: int = 0

    def validate(self, max_body_tokens: int | None = None) -> None:
        if self.head_tokens < 0 or self.tail_tokens < 0:
            raise ValueError("head_tokens and tail_tokens must be >= 0")
        if self.head_tokens + self.tail_tokens < 1:
            raise ValueError("head_tokens + tail_tokens must be >= 1")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not (self.lr > 0):
            raise ValueError(f"lr must be > 0, got {self.lr}")
        if max_body_tokens is not None and self.head_tokens + self.tail_tokens > max_body_tokens:
            raise ValueError(
                f"head+tail = {self.head_tokens + self.tail_tokens} exceeds the "
                f"encoder's budget of {max_body_tokens} body tokens"
            )


@dataclass(frozen=True)
class StepRecord:
    epoch: int
    step: int
    lr: float
    loss: float


@dataclass
class TrainingLog:
    """Per-step losses plus the optimizer/schedule actually used."""

    optimizer: str
    schedule: str
    warmup_steps: int
    pairs_used: int
    steps: list[StepRecord] = field(default_factory=list)

    def epoch_mean_losses(self) -> list[float]:
        by_epoch: dict[int, list[float]] = {}
        for s in self.steps:
            by_epoch.setdefault(s.epoch, []).append(s.loss)
        return [sum(v) / len(v) for _, v in sorted(by_epoch.items())]

    def to_dict(self) -> dict:
        return {
            "optimizer": self.optimizer,
            "schedule": self.schedule,
            "warmup_steps": self.warmup_steps,
            "pairs_used": self.pairs_used,
            "epoch_mean_losses": self.epoch_mean_losses(),
            "steps": [
                {"epoch": s.epoch, "step": s.step, "lr": s.lr, "loss": s.loss}
                for s in self.steps
            ],
        }

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def finetune(
    encoder: BiEncoder,
    pairs: list[PairExample],
    config: TrainConfig = TrainConfig(),
    log_path: str | Path | None = None,
) -> TrainingLog:
    """Train the encoder in place; returns (and optionally writes) the log.

    Minimizes MSE(cosine(emb_a, emb_b), label) with AdamW and a linear
    learning-rate decay from ``config.lr`` to zero over all steps, no warmup.
    Deterministic for a fixed seed up to runtime kernel nondeterminism.
    Aborts with :class:`TrainingDivergedError` the moment a loss is not
    finite.
    """
    config.validate(encoder.max_body_tokens)
    train_pairs = list(pairs) if config.include_translated else [p for p in pairs if not p.translated]
    if len(train_pairs) < 2:
        raise ValueError(f"need at least 2 training pairs, got {len(train_pairs)}")

    torch.manual_seed(config.seed)
    shuffler = random.Random(config.seed)
    steps_per_epoch = math.ceil(len(train_pairs) / config.batch_size)
    total_steps = steps_per_epoch * config.epochs

    optimizer = torch.optim.AdamW(encoder.model.parameters(), lr=config.lr)
    scheduler = torch.optim.lr_scheduler.LambdaLR(
        optimizer, lambda step: max(0.0, 1.0 - step / total_steps)
    )
    log = TrainingLog(
        optimizer=f"AdamW(lr={config.lr}, defaults)",
        schedule=f"linear decay to 0 over {total_steps} steps",
        warmup_steps=0,
        pairs_used=len(train_pairs),
    )

    encoder.model.train()
    step = 0
    for epoch in range(1, config.epochs + 1):
        order = list(range(len(train_pairs)))
        shuffler.shuffle(order)
        for start in range(0, len(order), config.batch_size):
            batch = [train_pairs[i] for i in order[start : start + config.batch_size]]
            labels = torch.tensor([p.label for p in batch], dtype=torch.float32)

            emb_a = encoder.forward_pooled(
                [p.text_a for p in batch], config.head_tokens, config.tail_tokens
            )
            emb_b = encoder.forward_pooled(
                [p.text_b for p in batch], config.head_tokens, config.tail_tokens
            )
            cosines = torch.nn.functional.cosine_similarity(emb_a, emb_b, dim=1)
            loss = torch.mean((cosines - labels) ** 2)

            loss_value = float(loss.detach())
            lr_now = optimizer.param_groups[0]["lr"]
            if not math.isfinite(loss_value):
                raise TrainingDivergedError(
                    f"non-finite loss {loss_value} at epoch {epoch} step {step + 1} "
                    f"(lr {lr_now:g}); batch labels {[p.label for p in batch]}"
                )

            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            scheduler.step()

            step += 1
            log.steps.append(StepRecord(epoch=epoch, step=step, lr=lr_now, loss=loss_value))
        logger.info("epoch %d/%d mean loss %.6f", epoch, config.epochs, log.epoch_mean_losses()[-1])

    encoder.model.eval()
    if log_path is not None:
        log.write_json(log_path)
    return log
