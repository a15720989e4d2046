"""Bi-encoder fine-tuning for news article similarity, with EMB1 export."""

from .ablation import AblationRow, AblationSetting, run_ablation
from .data import (
    PairExample,
    PairFormatError,
    load_pairs_jsonl,
    rescale_label,
    write_pairs_jsonl,
)
from .evaluate import evaluate, pearson_r
from .export import (
    ArticleFormatError,
    ExportReport,
    SkippedArticle,
    compose_text,
    embed_articles_jsonl,
    write_emb1,
)
from .models import BiEncoder, build_tiny_encoder, load_pretrained, mean_pool
from .train import StepRecord, TrainConfig, TrainingDivergedError, TrainingLog, finetune
from .truncate import truncate_head_tail

__all__ = [
    "AblationRow",
    "AblationSetting",
    "ArticleFormatError",
    "BiEncoder",
    "ExportReport",
    "PairExample",
    "PairFormatError",
    "SkippedArticle",
    "StepRecord",
    "TrainConfig",
    "TrainingDivergedError",
    "TrainingLog",
    "build_tiny_encoder",
    "compose_text",
    "embed_articles_jsonl",
    "evaluate",
    "finetune",
    "load_pairs_jsonl",
    "load_pretrained",
    "mean_pool",
    "pearson_r",
    "rescale_label",
    "run_ablation",
    "truncate_head_tail",
    "write_emb1",
    "write_pairs_jsonl",
]

__version__ = "0.1.0"
