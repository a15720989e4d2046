"""Bi-encoder sentence embedding model.

Two texts are embedded independently (mean pooling over the encoder's last
hidden states) so pair similarity reduces to a cosine between vectors.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import torch

logger = logging.getLogger(__name__)

DEFAULT_PRETRAINED = "sentence-transformers/all-mpnet-base-v2"


def mean_pool(last_hidden: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
    """Average token vectors over real (unmasked) positions.

    last_hidden: (batch, seq, hidden); attention_mask: (batch, seq) of 0/1.
    """
    mask = attention_mask.unsqueeze(-1).to(last_hidden.dtype)
    summed = (last_hidden * mask).sum(dim=1)
    counts = mask.sum(dim=1).clamp(min=1.0)
    return summed / counts


@dataclass
class BiEncoder:
    """A transformer encoder plus tokenizer, embedding each text on its own."""

    model: torch.nn.Module
    tokenizer: object  # any PreTrainedTokenizerBase

    @property
    def hidden_size(self) -> int:
        return int(self.model.config.hidden_size)

    @property
    def max_body_tokens(self) -> int:
        """Token budget left after the [CLS]/[SEP] specials."""
        return int(self.model.config.max_position_embeddings) - 2

    def token_ids(self, text: str, head: int, tail: int) -> list[int]:
        """Tokenize without specials and apply head+tail truncation."""
        from .truncate import truncate_head_tail

        ids = self.tokenizer(text, add_special_tokens=False)["input_ids"]
        return truncate_head_tail(ids, head, tail)

    def _batch_tensors(self, rows: list[list[int]]) -> tuple[torch.Tensor, torch.Tensor]:
        cls_id = self.tokenizer.cls_token_id
        sep_id = self.tokenizer.sep_token_id
        pad_id = self.tokenizer.pad_token_id
        if cls_id is None or sep_id is None or pad_id is None:
            raise ValueError("tokenizer must define cls/sep/pad tokens")
        framed = [[cls_id] + row + [sep_id] for row in rows]
        width = max(len(row) for row in framed)
        input_ids = torch.full((len(framed), width), pad_id, dtype=torch.long)
        mask = torch.zeros((len(framed), width), dtype=torch.long)
        for i, row in enumerate(framed):
            input_ids[i, : len(row)] = torch.tensor(row, dtype=torch.long)
            mask[i, : len(row)] = 1
        return input_ids, mask

    def forward_pooled(self, texts: list[str], head: int, tail: int) -> torch.Tensor:
        """Pooled embeddings with gradients — the training path."""
        if head + tail > self.max_body_tokens:
            raise ValueError(
                f"head+tail = {head + tail} exceeds the encoder's budget of "
                f"{self.max_body_tokens} body tokens"
            )
        rows = [self.token_ids(t, head, tail) for t in texts]
        input_ids, mask = self._batch_tensors(rows)
        out = self.model(input_ids=input_ids, attention_mask=mask)
        return mean_pool(out.last_hidden_state, mask)

    def encode(
        self,
        texts: list[str],
        head: int = 288,
        tail: int = 96,
        batch_size: int = 32,
        normalize: bool = True,
    ) -> np.ndarray:
        """Embed texts without gradients; rows are float32, optionally unit-norm."""
        if batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {batch_size}")
        was_training = self.model.training
        self.model.eval()
        chunks: list[np.ndarray] = []
        try:
            with torch.no_grad():
                for start in range(0, len(texts), batch_size):
                    pooled = self.forward_pooled(texts[start : start + batch_size], head, tail)
                    chunks.append(pooled.cpu().numpy().astype(np.float64))
        finally:
            if was_training:
                self.model.train()
        if not chunks:
            return np.zeros((0, self.hidden_size), dtype=np.float32)
        vectors = np.concatenate(chunks, axis=0)
        if normalize:
            norms = np.linalg.norm(vectors, axis=1, keepdims=True)
            if np.any(norms == 0.0):
                raise ValueError("cannot normalize a zero embedding")
            vectors = vectors / norms
        return vectors.astype(np.float32)


def load_pretrained(name: str = DEFAULT_PRETRAINED) -> BiEncoder:
    """Load a pretrained checkpoint (downloads on first use unless cached)."""
    from transformers import AutoModel, AutoTokenizer

    logger.info("loading pretrained encoder %s", name)
    return BiEncoder(model=AutoModel.from_pretrained(name), tokenizer=AutoTokenizer.from_pretrained(name))


def build_tiny_encoder(seed: int = 0, hidden_size: int = 32, layers: int = 2) -> BiEncoder:
    """Construct a small randomly-initialized encoder entirely offline.

    The tokenizer is WordPiece over single characters (plus digits), so any
    ASCII-ish text tokenizes without network access or data files. Meant for
    tests and smoke runs, not for producing useful embeddings.
    """
    from tokenizers import Tokenizer
    from tokenizers.models import WordPiece
    from tokenizers.normalizers import Lowercase
    from tokenizers.pre_tokenizers import Whitespace
    from transformers import BertConfig, BertModel, PreTrainedTokenizerFast

    vocab = {"[PAD]": 0, "[UNK]": 1, "[CLS]": 2, "[SEP]": 3}
    for ch in "abcdefghijklmnopqrstuvwxyz0123456789.,'-":
        vocab[ch] = len(vocab)
        vocab["##" + ch] = len(vocab)
    raw = Tokenizer(WordPiece(vocab, unk_token="[UNK]", max_input_chars_per_word=200))
    raw.normalizer = Lowercase()
    raw.pre_tokenizer = Whitespace()
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=raw,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
    )
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=hidden_size,
        num_hidden_layers=layers,
        num_attention_heads=2,
        intermediate_size=hidden_size * 2,
        max_position_embeddings=512,
    )
    torch.manual_seed(seed)
    return BiEncoder(model=BertModel(config), tokenizer=tokenizer)
