"""Labeled article-pair datasets for similarity training."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path


class PairFormatError(ValueError):
    """Unreadable or invalid pairs file."""


@dataclass(frozen=True)
class PairExample:
    """One labeled article pair.

    ``label`` is the overall similarity on a [0, 1] scale (see
    :func:`rescale_label` for the 1-4 source scale); ``lang`` tags the
    language pair ("en-en", "de-en", ...); ``translated`` marks pairs whose
    texts were machine-translated into English.
    """

    text_a: str
    text_b: str
    label: float
    lang: str = "en-en"
    translated: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.label, (int, float)) or not math.isfinite(self.label):
            raise ValueError(f"label must be a finite number, got {self.label!r}")
        if not (0.0 <= self.label <= 1.0):
            raise ValueError(f"label must lie in [0, 1], got {self.label}")

    def swapped(self) -> "PairExample":
        return PairExample(
            text_a=self.text_b,
            text_b=self.text_a,
            label=self.label,
            lang=self.lang,
            translated=self.translated,
        )


def rescale_label(raw: float) -> float:
    """Map a 1-4 similarity rating linearly onto [0, 1]."""
    if not isinstance(raw, (int, float)) or not math.isfinite(raw):
        raise ValueError(f"rating must be a finite number, got {raw!r}")
    if not (1.0 <= raw <= 4.0):
        raise ValueError(f"rating must lie in [1, 4], got {raw}")
    return (float(raw) - 1.0) / 3.0


def load_pairs_jsonl(path: str | Path) -> list[PairExample]:
    """Read pairs from JSONL records with text_a/text_b/label (+lang/translated)."""
    path = Path(path)
    if not path.exists():
        raise PairFormatError(f"pairs file not found: {path}")
    pairs: list[PairExample] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise PairFormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise PairFormatError(f"{path}:{lineno}: expected an object")
            for key in ("text_a", "text_b", "label"):
                if key not in obj:
                    raise PairFormatError(f"{path}:{lineno}: missing key {key!r}")
            try:
                pairs.append(
                    PairExample(
                        text_a=str(obj["text_a"]),
                        text_b=str(obj["text_b"]),
                        label=float(obj["label"]),
                        lang=str(obj.get("lang", "en-en")),
                        translated=bool(obj.get("translated", False)),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise PairFormatError(f"{path}:{lineno}: {exc}") from exc
    return pairs


def write_pairs_jsonl(pairs, path: str | Path) -> int:
    """Write pairs as JSONL; returns the number of records written."""
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for p in pairs:
            record = {
                "text_a": p.text_a,
                "text_b": p.text_b,
                "label": p.label,
                "lang": p.lang,
                "translated": p.translated,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            n += 1
    return n
