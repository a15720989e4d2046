"""Head+tail token truncation for long articles."""
from __future__ import annotations

from typing import Sequence, TypeVar

T = TypeVar("T")


def truncate_head_tail(tokens: Sequence[T], head: int = 288, tail: int = 96) -> list[T]:
    """Keep the first ``head`` and last ``tail`` tokens of an over-long sequence.

    Sequences of at most head+tail tokens come back unchanged, so the output
    length is always min(len(tokens), head + tail). The kept positions for a
    longer sequence are [0, head) followed by [len - tail, len).
    """
    if head < 0 or tail < 0:
        raise ValueError(f"head and tail must be >= 0, got ({head}, {tail})")
    items = list(tokens)
    limit = head + tail
    if len(items) <= limit:
        return items
    return items[:head] + (items[len(items) - tail :] if tail else [])
