"""Shared fixtures for the test suite: pair corpora and a fast encoder."""
from __future__ import annotations

import random

from newssim import PairExample, build_tiny_encoder

WORDS = [
    "storm", "flood", "market", "election", "trial", "verdict", "rain",
    "wind", "council", "budget", "river", "bridge", "protest", "strike",
]


def random_sentence(rng: random.Random, lo: int = 5, hi: int = 12) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(lo, hi)))


def labeled_pairs(n: int, seed: int = 0, translated_every: int | None = None) -> list[PairExample]:
    """Alternate near-duplicate pairs (label 1.0) with unrelated ones (label 0.0).

    With ``translated_every`` set, every k-th pair is marked as machine
    translated (lang de-de) so exclusion paths have something to exclude.
    """
    rng = random.Random(seed)
    pairs: list[PairExample] = []
    for i in range(n):
        if i % 2 == 0:
            text = random_sentence(rng)
            pair = PairExample(
                text_a=text,
                text_b=text + " " + rng.choice(WORDS),
                label=1.0,
            )
        else:
            pair = PairExample(
                text_a=random_sentence(rng),
                text_b=random_sentence(rng),
                label=0.0,
            )
        if translated_every is not None and i % translated_every == 0:
            pair = PairExample(
                text_a=pair.text_a,
                text_b=pair.text_b,
                label=pair.label,
                lang="de-de",
                translated=True,
            )
        pairs.append(pair)
    return pairs


def small_encoder(seed: int = 0):
    """A deterministic randomly initialised encoder sized for unit tests."""
    return build_tiny_encoder(seed=seed, hidden_size=32, layers=2)
