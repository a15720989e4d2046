"""Fine-tune a small encoder on labeled pairs, evaluate it, and export EMB1.

Uses the offline tiny encoder so the demo runs in seconds with no downloads;
swap in ``load_pretrained()`` for real embeddings. The exported file is what
the storm pipeline consumes via ``stormpipe score --set embeddings_path=...``.
"""
from __future__ import annotations

import json
import random
import struct
import tempfile
from pathlib import Path

from newssim import (
    PairExample,
    TrainConfig,
    build_tiny_encoder,
    embed_articles_jsonl,
    evaluate,
    finetune,
)

WORDS = ["storm", "flood", "market", "election", "trial", "verdict", "river", "council"]


def sentence(rng: random.Random) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(5, 12)))


def main() -> None:
    rng = random.Random(0)
    pairs = []
    for i in range(60):
        if i % 2 == 0:
            text = sentence(rng)
            pairs.append(PairExample(text_a=text, text_b=text + " " + rng.choice(WORDS), label=1.0))
        else:
            pairs.append(PairExample(text_a=sentence(rng), text_b=sentence(rng), label=0.0))
    train_pairs, eval_pairs = pairs[:50], pairs[50:]

    print("== fine-tune ==")
    encoder = build_tiny_encoder(seed=3)
    # The production recipe uses lr=2e-6 on a pretrained checkpoint; this
    # randomly initialised toy needs a much larger step to move at all.
    config = TrainConfig(head_tokens=32, tail_tokens=8, epochs=2, batch_size=5, lr=1e-3, seed=1)
    log = finetune(encoder, train_pairs, config)
    for epoch, mean in enumerate(log.epoch_mean_losses(), start=1):
        print(f"  epoch {epoch}: mean loss {mean:.4f}")
    print(f"  optimizer: {log.optimizer}; schedule: {log.schedule}")

    print("== evaluate ==")
    r = evaluate(encoder, eval_pairs, head=32, tail=8)
    print(f"  Pearson r on {len(eval_pairs)} held-out pairs: {r:.3f}")

    print("== export ==")
    workdir = Path(tempfile.mkdtemp(prefix="newssim-demo-"))
    articles = workdir / "articles.jsonl"
    with articles.open("w", encoding="utf-8") as fh:
        for i in range(10):
            fh.write(
                json.dumps({"id": 1000 + i, "title": f"headline {i}", "text": sentence(rng)}) + "\n"
            )
    out = workdir / "embeddings.bin"
    report = embed_articles_jsonl(encoder, articles, out, head=32, tail=8)
    print(f"  wrote {report.written} vectors of dim {report.dimension} to {out}")
    print(f"  ids sidecar: {report.ids_path.name}, skipped: {len(report.skipped)}")

    raw = out.read_bytes()
    count, dim = struct.unpack_from("<II", raw, 4)
    print(f"  header: magic={raw[:4]!r} count={count} dim={dim}")
    print(f"  consume with: stormpipe score --set embeddings_path={out}")


if __name__ == "__main__":
    main()
