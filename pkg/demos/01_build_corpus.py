"""
Building and validating a news corpus
=====================================

Generate a small synthetic dataset, write it to disk in the package's
JSONL formats, then ingest it back with full validation and a per-record
rejection report.
"""
import tempfile
from pathlib import Path

from stormpipe.corpus import ingest, load_outlets
from stormpipe.synth import generate_synthetic_corpus, tiny_spec, write_synthetic_dataset

workdir = Path(tempfile.mkdtemp(prefix="storm-demo-"))

# ~2,000 articles over ~40 days, with one planted storm and one near miss
dataset = generate_synthetic_corpus(tiny_spec(), seed=11)
paths = write_synthetic_dataset(dataset, workdir)
print(f"wrote {len(dataset.corpus)} articles to {paths['articles']}")

# outlets first: every article must resolve to a profiled outlet
outlets = load_outlets(paths["outlets"])
national = sum(1 for p in outlets.values() if p.scope == "national")
print(f"{len(outlets)} outlets ({national} national, {len(outlets) - national} local)")

# ingest validates each line and reports problems instead of dying midway
result = ingest(paths["articles"], paths["outlets"])
corpus = result.corpus
print(f"accepted {len(corpus)} articles, rejected {len(result.rejected)}")
print(f"date range: {corpus.date_range[0]} .. {corpus.date_range[1]}")

# corrupt two lines to see the rejection report in action
lines = paths["articles"].read_text().splitlines()
lines[5] = "{not json"
lines[9] = lines[9].replace('"outlet":"', '"outlet":"Ghost ')
broken = workdir / "broken.jsonl"
broken.write_text("\n".join(lines) + "\n")

result2 = ingest(broken, paths["outlets"])
print(f"\nafter corrupting two lines: accepted {len(result2.corpus)}, rejected {len(result2.rejected)}")
for r in result2.rejected:
    print(f"  line {r.line}: {r.reason} {r.detail}")
