from __future__ import annotations

import json
from pathlib import Path

import pytest


@pytest.fixture
def write_jsonl(tmp_path: Path):
    """Return a helper that writes a list of objects (or raw lines) to a JSONL file."""

    def _write(name: str, records) -> Path:
        path = tmp_path / name
        with path.open("w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(rec if isinstance(rec, str) else json.dumps(rec))
                fh.write("\n")
        return path

    return _write
