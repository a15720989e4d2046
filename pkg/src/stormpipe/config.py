"""Pipeline configuration: one declarative unit with validated knobs."""
from __future__ import annotations

import dataclasses
import datetime as dt
import json
import os
from dataclasses import dataclass
from pathlib import Path

WORKDIR_ENV = "STORMPIPE_WORKDIR"


class ConfigError(ValueError):
    """Invalid pipeline configuration (CLI exit code 2)."""


@dataclass
class PipelineConfig:
    """Paths plus every tunable the pipeline stages read.

    The defaults are the production operating point: candidate pairs share an
    entity and sit at most 7 days apart, similarity edges need cosine > 0.9,
    storm mode needs a >= 3% share of a >= 40-article 3-day window, and storms
    need >= 7 days and >= 5 storm-mode outlets.
    """

    articles_path: str = ""
    outlets_path: str = ""
    workdir: str = ""
    embeddings_path: str | None = None
    start_date: dt.date | None = None
    end_date: dt.date | None = None

    max_count: int = 20_000
    max_day_gap: int = 7
    threshold: float = 0.9
    window_days: int = 3
    share_threshold: float = 0.03
    min_window_articles: int = 40
    min_duration: int = 7
    min_storm_outlets: int = 5
    min_cluster_size: int = 2
    topics_k: int = 30
    bootstrap_reps: int = 1000
    seed: int = 0
    lookback_days: int = 2
    threads: int = 1
    embed_dim: int = 64
    horizon_days: int = 30
    gatekeeping_window: int = 14
    top_n_outlets: int = 20

    _POSITIVE_INT = (
        "max_count",
        "max_day_gap",
        "window_days",
        "min_window_articles",
        "min_duration",
        "min_storm_outlets",
        "min_cluster_size",
        "topics_k",
        "bootstrap_reps",
        "lookback_days",
        "threads",
        "embed_dim",
        "horizon_days",
        "gatekeeping_window",
        "top_n_outlets",
    )

    def validate(self) -> None:
        if not self.articles_path:
            raise ConfigError("articles_path is required")
        if not self.outlets_path:
            raise ConfigError("outlets_path is required")
        if not self.workdir:
            raise ConfigError(f"workdir is required (flag, config file, or ${WORKDIR_ENV})")
        for name in self._POSITIVE_INT:
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        for name in ("threshold", "share_threshold"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not (0.0 < float(value) <= 1.0):
                raise ConfigError(f"{name} must lie in (0, 1], got {value!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.gatekeeping_window < 0:
            raise ConfigError("gatekeeping_window must be >= 0")
        if (self.start_date is None) != (self.end_date is None):
            raise ConfigError("start_date and end_date must be given together")
        if self.start_date is not None and self.end_date is not None:
            if self.start_date > self.end_date:
                raise ConfigError(f"start_date {self.start_date} after end_date {self.end_date}")

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls))

    @classmethod
    def from_dict(cls, obj: dict) -> "PipelineConfig":
        known = set(cls.field_names())
        unknown = sorted(set(obj) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        kwargs = dict(obj)
        for key in ("start_date", "end_date"):
            if kwargs.get(key) is not None:
                try:
                    kwargs[key] = dt.date.fromisoformat(kwargs[key])
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"{key}: expected YYYY-MM-DD, got {kwargs[key]!r}") from exc
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        config = cls.from_dict(obj)
        if not config.workdir:
            config.workdir = os.environ.get(WORKDIR_ENV, "")
        return config

    def apply_override(self, key: str, raw: str) -> None:
        """Set one field from a command-line ``key=value`` string, type-coerced."""
        fields = {f.name: f for f in dataclasses.fields(self)}
        if key not in fields:
            raise ConfigError(f"unknown config key {key!r}")
        if key in ("start_date", "end_date"):
            try:
                setattr(self, key, dt.date.fromisoformat(raw))
            except ValueError as exc:
                raise ConfigError(f"{key}: expected YYYY-MM-DD, got {raw!r}") from exc
            return
        current = getattr(self, key)
        if key == "embeddings_path":
            setattr(self, key, raw or None)
        elif isinstance(current, bool):
            raise ConfigError(f"{key} cannot be overridden")
        elif isinstance(current, int):
            try:
                setattr(self, key, int(raw))
            except ValueError as exc:
                raise ConfigError(f"{key}: expected integer, got {raw!r}") from exc
        elif isinstance(current, float):
            try:
                setattr(self, key, float(raw))
            except ValueError as exc:
                raise ConfigError(f"{key}: expected number, got {raw!r}") from exc
        else:
            setattr(self, key, raw)

    def snapshot(self) -> dict:
        """JSON-safe copy of every field, for stage manifests."""
        out: dict = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, dt.date):
                value = value.isoformat()
            out[f.name] = value
        return out
