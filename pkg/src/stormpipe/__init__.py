"""Detection and analysis of sustained multi-outlet news coverage storms.

The package is organized as a staged pipeline over a news corpus:

1. ingest + dedup (:mod:`stormpipe.corpus`)
2. entity indexing and candidate pair generation (:mod:`stormpipe.entities`)
3. embedding similarity scoring (:mod:`stormpipe.similarity`)
4. connected-component story clustering (:mod:`stormpipe.clustering`)
5. storm detection and descriptive statistics (:mod:`stormpipe.storms`)
6. topic, gatekeeping and influence analyses (:mod:`stormpipe.analysis`)

:mod:`stormpipe.synth` builds synthetic corpora with known ground truth, and
:mod:`stormpipe.pipeline` + the ``stormpipe`` CLI wire the stages together
with manifests and reproducibility checks.
"""
from __future__ import annotations

from .analysis import (
    InfluenceGraph,
    MissingTopicsError,
    assign_article_topic,
    average_gatekeeping_series,
    build_influence_graph,
    gatekeeping_series,
    storm_topic,
    top_outlets_subgraph,
    topic_skew,
)
from .clustering import StoryCluster, UnionFind, build_story_clusters, connected_components
from .config import ConfigError, PipelineConfig
from .corpus import (
    Article,
    Corpus,
    CorpusFormatError,
    IngestResult,
    OutletProfile,
    dedup,
    ingest,
    truncate_range,
)
from .entities import (
    CandidatePair,
    EntityIndex,
    build_index,
    extract_entities_fallback,
    generate_candidates,
)
from .pipeline import STAGE_ORDER, StageResult, UpstreamError, run_stage
from .similarity import (
    EmbeddingFormatError,
    EmbeddingMatrix,
    SimilarityEdge,
    cosine,
    load_embeddings,
    mock_embed,
    score_candidates,
    write_embeddings,
)
from .storms import (
    StormRecord,
    average_storm_series,
    detect_storm_mode,
    duration_ecdf,
    identify_storms,
    peak_statistics,
    storm_summary,
)
from .synth import (
    PRESETS,
    SyntheticSpec,
    generate_synthetic_corpus,
    validate_spec,
    write_synthetic_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "Article",
    "CandidatePair",
    "ConfigError",
    "Corpus",
    "CorpusFormatError",
    "EmbeddingFormatError",
    "EmbeddingMatrix",
    "EntityIndex",
    "InfluenceGraph",
    "IngestResult",
    "MissingTopicsError",
    "OutletProfile",
    "PRESETS",
    "PipelineConfig",
    "STAGE_ORDER",
    "SimilarityEdge",
    "StageResult",
    "StormRecord",
    "StoryCluster",
    "SyntheticSpec",
    "UnionFind",
    "UpstreamError",
    "assign_article_topic",
    "average_gatekeeping_series",
    "average_storm_series",
    "build_index",
    "build_influence_graph",
    "build_story_clusters",
    "connected_components",
    "cosine",
    "dedup",
    "detect_storm_mode",
    "duration_ecdf",
    "extract_entities_fallback",
    "gatekeeping_series",
    "generate_candidates",
    "generate_synthetic_corpus",
    "identify_storms",
    "ingest",
    "load_embeddings",
    "mock_embed",
    "peak_statistics",
    "run_stage",
    "score_candidates",
    "storm_summary",
    "storm_topic",
    "top_outlets_subgraph",
    "topic_skew",
    "truncate_range",
    "validate_spec",
    "write_embeddings",
    "write_synthetic_dataset",
    "__version__",
]
