"""Article corpus ingestion, validation, deduplication and date windowing.

The corpus is the root data structure for the whole pipeline: a validated,
id-ordered collection of articles plus an outlet metadata table. Input is
newline-delimited JSON (one object per line); see ``ingest`` for the record
schemas and the per-record rejection contract.
"""
from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field
from pathlib import Path

VALID_SCOPES = ("national", "local")
VALID_RELIABILITY = ("reliable", "mixed", "unreliable", "unrated")

TOPIC_SUM_TOL = 1e-6


class CorpusFormatError(ValueError):
    """Unrecoverable problem in a corpus input file (bad outlets table, missing file...)."""


@dataclass(frozen=True)
class Article:
    """One news article.

    ``entities`` holds (surface form, type tag) pairs as produced by an NER
    system or by :func:`stormpipe.entities.extract_entities_fallback`.
    ``topic_dist`` is an optional probability vector over a topic model's
    topics; analyses that need it fail fast per article when it is missing.
    """

    id: int
    outlet: str
    date: dt.date
    title: str
    text: str
    entities: tuple[tuple[str, str], ...] = ()
    topic_dist: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValueError(f"article id must be non-negative, got {self.id}")
        if self.topic_dist is not None:
            if any(p < 0.0 for p in self.topic_dist):
                raise ValueError(f"article {self.id}: negative topic probability")
            total = sum(self.topic_dist)
            if abs(total - 1.0) > TOPIC_SUM_TOL:
                raise ValueError(
                    f"article {self.id}: topic_dist sums to {total!r}, expected 1 +/- {TOPIC_SUM_TOL}"
                )


@dataclass(frozen=True)
class OutletProfile:
    """Metadata for one news outlet.

    Local outlets may carry a two-letter US state code; national outlets
    never do. ``reliability`` is a coarse factuality rating.
    """

    name: str
    scope: str
    state: str | None = None
    reliability: str = "unrated"

    def __post_init__(self) -> None:
        if self.scope not in VALID_SCOPES:
            raise ValueError(f"outlet {self.name!r}: scope must be one of {VALID_SCOPES}")
        if self.reliability not in VALID_RELIABILITY:
            raise ValueError(
                f"outlet {self.name!r}: reliability must be one of {VALID_RELIABILITY}"
            )
        if self.state is not None:
            if self.scope != "local":
                raise ValueError(f"outlet {self.name!r}: only local outlets carry a state")
            if len(self.state) != 2 or not self.state.isalpha() or not self.state.isupper():
                raise ValueError(f"outlet {self.name!r}: state must be a 2-letter code")


@dataclass(frozen=True)
class Corpus:
    """A validated set of articles plus outlet metadata.

    Invariants enforced on construction: article ids are strictly increasing
    (hence unique), every article date falls inside ``date_range``, and every
    article's outlet resolves to exactly one profile.
    """

    articles: tuple[Article, ...]
    outlets: dict[str, OutletProfile]
    date_range: tuple[dt.date, dt.date]

    def __post_init__(self) -> None:
        start, end = self.date_range
        if start > end:
            raise ValueError(f"inverted date_range {start}..{end}")
        prev = -1
        for art in self.articles:
            if art.id <= prev:
                raise ValueError(f"article ids must be strictly increasing (saw {art.id} after {prev})")
            prev = art.id
            if not (start <= art.date <= end):
                raise ValueError(f"article {art.id}: date {art.date} outside corpus range {start}..{end}")
            if art.outlet not in self.outlets:
                raise ValueError(f"article {art.id}: unknown outlet {art.outlet!r}")
        object.__setattr__(self, "_by_id", {a.id: a for a in self.articles})

    def __len__(self) -> int:
        return len(self.articles)

    def __iter__(self):
        return iter(self.articles)

    def article(self, article_id: int) -> Article:
        """Look up an article by id; raises KeyError for unknown ids."""
        return self._by_id[article_id]  # type: ignore[attr-defined]

    def __contains__(self, article_id: int) -> bool:
        return article_id in self._by_id  # type: ignore[attr-defined]

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(a.id for a in self.articles)


@dataclass(frozen=True)
class RejectedRecord:
    """One article record dropped during ingest, with the 1-based input line number."""

    line: int
    reason: str
    detail: str = ""


@dataclass(frozen=True)
class IngestResult:
    corpus: Corpus
    rejected: tuple[RejectedRecord, ...]


def load_outlets(path: str | Path) -> dict[str, OutletProfile]:
    """Parse an outlets JSONL file into a name -> profile map.

    The outlet table is the metadata backbone, so any malformed record here
    raises ``CorpusFormatError`` (with the line number) instead of being
    skipped.
    """
    outlets: dict[str, OutletProfile] = {}
    path = Path(path)
    if not path.exists():
        raise CorpusFormatError(f"outlets file not found: {path}")
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict) or "name" not in obj or "scope" not in obj:
                raise CorpusFormatError(f"{path}:{lineno}: outlet record needs 'name' and 'scope'")
            name = obj["name"]
            if name in outlets:
                raise CorpusFormatError(f"{path}:{lineno}: duplicate outlet profile {name!r}")
            try:
                outlets[name] = OutletProfile(
                    name=name,
                    scope=obj["scope"],
                    state=obj.get("state"),
                    reliability=obj.get("reliability", "unrated"),
                )
            except ValueError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from exc
    return outlets


def _parse_topic_dist(value, lineno: int) -> tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise ValueError("topics must be a non-empty list of numbers")
    dist = tuple(float(p) for p in value)
    return dist


def _parse_article(obj: dict, lineno: int, fallback_id: int) -> Article:
    for key in ("outlet", "date", "title", "text"):
        if key not in obj:
            raise ValueError(f"missing field {key!r}")
    art_id = obj.get("id", fallback_id)
    if not isinstance(art_id, int) or isinstance(art_id, bool):
        raise ValueError(f"id must be an integer, got {obj.get('id')!r}")
    date = dt.date.fromisoformat(obj["date"])
    entities_raw = obj.get("entities", [])
    if not isinstance(entities_raw, list):
        raise ValueError("entities must be a list of [surface, type] pairs")
    entities = []
    for item in entities_raw:
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise ValueError("entities must be a list of [surface, type] pairs")
        entities.append((str(item[0]), str(item[1])))
    topic_dist = None
    if obj.get("topics") is not None:
        topic_dist = _parse_topic_dist(obj["topics"], lineno)
    return Article(
        id=art_id,
        outlet=str(obj["outlet"]),
        date=date,
        title=str(obj["title"]),
        text=str(obj["text"]),
        entities=tuple(entities),
        topic_dist=topic_dist,
    )


def ingest(
    articles_path: str | Path,
    outlets_path: str | Path,
    fmt: str = "jsonl",
    date_range: tuple[dt.date, dt.date] | None = None,
) -> IngestResult:
    """Read article and outlet JSONL files into a validated :class:`Corpus`.

    Article records carry ``outlet``, ``date`` (ISO), ``title``, ``text`` and
    optionally ``id``, ``entities`` ([[surface, type], ...]) and ``topics``
    (probability list). Records missing ``id`` get the 0-based index of their
    line among article records.

    Per-record problems do not abort the run: malformed JSON, schema
    violations, unknown outlets, duplicate ids, invalid topic distributions
    and (when ``date_range`` is declared) out-of-range dates each produce a
    :class:`RejectedRecord` carrying the 1-based line number, and ingestion
    continues. File-level problems raise :class:`CorpusFormatError`.
    """
    if fmt != "jsonl":
        raise CorpusFormatError(f"unsupported corpus format {fmt!r}")
    outlets = load_outlets(outlets_path)

    articles: list[Article] = []
    seen_ids: set[int] = set()
    rejected: list[RejectedRecord] = []
    articles_path = Path(articles_path)
    if not articles_path.exists():
        raise CorpusFormatError(f"articles file not found: {articles_path}")

    record_index = 0
    with articles_path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            this_index = record_index
            record_index += 1
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                rejected.append(RejectedRecord(lineno, "malformed-json", str(exc)))
                continue
            if not isinstance(obj, dict):
                rejected.append(RejectedRecord(lineno, "malformed-record", "not a JSON object"))
                continue
            try:
                art = _parse_article(obj, lineno, fallback_id=this_index)
            except (ValueError, TypeError) as exc:
                rejected.append(RejectedRecord(lineno, "malformed-record", str(exc)))
                continue
            if art.outlet not in outlets:
                rejected.append(RejectedRecord(lineno, "unknown-outlet", art.outlet))
                continue
            if art.id in seen_ids:
                rejected.append(RejectedRecord(lineno, "duplicate-id", str(art.id)))
                continue
            if date_range is not None and not (date_range[0] <= art.date <= date_range[1]):
                rejected.append(RejectedRecord(lineno, "date-out-of-range", art.date.isoformat()))
                continue
            seen_ids.add(art.id)
            articles.append(art)

    articles.sort(key=lambda a: a.id)
    if date_range is None:
        if not articles:
            raise CorpusFormatError(
                "no articles accepted and no date range declared; cannot build a corpus"
            )
        date_range = (min(a.date for a in articles), max(a.date for a in articles))
    corpus = Corpus(articles=tuple(articles), outlets=outlets, date_range=date_range)
    return IngestResult(corpus=corpus, rejected=tuple(rejected))


def dedup(corpus: Corpus) -> Corpus:
    """Drop duplicate articles sharing (outlet, exact title).

    Of each duplicate group the earliest-dated article survives; date ties
    break to the lowest id. Surviving articles keep their ids. Idempotent.
    """
    best: dict[tuple[str, str], Article] = {}
    for art in corpus.articles:
        key = (art.outlet, art.title)
        cur = best.get(key)
        if cur is None or (art.date, art.id) < (cur.date, cur.id):
            best[key] = art
    keep = {a.id for a in best.values()}
    survivors = tuple(a for a in corpus.articles if a.id in keep)
    return Corpus(articles=survivors, outlets=corpus.outlets, date_range=corpus.date_range)


def truncate_range(corpus: Corpus, start: dt.date, end: dt.date) -> Corpus:
    """Keep only articles dated within [start, end] inclusive.

    The returned corpus declares exactly [start, end] as its range; a window
    covering no articles yields an empty corpus. Raises ``ValueError`` when
    start > end.
    """
    if start > end:
        raise ValueError(f"inverted truncation range {start}..{end}")
    survivors = tuple(a for a in corpus.articles if start <= a.date <= end)
    return Corpus(articles=survivors, outlets=corpus.outlets, date_range=(start, end))


def article_to_record(art: Article) -> dict:
    """Canonical JSON-safe form of one article (fixed key order)."""
    rec: dict = {
        "id": art.id,
        "outlet": art.outlet,
        "date": art.date.isoformat(),
        "title": art.title,
        "text": art.text,
    }
    if art.entities:
        rec["entities"] = [[s, t] for s, t in art.entities]
    if art.topic_dist is not None:
        rec["topics"] = list(art.topic_dist)
    return rec


def export_articles(corpus: Corpus, path: str | Path) -> None:
    """Write articles as canonical JSONL: ingest(export(c)) reproduces c byte-for-byte."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for art in corpus.articles:
            fh.write(json.dumps(article_to_record(art), ensure_ascii=False, separators=(",", ":")))
            fh.write("\n")


def export_outlets(corpus: Corpus, path: str | Path) -> None:
    """Write outlet profiles as canonical JSONL sorted by outlet name."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for name in sorted(corpus.outlets):
            prof = corpus.outlets[name]
            rec: dict = {"name": prof.name, "scope": prof.scope}
            if prof.state is not None:
                rec["state"] = prof.state
            rec["reliability"] = prof.reliability
            fh.write(json.dumps(rec, ensure_ascii=False, separators=(",", ":")))
            fh.write("\n")
