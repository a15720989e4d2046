"""Shared builders for test corpora."""
from __future__ import annotations

import datetime as dt

from stormpipe.corpus import Article, Corpus, OutletProfile

DAY0 = dt.date(2021, 1, 1)


def day(offset: int) -> dt.date:
    return DAY0 + dt.timedelta(days=offset)


def national(name: str, reliability: str = "reliable") -> OutletProfile:
    return OutletProfile(name=name, scope="national", state=None, reliability=reliability)


def local(name: str, state: str = "CA", reliability: str = "reliable") -> OutletProfile:
    return OutletProfile(name=name, scope="local", state=state, reliability=reliability)


def make_article(
    aid: int,
    outlet: str = "Daily Alpha",
    day_offset: int = 0,
    *,
    date: dt.date | None = None,
    title: str | None = None,
    text: str = "",
    entities: tuple[tuple[str, str], ...] = (),
    topics: tuple[float, ...] | None = None,
) -> Article:
    return Article(
        id=aid,
        outlet=outlet,
        date=date if date is not None else day(day_offset),
        title=title if title is not None else f"story {aid}",
        text=text,
        entities=tuple(entities),
        topic_dist=tuple(topics) if topics is not None else None,
    )


def make_corpus(
    articles,
    outlets=None,
    date_range: tuple[dt.date, dt.date] | None = None,
) -> Corpus:
    arts = tuple(sorted(articles, key=lambda a: a.id))
    if outlets is None:
        profiles = {name: national(name) for name in sorted({a.outlet for a in arts})}
    elif isinstance(outlets, dict):
        profiles = outlets
    else:
        profiles = {o.name: o for o in outlets}
    if date_range is None:
        dates = [a.date for a in arts]
        date_range = (min(dates), max(dates))
    return Corpus(articles=arts, outlets=profiles, date_range=date_range)
