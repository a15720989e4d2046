"""
Entity blocking: cheap candidate pairs before expensive scoring
===============================================================

Comparing every article against every other is quadratic. Blocking only
pairs articles that share at least one indexed entity and were published
within a week of each other — a tiny fraction of all pairs.
"""
import datetime as dt
import itertools

from stormpipe.corpus import Article, Corpus, OutletProfile
from stormpipe.entities import build_index, extract_entities_fallback, generate_candidates

DAY0 = dt.date(2021, 3, 1)
wire = OutletProfile(name="Wire", scope="national", state=None, reliability="reliable")

# a hand corpus: two stories interleaved over two weeks
stories = [
    (0, 0, "Council approves the Harbor Bridge plan", [("Harbor Bridge", "ORG")]),
    (1, 1, "Harbor Bridge plan draws protest", [("Harbor Bridge", "ORG")]),
    (2, 2, "Mayor defends Harbor Bridge budget", [("Harbor Bridge", "ORG"), ("Rosa Vane", "PERSON")]),
    (3, 3, "Rosa Vane announces re-election bid", [("Rosa Vane", "PERSON")]),
    (4, 12, "Harbor Bridge opens to traffic", [("Harbor Bridge", "ORG")]),
    (5, 13, "First week on the Harbor Bridge", [("Harbor Bridge", "ORG")]),
]
articles = tuple(
    Article(
        id=aid,
        outlet="Wire",
        date=DAY0 + dt.timedelta(days=off),
        title=title,
        text="",
        entities=tuple(ents),
        topic_dist=None,
    )
    for aid, off, title, ents in stories
)
corpus = Corpus(
    articles=articles,
    outlets={"Wire": wire},
    date_range=(articles[0].date, articles[-1].date),
)

# the index keeps entities seen in 2+ articles (very common ones get capped)
index = build_index(corpus)
for surface, ids in sorted(index.postings.items()):
    print(f"  {surface!r}: articles {list(ids)}")

pairs = list(generate_candidates(index, corpus))
print(f"\ncandidates: {[(p.a, p.b) for p in pairs]}")
print(f"{len(pairs)} candidate pairs vs {len(list(itertools.combinations(articles, 2)))} total pairs")
# note 0-4 and 0-5 are absent: same entity, but published >7 days apart,
# and 3 pairs only via Rosa Vane / Harbor Bridge overlap

# articles with no entity annotations can fall back to capitalized runs
title = "Interview with Rosa Vane on the Harbor Bridge"
print(f"\nfallback extraction on {title!r}:")
print(f"  {extract_entities_fallback(title)}")
