"""
From similarity edges to story clusters
=======================================

Articles about the same story form a connected component in the similarity
graph: an edge links two articles when their cosine clears the threshold,
and a story cluster is everything reachable through such edges. Components
smaller than the minimum size are discarded as noise.
"""
import datetime as dt

from stormpipe.clustering import build_story_clusters, connected_components
from stormpipe.corpus import Article, Corpus, OutletProfile

# toy similarity graph over 10 articles: two chains and two loners.
# transitivity is the point — 0 and 3 are linked through 1 and 2 even if
# their own cosine never cleared the threshold.
edges = [(0, 1), (1, 2), (2, 3), (5, 6), (6, 7), (7, 5), (8, 9)]
universe = range(10)
labels = connected_components(edges, universe)
print("component labels:", labels)

# the same operation, but producing dated cluster records from a corpus
DAY0 = dt.date(2021, 6, 1)
wire = OutletProfile(name="Wire", scope="national", state=None, reliability="reliable")
articles = tuple(
    Article(
        id=i,
        outlet="Wire",
        date=DAY0 + dt.timedelta(days=offset),
        title=f"article {i}",
        text="",
        entities=(),
        topic_dist=None,
    )
    for i, offset in enumerate([0, 1, 3, 6, 2, 0, 4, 4, 9, 9])
)
corpus = Corpus(articles=articles, outlets={"Wire": wire}, date_range=(DAY0, DAY0 + dt.timedelta(days=9)))

# loners like article 4 fall below the default min_size=2 and are dropped
clusters = build_story_clusters(connected_components(edges, corpus.ids), corpus)
for c in clusters:
    print(
        f"cluster {c.cluster_id}: articles {c.article_ids}, "
        f"{c.first_day} .. {c.last_day} ({c.duration_days} days)"
    )

small = build_story_clusters(connected_components(edges, corpus.ids), corpus, min_size=4)
print(f"\nwith min_size=4 only the biggest component survives: {[c.cluster_id for c in small]}")
