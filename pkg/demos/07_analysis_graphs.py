"""
Topic skew, gatekeeping and lead-lag influence
==============================================

Three downstream analyses over detected storms: which topics storms
over-represent, how a storm's topic crowds outlet agendas around its start,
and which outlets systematically enter stories before others.
"""
import datetime as dt

from stormpipe.analysis import (
    build_influence_graph,
    gatekeeping_series,
    influence_graph_to_dict,
    storm_topic,
    topic_skew,
)
from stormpipe.corpus import Article, Corpus, OutletProfile
from stormpipe.storms import StormRecord

DAY0 = dt.date(2021, 5, 1)
K = 3  # topics: 0=politics, 1=crime, 2=sports

hot = lambda t: tuple(0.8 if i == t else 0.2 / (K - 1) for i in range(K))


def art(aid, outlet, off, topic):
    return Article(id=aid, outlet=outlet, date=DAY0 + dt.timedelta(days=off),
                   title=f"a{aid}", text="", entities=(), topic_dist=hot(topic))


# one storm: Anchor leads on day 0, Mirror follows day 1, Echo day 3.
# crime articles (topic 1) are the storm; each outlet also runs politics
# background every day.
articles = []
aid = 0
members = []
for outlet, first in [("Anchor", 0), ("Mirror", 1), ("Echo", 3)]:
    for off in range(first, 7):
        articles.append(art(aid, outlet, off, topic=1))
        members.append(aid)
        aid += 1
    for off in range(-3, 7):
        articles.append(art(aid, outlet, off, topic=0))
        aid += 1
articles.sort(key=lambda a: a.id)
outlets = {
    name: OutletProfile(name=name, scope="national", state=None, reliability="reliable")
    for name in ("Anchor", "Mirror", "Echo")
}
corpus = Corpus(articles=tuple(articles), outlets=outlets,
                date_range=(DAY0 - dt.timedelta(days=3), DAY0 + dt.timedelta(days=6)))

dates = sorted(corpus.article(m).date for m in members)
span = (dates[-1] - dates[0]).days + 1
daily = [0] * span
for d in dates:
    daily[(d - dates[0]).days] += 1
storm = StormRecord(
    cluster_id=0, article_ids=tuple(sorted(members)), start_day=dates[0],
    peak_day_index=1 + max(range(span), key=lambda i: (daily[i], -i)),
    duration_days=span, outlet_count=3, storm_mode_outlets=("Anchor", "Mirror", "Echo"),
    pct_national=100.0, daily_counts=tuple(daily),
    daily_state_counts=tuple(0 for _ in daily),
)

print(f"storm topic: {storm_topic(storm, corpus)} (crime)")

# skew: storm membership vs the rest of the corpus, percentage points per topic
rest = [a for a in corpus if a.id not in set(members)]
skew = topic_skew([corpus.article(m) for m in members], rest, K)
print(f"topic skew (pp): {[round(float(x), 1) for x in skew]}")

# gatekeeping: share of covering outlets' output on the storm topic, by day
# offset around the start; before day 0 the topic is absent from agendas
series = gatekeeping_series(storm, corpus, window=4)
for offset, value in zip(range(-4, 5), series):
    label = "-" if value is None else f"{value:5.1f}%"
    print(f"  day {offset:+d}: {label}")

# influence: who entered the storm first. Mirror joined within Anchor's
# 2-day shadow; Echo joined while both Anchor and Mirror had fresh coverage,
# so it is credited to each of them.
graph = build_influence_graph([storm], corpus, lookback_days=2)
print(f"\ninfluence edges: {graph.edges}")
print(f"net (out - in): {graph.net}")
print(f"JSON form: {influence_graph_to_dict(graph)}")
