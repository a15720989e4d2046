"""
Detecting media storms
======================

A story cluster is a storm when it (a) spans at least 7 calendar days and
(b) puts at least 5 distinct outlets into "storm mode": some 3-day window
where the story is >= 3% of everything the outlet published, over a window
total of at least 40 articles. This script builds one qualifying cluster
and one that misses on a single criterion, and shows the difference.
"""
import datetime as dt

from stormpipe.clustering import StoryCluster
from stormpipe.corpus import Article, Corpus, OutletProfile
from stormpipe.storms import detect_storm_mode, identify_storms

DAY0 = dt.date(2021, 9, 1)


def build(n_outlets: int, storm_days: int, background_per_day: int = 30):
    """n outlets, each with steady background plus 1 story article per storm day."""
    articles = []
    members = []
    aid = 0
    for k in range(n_outlets):
        name = f"Outlet {k}"
        for off in range(0, storm_days + 10):
            for _ in range(background_per_day):
                articles.append(
                    Article(id=aid, outlet=name, date=DAY0 + dt.timedelta(days=off),
                            title=f"background {aid}", text="", entities=(), topic_dist=None)
                )
                aid += 1
        for off in range(5, 5 + storm_days):
            articles.append(
                Article(id=aid, outlet=name, date=DAY0 + dt.timedelta(days=off),
                        title=f"storm {aid}", text="", entities=(), topic_dist=None)
            )
            members.append(aid)
            aid += 1
    articles.sort(key=lambda a: a.id)
    outlets = {
        f"Outlet {k}": OutletProfile(name=f"Outlet {k}", scope="national", state=None,
                                     reliability="reliable")
        for k in range(n_outlets)
    }
    corpus = Corpus(
        articles=tuple(articles),
        outlets=outlets,
        date_range=(DAY0, DAY0 + dt.timedelta(days=storm_days + 9)),
    )
    cluster = StoryCluster(
        cluster_id=0,
        article_ids=tuple(members),
        first_day=DAY0 + dt.timedelta(days=5),
        last_day=DAY0 + dt.timedelta(days=4 + storm_days),
    )
    return corpus, cluster


# 5 outlets x 9 story days: qualifies
corpus, cluster = build(n_outlets=5, storm_days=9)
events = detect_storm_mode(cluster, corpus)
one_outlet = [e for e in events if e.outlet == "Outlet 0"]
print(f"Outlet 0 storm-mode windows: {len(one_outlet)}")
for e in one_outlet[:3]:
    print(f"  window {e.window_start}: share {e.share:.3f} of {e.outlet_window_total} articles")

storms = identify_storms([cluster], corpus)
s = storms[0]
print(f"\nstorm: {s.duration_days} days from {s.start_day}, "
      f"{s.article_count} articles, {len(s.storm_mode_outlets)} outlets in storm mode")
print(f"daily counts: {s.daily_counts}, peak day {s.peak_day_index} ({s.peak_day})")

# same intensity but only 6 story days: misses the duration criterion alone
corpus6, cluster6 = build(n_outlets=5, storm_days=6)
print(f"\n6-day cluster -> storms: {identify_storms([cluster6], corpus6)}")
print(f"...but with min_duration=6: "
      f"{len(identify_storms([cluster6], corpus6, min_duration=6))} storm(s)")
