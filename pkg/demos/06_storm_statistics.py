"""
Describing a population of storms
=================================

Once storms are identified they become a sample: summary statistics per
feature, an empirical CDF of durations, the distribution of peak days, and
an average daily-coverage curve with a bootstrap confidence band.
"""
import datetime as dt

import numpy as np

from stormpipe.storms import (
    StormRecord,
    average_storm_series,
    duration_ecdf,
    peak_statistics,
    storm_summary,
)

rng = np.random.default_rng(42)
DAY0 = dt.date(2021, 1, 1)

# fabricate 60 storms with right-skewed sizes and early peaks
storms = []
for cid in range(60):
    duration = int(7 + rng.gamma(2.0, 4.0))
    peak = min(duration, 1 + int(rng.gamma(1.5, 1.5)))
    counts = np.maximum(1, rng.poisson(6, size=duration))
    counts[peak - 1] = counts.max() + rng.integers(3, 10)
    storms.append(
        StormRecord(
            cluster_id=cid,
            article_ids=tuple(range(int(counts.sum()))),
            start_day=DAY0 + dt.timedelta(days=int(rng.integers(0, 300))),
            peak_day_index=peak,
            duration_days=duration,
            outlet_count=int(rng.integers(5, 120)),
            storm_mode_outlets=tuple(f"O{i}" for i in range(5)),
            pct_national=float(rng.uniform(20, 95)),
            daily_counts=tuple(int(c) for c in counts),
            daily_state_counts=tuple(int(c) for c in rng.integers(0, 8, size=duration)),
        )
    )

summary = storm_summary(storms)
print("feature            min     max    mean   median")
for name, st in [("articles", summary.articles), ("duration", summary.duration),
                 ("outlets", summary.outlets), ("pct_national", summary.pct_national)]:
    print(f"{name:12} {st.min:7.1f} {st.max:7.1f} {st.mean:7.1f} {st.median:8.1f}")

# duration ECDF: (value, fraction of storms lasting <= value)
ecdf = duration_ecdf([s.duration_days for s in storms])
print("\nduration ECDF (every 4th point):")
for x, f in ecdf[::4]:
    print(f"  <= {x:4.0f} days: {f:.2f}  {'#' * int(40 * f)}")

peaks = peak_statistics(storms)
print(f"\npeak day: median {peaks.median}, mode {peaks.mode}")
print(f"histogram: { {k: peaks.histogram[k] for k in sorted(peaks.histogram)} }")

# average storm shape over the first two weeks, with a 95% bootstrap band
series = average_storm_series(storms, horizon_days=14, bootstrap_reps=1000, seed=0)
print("\nday   mean   [2.5%, 97.5%]")
for i in range(14):
    print(f"{i + 1:3d}  {series.mean[i]:5.1f}   [{series.lower[i]:.1f}, {series.upper[i]:.1f}]")
