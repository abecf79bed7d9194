"""Regenerate ttest_corpus.json from scipy (not needed at test time).

    python3 tests/data/make_ttest_corpus.py > tests/data/ttest_corpus.json
"""
import json
import random

import scipy
from scipy import stats

rng = random.Random(5150)
welch = []
for i in range(50):
    na, nb = rng.randint(2, 40), rng.randint(2, 40)
    scale = 10 ** rng.uniform(-3, 6)
    shift = rng.gauss(0, 2) * scale
    sa, sb = scale * rng.uniform(0.2, 3), scale * rng.uniform(0.2, 3)
    a = [round(rng.gauss(0, sa), 6) for _ in range(na)]
    b = [round(rng.gauss(shift, sb), 6) for _ in range(nb)]
    pooled = i % 5 == 4
    r = stats.ttest_ind(a, b, equal_var=pooled)
    df = (na + nb - 2) if pooled else r.df
    welch.append({"a": a, "b": b, "pooled": pooled, "t": float(r.statistic),
                  "df": float(df), "p": float(r.pvalue)})

cdf = []
for _ in range(50):
    df = rng.choice([rng.uniform(0.5, 5), rng.uniform(5, 200), float(rng.randint(1, 1000))])
    t = rng.uniform(-12, 12)
    cdf.append({"t": t, "df": df, "cdf": float(stats.t.cdf(t, df))})

print(json.dumps({"generator": f"scipy {scipy.__version__}", "welch": welch, "cdf": cdf},
                 indent=1))
