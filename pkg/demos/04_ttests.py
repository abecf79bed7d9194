# Welch t-tests on benchmark output, mirroring the `aquasim ttest` command
import tempfile
from pathlib import Path

from aquasim import bench
from aquasim.stats import student_t_cdf, welch_t

r = welch_t([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
print(r.t_statistic, r.df, r.p_value)
print(welch_t([1, 2, 3, 4, 5], [2, 3, 4, 5, 6], pooled=True).p_value)
print(student_t_cdf(2.042, 30))   # ~0.975

out = Path(tempfile.mkdtemp())
summary = bench.bench_all(out, seed=7)
for name, res in summary["ttests"].items():
    print(f"{name:32s} t={res['t_statistic']} p={res['p_value']:.3g}")
print(sorted(p.name for p in (out / "figures").iterdir())[:3], "...")

# or by hand from the CSVs
a = bench.read_metrics_csv(out / "scenario_B.csv")
d = bench.read_metrics_csv(out / "scenario_D.csv")
print(bench.compare_modes("block_time", a, d).to_json("block_time_s"))
