"""
Comparing the three learners on a synthetic load profile
========================================================

One-step-ahead forecasting of a daily/weekly load curve with eTS, SAFIS
and McFIS, trained sequentially and evaluated predict-then-learn.
"""

import numpy as np

from evofis.experiment import run_experiment
from evofis.synth import synth_series
from evofis.timeseries import WindowConfig

# hourly samples: 24 per day, three weeks
series, meta = synth_series("daily-profile", 24 * 21, noise=0.5, seed=11)
print(f"{len(series)} samples, range {series.values.min():.1f} .. {series.values.max():.1f}")

window = WindowConfig(nu=4, gamma=1, train_fraction=0.85)

reports = {}
for alg in ("ets", "safis", "mcfis"):
    rep = run_experiment(series, window, alg, problem="hourly")
    reports[rep.algorithm] = rep
    print(f"{rep.algorithm:<6} RMSE {rep.rmse:.4f}  NDEI {rep.ndei:.4f}  rules {rep.final_rule_count}")

# the last day of the test stream, in normalized units
best = min(reports.values(), key=lambda r: r.rmse)
actual = np.ravel(best.actuals)[-24:]
predicted = np.ravel(best.predictions)[-24:]
print(f"\nevery 4th of the last 24 test steps ({best.algorithm}):")
for a, p in zip(actual[::4], predicted[::4]):
    print(f"  actual {a:.3f}  predicted {p:.3f}")

# a horizon of five steps turns the target into a vector; one model predicts all of it
multi = run_experiment(series, WindowConfig(nu=4, gamma=5, train_fraction=0.85), "mcfis")
print(f"\n5-step horizon McFIS RMSE {multi.rmse:.4f}, target width {len(multi.actuals[0])}")
