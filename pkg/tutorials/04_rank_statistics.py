"""
Ranking learners across problems
================================

Average ranks, the Friedman statistic and the Bonferroni-Dunn critical
difference for a problems x algorithms matrix of RMSE scores.
"""

import numpy as np

from evofis.stats import bonferroni_dunn_cd, friedman, rank_differences, rank_problems

algorithms = ["A", "B", "C"]
# rows are problems; lower is better
scores = np.array([
    [0.156, 0.229, 0.155],
    [0.209, 0.295, 0.166],
    [0.102, 0.117, 0.096],
    [0.133, 0.150, 0.133],
    [0.091, 0.098, 0.087],
    [0.137, 0.124, 0.122],
])

table = rank_problems(scores, algorithms=algorithms)
print("ranks per problem:\n", table.ranks)
print("average ranks:", {a: round(float(r), 3) for a, r in zip(algorithms, table.average_ranks)})

result = friedman(table)
print(f"Friedman Q = {result.q:.4f} with {result.df} degrees of freedom")
for alpha, crit in result.critical_values.items():
    verdict = "reject" if result.reject_null[alpha] else "keep"
    print(f"  alpha {alpha}: critical value {crit:g} -> {verdict} equal performance")

n, k = scores.shape
print("gaps to the best algorithm:", {a: round(d, 3) for a, d in rank_differences(table).items()})
for alpha in (0.05, 0.01):
    print(f"critical difference at alpha {alpha}: {bonferroni_dunn_cd(k, n, alpha):.4f}")

# ranks only depend on order, so any increasing transform gives the same Q
print("Q after log transform:", round(friedman(rank_problems(np.log(scores))).q, 4))
