"""Error scores and rank statistics for comparing learners across problems."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from statistics import NormalDist

import numpy as np
from scipy import stats as sps

# Exact Friedman critical values, keyed by (k algorithms, N problems).
EXACT_FRIEDMAN_CRITICAL = {(3, 6): {0.05: 7.0, 0.01: 9.0}}
SUPPORTED_CD_ALPHAS = (0.05, 0.01)


class DegenerateSeriesError(ValueError):
    pass


class IncompleteMatrixError(ValueError):
    pass


def _pair_arrays(actuals, predictions):
    a = np.asarray(actuals, dtype=float)
    p = np.asarray(predictions, dtype=float)
    if a.shape != p.shape:
        raise ValueError(f"shape mismatch: actuals {a.shape} vs predictions {p.shape}")
    if a.size == 0:
        raise ValueError("empty input")
    return a, p


def rmse(actuals, predictions) -> float:
    """Root mean squared error over all samples and output coordinates."""
    a, p = _pair_arrays(actuals, predictions)
    return float(np.sqrt(np.mean((a - p) ** 2)))


def ndei(actuals, predictions) -> float:
    """RMSE divided by the population standard deviation of the actuals."""
    a, p = _pair_arrays(actuals, predictions)
    if a.size < 2:
        raise ValueError("NDEI needs at least two values")
    sd = float(np.std(a))
    if sd == 0.0:
        raise DegenerateSeriesError("actual values are constant")
    return rmse(a, p) / sd


@dataclass
class ExperimentReport:
    algorithm: str
    problem: str
    rmse: float
    ndei: float
    final_rule_count: int
    actuals: list = field(default_factory=list)
    predictions: list = field(default_factory=list)
    origin_index: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_predictions(cls, algorithm, problem, actuals, predictions, final_rule_count,
                         origin_index=None, **extra) -> ExperimentReport:
        a = np.atleast_2d(np.asarray(actuals, dtype=float))
        p = np.atleast_2d(np.asarray(predictions, dtype=float))
        return cls(
            algorithm, problem, rmse(a, p), ndei(a, p), int(final_rule_count),
            a.tolist(), p.tolist(),
            list(range(len(a))) if origin_index is None else [int(i) for i in origin_index],
            extra,
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def write(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def read(cls, path) -> ExperimentReport:
        return cls(**json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class RankTable:
    ranks: np.ndarray  # problems x algorithms
    algorithms: tuple[str, ...] = ()
    problems: tuple[str, ...] = ()

    @property
    def average_ranks(self) -> np.ndarray:
        return self.ranks.mean(axis=0)

    @property
    def rank_sums(self) -> np.ndarray:
        return self.ranks.sum(axis=0)

    @property
    def n_problems(self) -> int:
        return self.ranks.shape[0]

    @property
    def n_algorithms(self) -> int:
        return self.ranks.shape[1]


@dataclass(frozen=True)
class FriedmanOutcome:
    q: float
    df: int
    critical_values: dict
    reject_null: dict
    exact: bool


def rank_problems(scores, lower_is_better: bool = True, algorithms=(), problems=()) -> RankTable:
    """Rank algorithms within each problem row (1 = best, ties averaged)."""
    s = np.asarray(scores, dtype=float)
    if s.ndim != 2 or s.size == 0:
        raise IncompleteMatrixError("scores must be a non-empty problems x algorithms matrix")
    if not np.all(np.isfinite(s)):
        raise IncompleteMatrixError("score matrix has missing cells")
    ranks = sps.rankdata(s if lower_is_better else -s, axis=1, method="average")
    return RankTable(ranks, tuple(algorithms), tuple(problems))


def friedman(table: RankTable, critical_values: dict | None = None) -> FriedmanOutcome:
    """Friedman Q from rank sums, compared to critical values per alpha.

    Without explicit ``critical_values`` the exact table is used when it has
    an entry for this (k, N); otherwise the chi-square approximation with
    ``k - 1`` degrees of freedom at alpha 0.05 and 0.01.
    """
    n, k = table.ranks.shape
    if n < 2:
        raise ValueError(f"Friedman test needs N >= 2 problems, got {n}")
    if k < 2:
        raise ValueError(f"Friedman test needs k >= 2 algorithms, got {k}")
    R = table.rank_sums
    q = 12.0 / (n * k * (k + 1)) * float(np.sum(R**2)) - 3.0 * n * (k + 1)
    if abs(q) < 1e-9:
        q = 0.0  # cancellation residue on fully tied rows
    exact = False
    if critical_values is None:
        if (k, n) in EXACT_FRIEDMAN_CRITICAL:
            critical_values = dict(EXACT_FRIEDMAN_CRITICAL[(k, n)])
            exact = True
        else:
            critical_values = {a: float(sps.chi2.ppf(1.0 - a, k - 1)) for a in (0.05, 0.01)}
    else:
        exact = True
    reject = {a: bool(q > c) for a, c in critical_values.items()}
    return FriedmanOutcome(q, k - 1, dict(critical_values), reject, exact)


def bonferroni_dunn_q(k: int, alpha: float) -> float:
    """Two-sided normal quantile at ``alpha / (k - 1)``."""
    if alpha not in SUPPORTED_CD_ALPHAS:
        raise ValueError(f"unsupported alpha {alpha}; choose from {SUPPORTED_CD_ALPHAS}")
    if k < 2:
        raise ValueError("need k >= 2")
    return NormalDist().inv_cdf(1.0 - alpha / (2.0 * (k - 1)))


def bonferroni_dunn_cd(k: int, n: int, alpha: float = 0.05) -> float:
    """Critical difference of average ranks against a control algorithm."""
    if n < 1:
        raise ValueError("need n >= 1")
    return bonferroni_dunn_q(k, alpha) * float(np.sqrt(k * (k + 1) / (6.0 * n)))


def rank_differences(table: RankTable) -> dict[str, float]:
    """Average-rank gap of every algorithm to the best-ranked one."""
    avg = table.average_ranks
    best = int(np.argmin(avg))
    names = table.algorithms or tuple(str(i) for i in range(len(avg)))
    return {names[j]: float(avg[j] - avg[best]) for j in range(len(avg)) if j != best}
