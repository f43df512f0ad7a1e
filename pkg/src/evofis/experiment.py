"""Train/test orchestration for one learner on one windowed series."""

from __future__ import annotations

import numpy as np

from .ets import ETS
from .learner import OnlineLearner
from .mcfis import McFIS
from .safis import SAFIS
from .stats import ExperimentReport
from .timeseries import (
    RawSeries,
    WindowConfig,
    build_pairs,
    denormalize,
    fit_normalizer,
    normalize,
    raw_train_count,
    split_stream,
    train_size,
)

LEARNERS = {"ets": ETS, "safis": SAFIS, "mcfis": McFIS}
DISPLAY_NAMES = {"ets": "eTS", "safis": "SAFIS", "mcfis": "McFIS"}


def make_learner(name: str, **params) -> OnlineLearner:
    try:
        cls = LEARNERS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(LEARNERS)}") from None
    return cls(**params)


def prepare(series: RawSeries, window: WindowConfig):
    """Normalize on the training prefix and return ``(train, test, params)``."""
    if window.mu == 0 and series.exogenous:
        series = RawSeries(series.values, series.name, series.sample_interval)
    n_pairs = len(series) - max(window.nu, window.mu) + 1 - window.gamma
    n_train = train_size(max(n_pairs, 0), window.train_fraction)
    count = min(max(raw_train_count(window, n_train), 1), len(series))
    params = fit_normalizer(series, count)
    pairs = build_pairs(normalize(series, params), window)
    train, test = split_stream(pairs, window.train_fraction)
    return train, test, params


def stream(learner: OnlineLearner, train, test, freeze: bool = False):
    """Sequential training, then predict-then-learn over the test pairs."""
    for pair in train:
        learner.step(pair)
    learner.finish_training()
    actual, predicted = [], []
    for pair in test:
        if freeze:
            y = learner.predict(pair.u)
        else:
            y = learner.step(pair).prediction
        actual.append(pair.v)
        predicted.append(y)
    return np.array(actual), np.array(predicted)


def run_experiment(series: RawSeries, window: WindowConfig, algorithm: str, params=None,
                   problem: str = "", freeze: bool = False, units: str = "normalized") -> ExperimentReport:
    train, test, norm = prepare(series, window)
    learner = make_learner(algorithm, **(params or {}))
    actual, predicted = stream(learner, train, test, freeze)
    if units == "original":
        actual, predicted = denormalize(actual, norm), denormalize(predicted, norm)
    elif units != "normalized":
        raise ValueError("units must be 'normalized' or 'original'")
    return ExperimentReport.from_predictions(
        DISPLAY_NAMES.get(algorithm.lower(), algorithm),
        problem,
        actual,
        predicted,
        learner.n_rules,
        origin_index=[p.origin_index for p in test],
        n_train=len(train),
        n_test=len(test),
        units=units,
        window={"nu": window.nu, "mu": window.mu, "gamma": window.gamma,
                "train_fraction": window.train_fraction},
        params=dict(params or {}),
        frozen=freeze,
    )
