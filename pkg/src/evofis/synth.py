"""Deterministic synthetic series used as stand-ins for unpublished datasets.

None of these series are the building-energy or PV measurements the
benchmark problems were originally defined on; they only share the
sampling shape (daily and weekly cycles, a temperature covariate).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .timeseries import RawSeries

KINDS = ("sine", "two-cluster", "drift", "daily-profile")
# mean of each drift regime, cycled every length // 4 samples
DRIFT_LEVELS = (0.2, 0.8, 0.5, 0.35)


def synth_series(kind: str, length: int, noise: float = 0.0, seed: int = 0,
                 period: int = 24, covariate: bool = False) -> tuple[RawSeries, dict]:
    """Generate a series and a metadata dict describing how it was built.

    ``period`` is the daily cycle length in samples (24 for hourly data, 288
    for 5-minute data); the weekly cycle of ``daily-profile`` is ``7 * period``.
    ``covariate`` adds a ``temperature`` column tracking the daily term with
    a one-sample lead; it is only available for ``daily-profile``.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; choose from {', '.join(KINDS)}")
    if length < 2:
        raise ValueError("length must be at least 2")
    if covariate and kind != "daily-profile":
        raise ValueError("a temperature covariate is only generated for daily-profile")
    rng = np.random.default_rng(seed)
    t = np.arange(length, dtype=float)
    meta = {"kind": kind, "length": length, "noise": noise, "seed": seed, "period": period}
    exo = {}

    if kind == "sine":
        x = 0.5 + 0.4 * np.sin(2 * np.pi * t / period)
    elif kind == "two-cluster":
        block = max(period, 2)
        regime = (np.arange(length) // block) % 2
        x = np.where(regime == 0, 0.2, 0.8) + 0.02 * np.sin(2 * np.pi * t / 5)
        meta["block"] = block
    elif kind == "drift":
        every = max(length // 4, 1)
        block = np.arange(length) // every
        levels = np.array(DRIFT_LEVELS)[block % len(DRIFT_LEVELS)]
        x = levels + 0.05 * np.sin(2 * np.pi * t / period)
        meta["shift_points"] = list(range(every, length, every))
        meta["levels"] = [float(levels[i]) for i in range(0, length, every)]
    else:
        daily = np.sin(2 * np.pi * t / period - np.pi / 2)
        weekly = np.sin(2 * np.pi * t / (7 * period))
        x = 100.0 + 30.0 * daily + 10.0 * weekly
        if covariate:
            lead = np.sin(2 * np.pi * (t + 1) / period - np.pi / 2)
            exo["temperature"] = 28.0 + 3.0 * lead + noise * rng.standard_normal(length)
            meta["covariate"] = "temperature"
    if noise:
        x = x + noise * rng.standard_normal(length)
    series = RawSeries(x, name=f"synthetic-{kind}", exogenous=exo)
    return series, meta


def write_series_csv(path, series: RawSeries, meta: dict | None = None) -> Path:
    """Write ``t,load[,exogenous...]``; metadata, if given, goes to ``<path>.meta.json``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(series.exogenous)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "load", *names])
        for i, x in enumerate(series.values):
            w.writerow([i, repr(float(x)), *(repr(float(series.exogenous[n][i])) for n in names)])
    if meta is not None:
        meta_path = path.with_name(path.name + ".meta.json")
        meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
