"""Series ingestion, min-max normalization and regressor windowing.

A training event pairs an input window ``u = [p(t), ..., p(t-nu+1),
r(t), ..., r(t-mu+1)]`` with a direct multi-step target
``v = [p(t+1), ..., p(t+gamma)]``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    pass


class IngestionError(ValueError):
    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class DegenerateChannelError(ValueError):
    pass


class WindowError(ValueError):
    pass


class SplitError(ValueError):
    pass


@dataclass
class RawSeries:
    """Co-sampled measurements: one output channel plus optional exogenous ones."""

    values: np.ndarray
    name: str = "series"
    sample_interval: str | None = None
    exogenous: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.size == 0:
            raise IngestionError("series is empty")
        if not np.all(np.isfinite(self.values)):
            raise IngestionError("series contains missing or non-finite values")
        exo = {}
        for key, col in self.exogenous.items():
            col = np.asarray(col, dtype=float).ravel()
            if col.size != self.values.size:
                raise IngestionError(
                    f"exogenous series {key!r} has length {col.size}, expected {self.values.size}"
                )
            if not np.all(np.isfinite(col)):
                raise IngestionError(f"exogenous series {key!r} contains missing values")
            exo[key] = col
        self.exogenous = exo

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class CsvSchema:
    value: str
    time: str | None = None
    exogenous: tuple[str, ...] = ()

    @classmethod
    def from_dict(cls, data: dict) -> CsvSchema:
        return cls(
            value=data["value"],
            time=data.get("time"),
            exogenous=tuple(data.get("exogenous", ())),
        )


@dataclass(frozen=True)
class WindowConfig:
    nu: int = 4
    mu: int = 0
    gamma: int = 1
    train_fraction: float = 0.85

    def __post_init__(self):
        if int(self.nu) < 1:
            raise WindowError("nu must be at least 1")
        if int(self.gamma) < 1:
            raise WindowError("gamma must be at least 1")
        if int(self.mu) < 0:
            raise WindowError("mu must be non-negative")
        if not 0.0 < self.train_fraction <= 1.0:
            raise WindowError("train_fraction must lie in (0, 1]")


@dataclass(frozen=True)
class RegressorPair:
    u: np.ndarray
    v: np.ndarray
    origin_index: int


@dataclass(frozen=True)
class ChannelRange:
    min: float
    max: float

    @property
    def span(self) -> float:
        return self.max - self.min


@dataclass(frozen=True)
class NormalizationParams:
    """Min-max ranges for the output channel and each exogenous channel."""

    output: ChannelRange
    exogenous: dict[str, ChannelRange] = field(default_factory=dict)

    @property
    def min(self) -> float:
        return self.output.min

    @property
    def max(self) -> float:
        return self.output.max


def _parse_time(text: str):
    try:
        return float(text)
    except ValueError:
        return datetime.fromisoformat(text)


def ingest_csv(path, schema: CsvSchema, name: str | None = None,
               sample_interval: str | None = None) -> RawSeries:
    """Read a headed CSV into a :class:`RawSeries`.

    Rows are numbered from 1 for the first data row.  Missing or non-numeric
    cells and non-increasing timestamps are rejected, never repaired.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        wanted = [schema.value, *schema.exogenous] + ([schema.time] if schema.time else [])
        missing = [c for c in wanted if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
        values, exo = [], {c: [] for c in schema.exogenous}
        last_time = None
        for row_no, row in enumerate(reader, start=1):
            for col, sink in [(schema.value, values), *[(c, exo[c]) for c in schema.exogenous]]:
                cell = (row.get(col) or "").strip()
                try:
                    x = float(cell)
                except ValueError:
                    raise IngestionError(f"non-numeric value {cell!r} in column {col!r}", row_no) from None
                if not math.isfinite(x):
                    raise IngestionError(f"missing value {cell!r} in column {col!r}", row_no)
                sink.append(x)
            if schema.time:
                try:
                    stamp = _parse_time(row[schema.time].strip())
                except (ValueError, AttributeError):
                    raise IngestionError(f"unparseable timestamp {row[schema.time]!r}", row_no) from None
                if last_time is not None and not stamp > last_time:
                    raise IngestionError("timestamp out of order", row_no)
                last_time = stamp
    if not values:
        raise IngestionError(f"{path}: no data rows")
    return RawSeries(
        np.array(values),
        name=name or path.stem,
        sample_interval=sample_interval,
        exogenous={c: np.array(v) for c, v in exo.items()},
    )


def _channel_range(x: np.ndarray, label: str) -> ChannelRange:
    lo, hi = float(np.min(x)), float(np.max(x))
    if not hi > lo:
        raise DegenerateChannelError(f"channel {label!r} is constant over the training prefix")
    return ChannelRange(lo, hi)


def fit_normalizer(series: RawSeries, train_count: int) -> NormalizationParams:
    """Fit per-channel min/max on the first ``train_count`` samples only."""
    if not 1 <= train_count <= len(series):
        raise ValueError(f"train_count must lie in [1, {len(series)}], got {train_count}")
    return NormalizationParams(
        _channel_range(series.values[:train_count], series.name),
        {k: _channel_range(x[:train_count], k) for k, x in series.exogenous.items()},
    )


def _scale(x, rng: ChannelRange):
    return (np.asarray(x, dtype=float) - rng.min) / rng.span


def normalize(series: RawSeries, params: NormalizationParams) -> RawSeries:
    """Linear map to [0, 1] over the fitted range.  Out-of-range values are kept."""
    if set(series.exogenous) != set(params.exogenous):
        raise ValueError("normalization channels do not match the series")
    return RawSeries(
        _scale(series.values, params.output),
        name=series.name,
        sample_interval=series.sample_interval,
        exogenous={k: _scale(x, params.exogenous[k]) for k, x in series.exogenous.items()},
    )


def denormalize(value, params: NormalizationParams | ChannelRange) -> np.ndarray:
    rng = params.output if isinstance(params, NormalizationParams) else params
    return np.asarray(value, dtype=float) * rng.span + rng.min


def first_origin(cfg: WindowConfig) -> int:
    return max(cfg.nu, cfg.mu) - 1


def build_pairs(series: RawSeries, cfg: WindowConfig) -> list[RegressorPair]:
    """Slide the input/target window over the series in time order.

    With several exogenous channels, ``mu`` lags of each are appended in the
    channel order of ``series.exogenous``.
    """
    if cfg.mu > 0 and not series.exogenous:
        raise WindowError("mu > 0 requires at least one exogenous series")
    p = series.values
    t0 = first_origin(cfg)
    required = t0 + 1 + cfg.gamma
    if len(p) < required:
        raise WindowError(f"series has {len(p)} samples, at least {required} are required")
    exo = list(series.exogenous.values()) if cfg.mu > 0 else []
    pairs = []
    for t in range(t0, len(p) - cfg.gamma):
        parts = [p[t - cfg.nu + 1:t + 1][::-1]]
        parts += [r[t - cfg.mu + 1:t + 1][::-1] for r in exo]
        pairs.append(RegressorPair(np.concatenate(parts), p[t + 1:t + 1 + cfg.gamma].copy(), t))
    return pairs


def train_size(count: int, train_fraction: float) -> int:
    # tolerance guards products such as 0.7 * 10 = 6.999...
    return int(math.floor(train_fraction * count + 1e-9))


def split_stream(pairs, train_fraction: float):
    """Sequential split: the first ``floor(fraction * n)`` pairs train."""
    if not 0.0 < train_fraction < 1.0:
        raise SplitError(f"train_fraction must lie strictly between 0 and 1, got {train_fraction}")
    n_train = train_size(len(pairs), train_fraction)
    train, test = list(pairs[:n_train]), list(pairs[n_train:])
    if not train or not test:
        raise SplitError(
            f"split of {len(pairs)} pairs at {train_fraction} leaves an empty partition"
        )
    return train, test


def raw_train_count(cfg: WindowConfig, n_train_pairs: int) -> int:
    """Number of leading raw samples touched by the first ``n_train_pairs`` pairs."""
    return first_origin(cfg) + n_train_pairs + cfg.gamma
