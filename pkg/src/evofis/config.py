"""Experiment configuration files.

A config is a JSON document::

    {
      "problem": "F1",
      "data": {"path": "load.csv",
               "schema": {"value": "load", "time": "t", "exogenous": []}},
      "window": {"nu": 4, "mu": 0, "gamma": 1, "train_fraction": 0.85},
      "algorithms": [{"name": "ets", "params": {"radius": 0.3}},
                     {"name": "safis"}, {"name": "mcfis"}],
      "seed": 0,
      "units": "normalized",
      "output_dir": "runs/F1"
    }

Instead of ``path``/``schema`` the data block may hold
``{"synthetic": {"kind": ..., "length": ..., "noise": ..., "period": ...,
"covariate": ...}}``; the series is then generated in memory from ``seed``.
Relative paths are resolved against the config file's directory.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .experiment import LEARNERS
from .synth import synth_series
from .timeseries import CsvSchema, RawSeries, WindowConfig, WindowError, ingest_csv


class ConfigError(ValueError):
    def __init__(self, source, field_name, message):
        super().__init__(f"{source}: {field_name}: {message}")
        self.source = str(source)
        self.field = field_name


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    params: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    problem: str
    data: dict
    window: WindowConfig
    algorithms: list[AlgorithmSpec]
    seed: int = 0
    units: str = "normalized"
    output_dir: Path = Path("runs")
    source: Path | None = None
    raw: dict = field(default_factory=dict)

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def load_series(self) -> RawSeries:
        base = self.source.parent if self.source else Path.cwd()
        if "synthetic" in self.data:
            spec = dict(self.data["synthetic"])
            spec.setdefault("seed", self.seed)
            try:
                series, _ = synth_series(**spec)
            except (TypeError, ValueError) as exc:
                raise ConfigError(self.source, "data.synthetic", str(exc)) from exc
            return series
        path = base / self.data["path"]
        return ingest_csv(
            path,
            CsvSchema.from_dict(self.data.get("schema", {"value": "load"})),
            name=self.problem,
            sample_interval=self.data.get("sample_interval"),
        )


def _require(data, key, source, prefix=""):
    if key not in data:
        raise ConfigError(source, prefix + key, "missing")
    return data[key]


def parse_config(data: dict, source="<config>") -> ExperimentConfig:
    problem = str(data.get("problem", "problem"))
    data_block = _require(data, "data", source)
    if not isinstance(data_block, dict) or not ({"path", "synthetic"} & set(data_block)):
        raise ConfigError(source, "data", "needs either 'path' or 'synthetic'")
    if "path" in data_block:
        schema = data_block.get("schema", {"value": "load"})
        if "value" not in schema:
            raise ConfigError(source, "data.schema.value", "missing")
    w = _require(data, "window", source)
    try:
        window = WindowConfig(
            nu=int(w.get("nu", 4)),
            mu=int(w.get("mu", 0)),
            gamma=int(w.get("gamma", 1)),
            train_fraction=float(w.get("train_fraction", 0.85)),
        )
    except WindowError as exc:
        raise ConfigError(source, "window", str(exc)) from exc
    algos = _require(data, "algorithms", source)
    if not algos:
        raise ConfigError(source, "algorithms", "at least one algorithm is required")
    specs = []
    for i, a in enumerate(algos):
        a = {"name": a} if isinstance(a, str) else a
        name = str(_require(a, "name", source, f"algorithms[{i}].")).lower()
        if name not in LEARNERS:
            raise ConfigError(source, f"algorithms[{i}].name", f"unknown algorithm {name!r}")
        specs.append(AlgorithmSpec(name, dict(a.get("params", {}))))
    units = data.get("units", "normalized")
    if units not in ("normalized", "original"):
        raise ConfigError(source, "units", "must be 'normalized' or 'original'")
    return ExperimentConfig(
        problem=problem,
        data=data_block,
        window=window,
        algorithms=specs,
        seed=int(data.get("seed", 0)),
        units=units,
        output_dir=Path(data.get("output_dir", f"runs/{problem}")),
        source=Path(source) if source != "<config>" else None,
        raw=data,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(path, f"line {exc.lineno}", exc.msg) from exc
    return parse_config(data, path)


def preset_names() -> list[str]:
    files = resources.files("evofis") / "presets"
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> ExperimentConfig:
    res = resources.files("evofis") / "presets" / f"{name}.json"
    if not res.is_file():
        raise ConfigError(name, "preset", f"unknown preset; available: {', '.join(preset_names())}")
    return parse_config(json.loads(res.read_text(encoding="utf-8")), f"preset:{name}")
