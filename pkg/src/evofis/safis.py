"""Sequential adaptive fuzzy inference system (SAFIS).

A sample far from every rule (beyond a decaying distance threshold) whose
hypothetical rule would carry enough influence becomes a new rule.  Otherwise
only the nearest rule is refined by an EKF step.  Rules whose influence stays
below ``e_prune`` for ``prune_window`` consecutive samples are removed, at
most one per step.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import fuzzy
from .fuzzy import FisModel, FuzzyRule, fire, infer, rule_outputs
from .learner import OnlineLearner, StepResult


@dataclass
class SafisConfig:
    epsilon_max: float = 0.5
    epsilon_min: float = 0.1
    decay: float = 0.997
    e_grow: float = 0.05
    e_prune: float = 0.01
    kappa: float = 2.0
    prune_window: int = 10
    obs_noise: float = 0.01
    p0: float = 1.0
    process_noise: float = 0.0
    consequent_only: bool = False
    width_floor: float = fuzzy.WIDTH_FLOOR

    def __post_init__(self):
        if not 0 < self.epsilon_min <= self.epsilon_max:
            raise ValueError("need 0 < epsilon_min <= epsilon_max")
        if not 0 < self.decay < 1:
            raise ValueError("decay must lie in (0, 1)")
        if self.kappa <= 0 or self.prune_window < 1:
            raise ValueError("kappa must be positive and prune_window at least 1")


@dataclass
class SafisState:
    model: FisModel
    config: SafisConfig
    step: int = 1
    low_influence_counts: list[int] = field(default_factory=list)

    @property
    def distance_threshold(self) -> float:
        cfg = self.config
        return max(cfg.epsilon_max * cfg.decay ** (self.step - 1), cfg.epsilon_min)

    def to_dict(self) -> dict:
        out = self.model.to_dict()
        out.update(
            step=self.step,
            distance_threshold=self.distance_threshold,
            low_influence_counts=list(self.low_influence_counts),
            config=asdict(self.config),
        )
        return out

    @classmethod
    def from_dict(cls, data: dict) -> SafisState:
        return cls(
            FisModel.from_dict(data),
            SafisConfig(**data["config"]),
            int(data["step"]),
            [int(c) for c in data["low_influence_counts"]],
        )


@dataclass(frozen=True)
class SafisAction:
    kind: str  # "grow" | "update"
    pruned: int | None = None

    def __str__(self):
        return self.kind if self.pruned is None else f"{self.kind}+prune({self.pruned})"


def _make_rule(u, v, width, cfg: SafisConfig) -> FuzzyRule:
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    cons = np.zeros((v.size, u.size + 1))
    cons[:, 0] = v
    p = fuzzy.ekf_parameter_count(u.size, v.size, cfg.consequent_only)
    return FuzzyRule(u, width, cons, cfg.p0 * np.eye(p))


def safis_init(first_pair, cfg: SafisConfig | None = None) -> SafisState:
    cfg = cfg or SafisConfig()
    u = np.asarray(first_pair.u, dtype=float).ravel()
    v = np.asarray(first_pair.v, dtype=float).ravel()
    model = FisModel(u.size, v.size)
    model.add_rule(_make_rule(u, v, cfg.kappa * 1.0, cfg))
    return SafisState(model, cfg, 1, [0])


def influence(model: FisModel, u) -> np.ndarray:
    """Per-rule influence ``|a_i| * R_i / sum_j R_j`` at ``u``."""
    lam = fire(model, u).normalized
    return np.linalg.norm(rule_outputs(model, u), axis=1) * lam


def candidate_influence(model: FisModel, u, error) -> float:
    """Influence a new rule centered at ``u`` with output magnitude ``|error|`` would have."""
    raw = fire(model, u).raw
    return float(np.linalg.norm(error)) / (raw.sum() + 1.0)


def _nearest(model: FisModel, u) -> tuple[int, float]:
    d = np.linalg.norm(np.array([r.center for r in model.rules]) - u, axis=1)
    i = int(np.argmin(d))
    return i, float(d[i])


def _prune(state: SafisState, u) -> int | None:
    cfg = state.config
    infl = influence(state.model, u)
    counts = [c + 1 if x < cfg.e_prune else 0 for c, x in zip(state.low_influence_counts, infl)]
    state.low_influence_counts = counts
    due = [i for i, c in enumerate(counts) if c >= cfg.prune_window]
    if not due or state.model.n_rules <= 1:
        return None
    victim = min(due, key=lambda i: infl[i])
    state.model.remove_rule(victim)
    del state.low_influence_counts[victim]
    return victim


def safis_step(state: SafisState, pair):
    """Predict, then grow or EKF-update, then prune.  Updates ``state`` in place."""
    cfg = state.config
    model = state.model
    u = np.asarray(pair.u, dtype=float).ravel()
    v = np.asarray(pair.v, dtype=float).ravel()
    prediction = infer(model, u)
    error = v - prediction
    state.step += 1
    nearest, d_nr = _nearest(model, u)
    if d_nr > state.distance_threshold and candidate_influence(model, u, error) > cfg.e_grow:
        model.add_rule(_make_rule(u, v, cfg.kappa * d_nr, cfg))
        state.low_influence_counts.append(0)
        kind = "grow"
    else:
        fuzzy.ekf_update_nearest(
            model, nearest, u, v,
            obs_noise=cfg.obs_noise,
            process_noise=cfg.process_noise,
            consequent_only=cfg.consequent_only,
            width_floor=cfg.width_floor,
        )
        kind = "update"
    pruned = _prune(state, u)
    return prediction, state, SafisAction(kind, pruned)


class SAFIS(OnlineLearner):
    name = "safis"

    def __init__(self, config: SafisConfig | None = None, **params):
        super().__init__()
        self.config = config or SafisConfig(**params)

    def step(self, pair) -> StepResult:
        if self.state is None:
            self.state = safis_init(pair, self.config)
            return StepResult(np.zeros(np.size(pair.v)), "init")
        prediction, _, action = safis_step(self.state, pair)
        return StepResult(prediction, str(action))

    def to_dict(self) -> dict:
        return {"algorithm": self.name, "state": None if self.state is None else self.state.to_dict()}
