"""Meta-cognitive neuro-fuzzy inference system (McFIS).

A controller inspects the prediction error and the spatial novelty of each
sample before the cognitive TS network sees it, and picks one of:

* delete  -- error already below ``e_delete``; the sample is discarded;
* grow    -- large error in a region no rule covers well; add a rule;
* update  -- error above ``e_learn``; EKF step on the most active rule;
* reserve -- moderately informative; queue it for replay after training.

During replay a sample that would be reserved again is used for an EKF
update instead, so reserved samples end up tuning the parameters.  Set
``replay_updates=False`` to keep such samples queued for the next pass.

``e_add`` and ``e_learn`` track the errors that triggered them by exponential
smoothing.  In the live stream those errors exceed the threshold, so the
learner grows and updates less as it matures.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import asdict, dataclass, field

import numpy as np

from . import fuzzy
from .fuzzy import FisModel, FuzzyRule, fire, infer
from .learner import OnlineLearner, StepResult
from .timeseries import RegressorPair

DECISIONS = ("delete", "grow", "update", "reserve")


@dataclass
class McfisConfig:
    e_delete: float = 0.01
    e_learn: float = 0.05
    e_add: float = 0.3
    novelty_threshold: float = 0.3
    delta: float = 0.98
    e_prune: float = 1e-3
    prune_window: int = 20
    kappa: float = 0.7
    max_reserve_passes: int = 3
    reserve_replay: bool = True
    replay_updates: bool = True
    obs_noise: float = 0.01
    p0: float = 1.0
    process_noise: float = 0.0
    consequent_only: bool = False
    width_floor: float = fuzzy.WIDTH_FLOOR

    def __post_init__(self):
        if not 0 < self.e_delete < self.e_learn <= self.e_add:
            raise ValueError("need 0 < e_delete < e_learn <= e_add")
        if not 0 < self.novelty_threshold < 1:
            raise ValueError("novelty_threshold must lie in (0, 1)")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.max_reserve_passes < 0 or self.prune_window < 1:
            raise ValueError("max_reserve_passes must be >= 0 and prune_window >= 1")


@dataclass
class McfisState:
    config: McfisConfig
    model: FisModel | None = None
    e_add: float = 0.0
    e_learn: float = 0.0
    reserve_queue: deque = field(default_factory=deque)
    low_firing_counts: list[int] = field(default_factory=list)
    counts: Counter = field(default_factory=Counter)

    def __post_init__(self):
        self.e_add = self.e_add or self.config.e_add
        self.e_learn = self.e_learn or self.config.e_learn

    @property
    def e_delete(self) -> float:
        return self.config.e_delete

    @property
    def presented(self) -> int:
        return sum(self.counts[k] for k in DECISIONS)

    @property
    def parameter_updates(self) -> int:
        return self.counts["update"]

    def to_dict(self) -> dict:
        out = {} if self.model is None else self.model.to_dict()
        out.update(
            e_add=self.e_add,
            e_learn=self.e_learn,
            config=asdict(self.config),
            reserve_queue=[
                {"u": p.u.tolist(), "v": p.v.tolist(), "origin_index": p.origin_index}
                for p in self.reserve_queue
            ],
            low_firing_counts=list(self.low_firing_counts),
            counts={k: self.counts[k] for k in (*DECISIONS, "prune")},
        )
        return out

    @classmethod
    def from_dict(cls, data: dict) -> McfisState:
        state = cls(
            McfisConfig(**data["config"]),
            FisModel.from_dict(data) if "rules" in data else None,
            float(data["e_add"]),
            float(data["e_learn"]),
            deque(
                RegressorPair(np.array(p["u"]), np.array(p["v"]), int(p["origin_index"]))
                for p in data["reserve_queue"]
            ),
            [int(c) for c in data["low_firing_counts"]],
            Counter(data["counts"]),
        )
        return state


@dataclass(frozen=True)
class MetaDecision:
    kind: str
    error: float
    novelty: float


def mcfis_init(cfg: McfisConfig | None = None) -> McfisState:
    return McfisState(cfg or McfisConfig())


def mcfis_decide(state: McfisState, pair, replay: bool = False) -> MetaDecision:
    """Classify a sample without touching the state."""
    model = state.model
    if model is None or model.n_rules == 0:
        return MetaDecision("grow", math.inf, 0.0)
    error = float(np.linalg.norm(np.ravel(pair.v) - infer(model, pair.u)))
    novelty = float(fire(model, pair.u).raw.max())
    if error < state.e_delete:
        kind = "delete"
    elif error > state.e_add and novelty < state.config.novelty_threshold:
        kind = "grow"
    elif error >= state.e_learn:
        kind = "update"
    else:
        kind = "update" if replay and state.config.replay_updates else "reserve"
    return MetaDecision(kind, error, novelty)


def _smooth(current: float, error: float, delta: float) -> float:
    return delta * current + (1.0 - delta) * error


def _grow(state: McfisState, u, v, error: float) -> None:
    cfg = state.config
    if state.model is None:
        state.model = FisModel(u.size, v.size)
    model = state.model
    if model.n_rules == 0:
        width = cfg.kappa
    else:
        dist = np.linalg.norm(np.array([r.center for r in model.rules]) - u, axis=1).min()
        width = max(cfg.kappa * dist, cfg.width_floor)
    cons = np.zeros((v.size, u.size + 1))
    cons[:, 0] = v
    p = fuzzy.ekf_parameter_count(u.size, v.size, cfg.consequent_only)
    model.add_rule(FuzzyRule(u, width, cons, cfg.p0 * np.eye(p)))
    state.low_firing_counts.append(0)
    if math.isfinite(error):
        state.e_add = max(_smooth(state.e_add, error, cfg.delta), state.e_learn)


def _update(state: McfisState, u, v, error: float) -> None:
    cfg = state.config
    target = int(np.argmax(fire(state.model, u).raw))
    fuzzy.ekf_update_nearest(
        state.model, target, u, v,
        obs_noise=cfg.obs_noise,
        process_noise=cfg.process_noise,
        consequent_only=cfg.consequent_only,
        width_floor=cfg.width_floor,
    )
    e_learn = min(_smooth(state.e_learn, error, cfg.delta), state.e_add)
    if e_learn > cfg.e_delete:
        state.e_learn = e_learn


def _prune(state: McfisState, u) -> int | None:
    cfg = state.config
    lam = fire(state.model, u).normalized
    counts = [c + 1 if x < cfg.e_prune else 0 for c, x in zip(state.low_firing_counts, lam)]
    state.low_firing_counts = counts
    due = [i for i, c in enumerate(counts) if c >= cfg.prune_window]
    if not due or state.model.n_rules <= 1:
        return None
    victim = min(due, key=lambda i: lam[i])
    state.model.remove_rule(victim)
    del state.low_firing_counts[victim]
    state.counts["prune"] += 1
    return victim


def mcfis_step(state: McfisState, pair, replay: bool = False):
    """Predict, decide, act.  Returns ``(prediction, state, decision)``."""
    u = np.asarray(pair.u, dtype=float).ravel()
    v = np.asarray(pair.v, dtype=float).ravel()
    if state.model is None or state.model.n_rules == 0:
        prediction = np.zeros(v.size)
    else:
        prediction = infer(state.model, u)
    decision = mcfis_decide(state, pair, replay)
    state.counts[decision.kind] += 1
    if decision.kind == "grow":
        _grow(state, u, v, decision.error)
    elif decision.kind == "update":
        _update(state, u, v, decision.error)
    elif decision.kind == "reserve":
        state.reserve_queue.append(pair)
    if decision.kind in ("grow", "update"):
        _prune(state, u)
    return prediction, state, decision


def drain_reserve(state: McfisState) -> McfisState:
    """Replay reserved samples after the training stream.

    Stops after ``max_reserve_passes`` passes, when the queue is empty, or
    when a whole pass produced nothing but deletions.
    """
    passes = 0
    while state.reserve_queue and passes < state.config.max_reserve_passes:
        batch = list(state.reserve_queue)
        state.reserve_queue.clear()
        only_deletes = True
        for pair in batch:
            _, _, decision = mcfis_step(state, pair, replay=True)
            only_deletes &= decision.kind == "delete"
        passes += 1
        if only_deletes:
            break
    return state


class McFIS(OnlineLearner):
    name = "mcfis"

    def __init__(self, config: McfisConfig | None = None, **params):
        super().__init__()
        self.config = config or McfisConfig(**params)
        self.state = mcfis_init(self.config)

    def step(self, pair) -> StepResult:
        prediction, _, decision = mcfis_step(self.state, pair)
        return StepResult(prediction, decision.kind)

    def finish_training(self) -> None:
        if self.config.reserve_replay:
            drain_reserve(self.state)

    def to_dict(self) -> dict:
        return {"algorithm": self.name, "state": self.state.to_dict()}
