"""Evolving Takagi-Sugeno (eTS) learner.

Rule centers are picked by a recursively computed Cauchy potential in the
joint input-output space.  A sample whose potential beats every existing
center becomes a new center, or replaces the nearest one if it lies within
``radius`` of it.  Consequents are then refined by global RLS or local
weighted RLS.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fuzzy
from .fuzzy import FisModel, FuzzyRule, fire, infer
from .learner import OnlineLearner, StepResult

UPDATE_MODES = ("local", "global")


@dataclass
class EtsConfig:
    radius: float = 0.3
    update_mode: str = "local"
    omega: float = fuzzy.DEFAULT_OMEGA
    forgetting: float = 1.0
    # relative margin below which two potentials count as equal
    tie_tolerance: float = 1e-10

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.update_mode not in UPDATE_MODES:
            raise ValueError(f"update_mode must be one of {UPDATE_MODES}")
        if not 0 < self.forgetting <= 1:
            raise ValueError("forgetting factor must lie in (0, 1]")


@dataclass
class EtsState:
    model: FisModel
    config: EtsConfig
    k: int
    beta: np.ndarray
    sigma: float
    centers_z: list[np.ndarray] = field(default_factory=list)
    center_potentials: list[float] = field(default_factory=list)

    @property
    def radius(self) -> float:
        return self.config.radius

    def to_dict(self) -> dict:
        out = self.model.to_dict()
        out.update(
            k=self.k,
            beta=self.beta.tolist(),
            sigma=self.sigma,
            centers_z=[c.tolist() for c in self.centers_z],
            center_potentials=list(self.center_potentials),
            radius=self.config.radius,
            update_mode=self.config.update_mode,
            omega=self.config.omega,
            forgetting=self.config.forgetting,
        )
        return out

    @classmethod
    def from_dict(cls, data: dict) -> EtsState:
        cfg = EtsConfig(
            radius=data["radius"],
            update_mode=data["update_mode"],
            omega=data["omega"],
            forgetting=data["forgetting"],
        )
        return cls(
            FisModel.from_dict(data),
            cfg,
            int(data["k"]),
            np.array(data["beta"], dtype=float),
            float(data["sigma"]),
            [np.array(c, dtype=float) for c in data["centers_z"]],
            [float(p) for p in data["center_potentials"]],
        )


@dataclass(frozen=True)
class PotentialDecision:
    sample_potential: float
    action: str  # "update-only" | "add-rule" | "replace-rule"
    index: int | None = None


def joint(pair) -> np.ndarray:
    return np.concatenate([np.ravel(pair.u), np.ravel(pair.v)]).astype(float)


def _new_rule(u, v_or_consequent, cfg: EtsConfig, input_dim: int, output_dim: int) -> FuzzyRule:
    cons = np.asarray(v_or_consequent, dtype=float)
    if cons.ndim < 2:
        c = np.zeros((output_dim, input_dim + 1))
        c[:, 0] = cons
        cons = c
    cov = cfg.omega * np.eye(input_dim + 1) if cfg.update_mode == "local" else None
    return FuzzyRule(u, cfg.radius / np.sqrt(2.0), cons, cov)


def ets_init(first_pair, cfg: EtsConfig | None = None) -> EtsState:
    """Seed the rule base with the first sample as the only cluster focus."""
    cfg = cfg or EtsConfig()
    u = np.asarray(first_pair.u, dtype=float).ravel()
    v = np.asarray(first_pair.v, dtype=float).ravel()
    model = FisModel(u.size, v.size)
    model.add_rule(_new_rule(u, v, cfg, u.size, v.size))
    if cfg.update_mode == "global":
        fuzzy.init_global_covariance(model, cfg.omega)
    z = joint(first_pair)
    return EtsState(model, cfg, 1, z.copy(), float(z @ z), [z], [1.0])


def sample_potential(state: EtsState, z) -> float:
    """Cauchy potential of ``z`` w.r.t. all samples seen so far.

    Equivalent to ``1 / (1 + mean squared distance to past samples)`` but
    computed from the running sums only.  Does not modify ``state``.
    """
    z = np.asarray(z, dtype=float)
    n = state.k
    if n == 0:
        return 1.0
    theta = z @ z
    nu = z @ state.beta
    return n / (n * (theta + 1.0) + state.sigma - 2.0 * nu)


def absorb(state: EtsState, z) -> None:
    z = np.asarray(z, dtype=float)
    state.beta = state.beta + z
    state.sigma += float(z @ z)
    state.k += 1


def refresh_center_potentials(state: EtsState, z) -> list[float]:
    """One-step potential recursion for every center, ``z`` being sample ``state.k``."""
    k = state.k
    z = np.asarray(z, dtype=float)
    out = []
    for c, p in zip(state.centers_z, state.center_potentials):
        d2 = float(np.sum((z - c) ** 2))
        out.append((k - 1) * p / ((k - 2) + p + p * d2))
    state.center_potentials = out
    return out


def _decide(state: EtsState, z, potential: float) -> PotentialDecision:
    best = max(state.center_potentials)
    if not potential > best * (1.0 + state.config.tie_tolerance):
        return PotentialDecision(potential, "update-only")
    dists = [float(np.linalg.norm(z - c)) for c in state.centers_z]
    nearest = int(np.argmin(dists))
    if dists[nearest] < state.config.radius:
        return PotentialDecision(potential, "replace-rule", nearest)
    return PotentialDecision(potential, "add-rule")


def _apply_structure(state: EtsState, decision: PotentialDecision, u, z) -> None:
    model, cfg = state.model, state.config
    if decision.action == "replace-rule":
        i = decision.index
        model.rules[i].center = np.array(u, dtype=float)
        state.centers_z[i] = z
        state.center_potentials[i] = decision.sample_potential
    elif decision.action == "add-rule":
        lam = fire(model, u).normalized
        cons = np.tensordot(lam, np.array([r.consequent for r in model.rules]), axes=1)
        model.add_rule(_new_rule(u, cons, cfg, model.input_dim, model.output_dim))
        if cfg.update_mode == "global":
            fuzzy.extend_global_covariance(model, cfg.omega)
        state.centers_z.append(z)
        state.center_potentials.append(decision.sample_potential)


def update_consequents(state: EtsState, u, v) -> None:
    model, cfg = state.model, state.config
    if cfg.update_mode == "global":
        fuzzy.rls_update_global(model, u, v, cfg.forgetting)
    else:
        lam = fire(model, u).normalized
        for w, rule in zip(lam, model.rules):
            fuzzy.rls_update_local(rule, w, u, v, cfg.forgetting)


def ets_step(state: EtsState, pair):
    """Predict, then learn from ``pair``.

    Returns ``(prediction, state, decision)``; ``state`` is updated in place.
    """
    u = np.asarray(pair.u, dtype=float).ravel()
    v = np.asarray(pair.v, dtype=float).ravel()
    prediction = infer(state.model, u)
    z = np.concatenate([u, v])
    potential = sample_potential(state, z)
    absorb(state, z)
    refresh_center_potentials(state, z)
    decision = _decide(state, z, potential)
    _apply_structure(state, decision, u, z)
    update_consequents(state, u, v)
    return prediction, state, decision


class ETS(OnlineLearner):
    name = "ets"

    def __init__(self, config: EtsConfig | None = None, **params):
        super().__init__()
        self.config = config or EtsConfig(**params)

    def step(self, pair) -> StepResult:
        if self.state is None:
            self.state = ets_init(pair, self.config)
            return StepResult(np.zeros(np.size(pair.v)), "init")
        prediction, _, decision = ets_step(self.state, pair)
        return StepResult(prediction, decision.action)

    def to_dict(self) -> dict:
        return {"algorithm": self.name, "state": None if self.state is None else self.state.to_dict()}
