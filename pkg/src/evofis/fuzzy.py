"""First-order Takagi-Sugeno machinery shared by the evolving learners.

A model is an ordered list of Gaussian rules with affine consequents. The
output is the normalized-firing weighted sum of the rule outputs.  Three
parameter estimators are provided:

* ``rls_update_global``: one RLS step on the stacked, firing-weighted regressor
  of all rules (eTS global mode);
* ``rls_update_local``: a firing-weighted RLS step on a single rule (eTS local
  mode);
* ``ekf_update_nearest``: an extended Kalman filter step on one rule's
  consequent and, optionally, its antecedent (SAFIS / McFIS).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

WIDTH_FLOOR = 1e-3
DEFAULT_OMEGA = 1000.0


class UninitializedModelError(RuntimeError):
    """Raised when inference is attempted on an empty rule base."""


class NumericalError(FloatingPointError):
    pass


@dataclass
class FuzzyRule:
    """One Takagi-Sugeno rule.

    Parameters
    ----------
    center : ndarray, shape (d,)
        Gaussian antecedent center.
    width : ndarray, shape (d,)
        Gaussian spread per input dimension, strictly positive.
    consequent : ndarray, shape (m, d + 1)
        Affine consequent; column 0 is the bias.
    covariance : ndarray or None
        Per-rule estimator covariance (local wRLS or EKF), if any.
    """

    center: np.ndarray
    width: np.ndarray
    consequent: np.ndarray
    covariance: np.ndarray | None = None

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float).ravel()
        d = self.center.size
        width = np.asarray(self.width, dtype=float)
        self.width = np.full(d, float(width)) if width.ndim == 0 else width.ravel().copy()
        self.consequent = np.atleast_2d(np.asarray(self.consequent, dtype=float)).copy()
        if self.width.size != d:
            raise ValueError(f"width has {self.width.size} entries, center has {d}")
        if np.any(self.width <= 0):
            raise ValueError("rule widths must be positive")
        if self.consequent.shape[1] != d + 1:
            raise ValueError(
                f"consequent must have {d + 1} columns, got {self.consequent.shape[1]}"
            )
        if self.covariance is not None:
            self.covariance = np.asarray(self.covariance, dtype=float).copy()

    @property
    def input_dim(self) -> int:
        return self.center.size

    @property
    def output_dim(self) -> int:
        return self.consequent.shape[0]

    def output(self, u) -> np.ndarray:
        """Affine consequent output ``C @ [1; u]``."""
        return self.consequent @ extended_input(u)

    def copy(self) -> FuzzyRule:
        return FuzzyRule(
            self.center.copy(),
            self.width.copy(),
            self.consequent.copy(),
            None if self.covariance is None else self.covariance.copy(),
        )


@dataclass
class FisModel:
    """Ordered rule base with fixed input and output dimensions."""

    input_dim: int
    output_dim: int
    rules: list[FuzzyRule] = field(default_factory=list)
    global_covariance: np.ndarray | None = None

    def __len__(self):
        return len(self.rules)

    @property
    def n_rules(self) -> int:
        return len(self.rules)

    def add_rule(self, rule: FuzzyRule) -> None:
        if rule.input_dim != self.input_dim or rule.output_dim != self.output_dim:
            raise ValueError(
                f"rule dimensions ({rule.input_dim}, {rule.output_dim}) do not match "
                f"model ({self.input_dim}, {self.output_dim})"
            )
        self.rules.append(rule)

    def remove_rule(self, index: int) -> FuzzyRule:
        return self.rules.pop(index)

    def copy(self) -> FisModel:
        return FisModel(
            self.input_dim,
            self.output_dim,
            [r.copy() for r in self.rules],
            None if self.global_covariance is None else self.global_covariance.copy(),
        )

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        out = {
            "input_dim": self.input_dim,
            "output_dim": self.output_dim,
            "rules": [],
        }
        for r in self.rules:
            entry = {
                "center": r.center.tolist(),
                "width": r.width.tolist(),
                "consequent": r.consequent.tolist(),
            }
            if r.covariance is not None:
                entry["covariance"] = r.covariance.tolist()
            out["rules"].append(entry)
        if self.global_covariance is not None:
            out["global_covariance"] = self.global_covariance.tolist()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> FisModel:
        model = cls(int(data["input_dim"]), int(data["output_dim"]))
        for entry in data["rules"]:
            model.add_rule(
                FuzzyRule(
                    np.array(entry["center"], dtype=float),
                    np.array(entry["width"], dtype=float),
                    np.array(entry["consequent"], dtype=float),
                    None if "covariance" not in entry else np.array(entry["covariance"], dtype=float),
                )
            )
        if "global_covariance" in data:
            model.global_covariance = np.array(data["global_covariance"], dtype=float)
        return model

    def to_json(self) -> str:
        # float repr is the shortest string that round-trips, so this is bit-exact
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> FisModel:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class FiringVector:
    raw: np.ndarray
    normalized: np.ndarray

    @property
    def log_raw(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.raw)


def extended_input(u) -> np.ndarray:
    u = np.asarray(u, dtype=float).ravel()
    return np.concatenate(([1.0], u))


def _check_input(model: FisModel, u) -> np.ndarray:
    u = np.asarray(u, dtype=float).ravel()
    if u.size != model.input_dim:
        raise ValueError(f"input has length {u.size}, model expects {model.input_dim}")
    if not model.rules:
        raise UninitializedModelError("the rule base is empty")
    return u


def _log_firing(model: FisModel, u: np.ndarray) -> np.ndarray:
    centers = np.array([r.center for r in model.rules])
    widths = np.array([r.width for r in model.rules])
    return -np.sum((u - centers) ** 2 / (2.0 * widths**2), axis=1)


def fire(model: FisModel, u) -> FiringVector:
    """Gaussian rule activations at ``u``.

    Normalization is done in log space so that the normalized vector stays
    finite even when every raw activation underflows.
    """
    u = _check_input(model, u)
    log_raw = _log_firing(model, u)
    shifted = np.exp(log_raw - log_raw.max())
    return FiringVector(np.exp(log_raw), shifted / shifted.sum())


def rule_outputs(model: FisModel, u) -> np.ndarray:
    """Per-rule affine outputs, shape (R, m)."""
    x = extended_input(u)
    return np.array([r.consequent @ x for r in model.rules])


def infer(model: FisModel, u) -> np.ndarray:
    """Model output: convex combination of the rule outputs."""
    u = _check_input(model, u)
    lam = fire(model, u).normalized
    return lam @ rule_outputs(model, u)


def _symmetrize(P: np.ndarray) -> np.ndarray:
    return 0.5 * (P + P.T)


# -- least squares -----------------------------------------------------

def stacked_regressor(model: FisModel, u) -> np.ndarray:
    lam = fire(model, u).normalized
    x = extended_input(u)
    return np.concatenate([w * x for w in lam])


def stacked_consequents(model: FisModel) -> np.ndarray:
    """All consequents stacked into a (R*(d+1), m) parameter matrix."""
    return np.vstack([r.consequent.T for r in model.rules])


def _unstack_consequents(model: FisModel, theta: np.ndarray) -> None:
    n = model.input_dim + 1
    for i, r in enumerate(model.rules):
        r.consequent = theta[i * n:(i + 1) * n].T.copy()


def init_global_covariance(model: FisModel, omega: float = DEFAULT_OMEGA) -> None:
    model.global_covariance = omega * np.eye(model.n_rules * (model.input_dim + 1))


def extend_global_covariance(model: FisModel, omega: float = DEFAULT_OMEGA) -> None:
    """Grow the stacked covariance after a rule was appended.

    The new block starts at ``omega * I``; cross terms with older rules are 0.
    """
    n = model.input_dim + 1
    P_old = model.global_covariance
    size = model.n_rules * n
    P = omega * np.eye(size)
    if P_old is not None:
        k = P_old.shape[0]
        P[:k, :k] = P_old
    model.global_covariance = P


def _rls_core(P, theta, x, y, weight, forgetting):
    Px = P @ x
    denom = forgetting + weight * (x @ Px)
    gain = weight * Px / denom
    innovation = y - x @ theta
    theta = theta + np.outer(gain, innovation)
    P = (P - np.outer(gain, Px)) / forgetting
    return _symmetrize(P), theta


def rls_update_global(model: FisModel, u, v, forgetting: float = 1.0) -> FisModel:
    """One global RLS step on the stacked firing-weighted regressor.

    The covariance is shared by all output coordinates since the regressor is
    the same for each of them.  The model is updated in place and returned.
    """
    v = np.asarray(v, dtype=float).ravel()
    if v.size != model.output_dim:
        raise ValueError(f"target has length {v.size}, model expects {model.output_dim}")
    x = stacked_regressor(model, u)
    if model.global_covariance is None or model.global_covariance.shape[0] != x.size:
        raise ValueError("global covariance missing or inconsistent with rule count")
    P, theta = _rls_core(model.global_covariance, stacked_consequents(model), x, v, 1.0, forgetting)
    model.global_covariance = P
    _unstack_consequents(model, theta)
    return model


def rls_update_local(rule: FuzzyRule, weight: float, u, v, forgetting: float = 1.0) -> FuzzyRule:
    """Weighted RLS step on one rule, observation weight = its firing."""
    v = np.asarray(v, dtype=float).ravel()
    x = extended_input(u)
    if x.size != rule.input_dim + 1 or v.size != rule.output_dim:
        raise ValueError("sample dimensions do not match the rule")
    if rule.covariance is None:
        raise ValueError("rule has no estimator covariance")
    P, theta = _rls_core(rule.covariance, rule.consequent.T, x, v, float(weight), forgetting)
    rule.covariance = P
    rule.consequent = theta.T.copy()
    return rule


# -- extended Kalman filter --------------------------------------------

def ekf_parameter_count(input_dim: int, output_dim: int, consequent_only: bool = False) -> int:
    n = output_dim * (input_dim + 1)
    return n if consequent_only else n + 2 * input_dim


def rule_parameters(rule: FuzzyRule, consequent_only: bool = False) -> np.ndarray:
    """Flatten ``[consequent (row-major), center, width]``."""
    parts = [rule.consequent.ravel()]
    if not consequent_only:
        parts += [rule.center, rule.width]
    return np.concatenate(parts)


def set_rule_parameters(rule: FuzzyRule, theta: np.ndarray, consequent_only: bool = False) -> None:
    m, n = rule.consequent.shape
    rule.consequent = theta[: m * n].reshape(m, n).copy()
    if not consequent_only:
        d = rule.input_dim
        rule.center = theta[m * n: m * n + d].copy()
        rule.width = theta[m * n + d: m * n + 2 * d].copy()


def ekf_jacobian(model: FisModel, rule_index: int, u, consequent_only: bool = False) -> np.ndarray:
    """Jacobian of ``infer(model, u)`` w.r.t. one rule's parameters.

    Returns an (m, p) matrix ordered as :func:`rule_parameters`.
    """
    u = _check_input(model, u)
    if not 0 <= rule_index < model.n_rules:
        raise IndexError(f"rule index {rule_index} out of range")
    lam = fire(model, u).normalized
    outputs = rule_outputs(model, u)
    y_hat = lam @ outputs
    rule = model.rules[rule_index]
    m, d = model.output_dim, model.input_dim
    x = extended_input(u)
    w = lam[rule_index]

    H_cons = np.zeros((m, m * (d + 1)))
    for o in range(m):
        H_cons[o, o * (d + 1):(o + 1) * (d + 1)] = w * x
    if consequent_only:
        return H_cons
    # d v_hat / d R_i = (y_i - v_hat) / S, and d R_i / d c = R_i (u - c) / s^2
    spread = (outputs[rule_index] - y_hat)[:, None] * w
    diff = u - rule.center
    H_center = spread * (diff / rule.width**2)[None, :]
    H_width = spread * (diff**2 / rule.width**3)[None, :]
    return np.hstack([H_cons, H_center, H_width])


def ekf_update_nearest(
    model: FisModel,
    rule_index: int,
    u,
    v,
    obs_noise: float = 0.01,
    process_noise: float = 0.0,
    consequent_only: bool = False,
    width_floor: float = WIDTH_FLOOR,
) -> FisModel:
    """One EKF step on the parameters of ``model.rules[rule_index]``.

    The rule's ``covariance`` must already be sized for its parameter vector.
    """
    v = np.asarray(v, dtype=float).ravel()
    if v.size != model.output_dim:
        raise ValueError(f"target has length {v.size}, model expects {model.output_dim}")
    rule = model.rules[rule_index] if 0 <= rule_index < model.n_rules else None
    if rule is None:
        raise IndexError(f"rule index {rule_index} out of range")
    H = ekf_jacobian(model, rule_index, u, consequent_only)
    if not np.all(np.isfinite(H)):
        raise NumericalError("non-finite EKF Jacobian")
    P = rule.covariance
    if P is None or P.shape != (H.shape[1], H.shape[1]):
        raise ValueError("rule covariance missing or inconsistent with EKF parameter vector")
    innovation = v - infer(model, u)
    PHt = P @ H.T
    S = H @ PHt + obs_noise * np.eye(model.output_dim)
    K = np.linalg.solve(S, PHt.T).T
    theta = rule_parameters(rule, consequent_only) + K @ innovation
    set_rule_parameters(rule, theta, consequent_only)
    rule.width = np.maximum(rule.width, width_floor)
    P = P - K @ PHt.T
    if process_noise:
        P = P + process_noise * np.eye(P.shape[0])
    rule.covariance = _symmetrize(P)
    return model
