"""Common streaming interface for the evolving learners."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fuzzy import FisModel, infer


@dataclass(frozen=True)
class StepResult:
    prediction: np.ndarray
    action: str


class OnlineLearner:
    """Predict-then-learn interface shared by eTS, SAFIS and McFIS.

    Subclasses bootstrap from the first pair they see, so a learner can be
    created before the data dimensions are known.
    """

    name = "learner"

    def __init__(self):
        self.state = None

    @property
    def model(self) -> FisModel | None:
        return None if self.state is None else self.state.model

    @property
    def n_rules(self) -> int:
        return 0 if self.model is None else self.model.n_rules

    def predict(self, u) -> np.ndarray:
        return infer(self.model, u)

    def step(self, pair) -> StepResult:
        raise NotImplementedError

    def finish_training(self) -> None:
        """Hook run once after the training stream is exhausted."""

    def to_dict(self) -> dict:
        raise NotImplementedError
