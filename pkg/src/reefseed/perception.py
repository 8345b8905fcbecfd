"""Substrate-classifier emulator and confusion-matrix metrics.

Real imagery is out of scope; the emulator reproduces a classifier's
error *rates* instead. Each model draws from its own seeded stream, so a
vehicle's prediction sequence is a pure function of (seed, truth
sequence) and mission replays are exact. Anything with a compatible
``classify_frame`` method can stand in for the emulator, including
truth-oblivious stubs, since downstream consumers only read Predictions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Protocol

import numpy as np

from .errors import ConfigurationError, InvalidParameterError
from .world import SubstrateClass

# Per-class recall targets for the named field models. Loomis/Watson are
# the ratios of correctly-handled to surveyed area per class observed in
# the field; Combined is the held-out test average.
MODEL_RECALLS = {
    "LoomisFieldModel": (46.27 / 46.85, 53.06 / 53.15),
    "WatsonFieldModel": (89.28 / 90.41, 9.49 / 9.59),
    "CombinedTestModel": (0.9947, 0.9947),
}


@dataclass(frozen=True, slots=True)
class Prediction:
    predicted: SubstrateClass
    frame_id: int
    timestamp: float


class SubstrateClassifier(Protocol):
    def classify_frame(self, truth: SubstrateClass, timestamp: float = 0.0) -> Prediction:
        ...


def _flip(cls: SubstrateClass) -> SubstrateClass:
    if cls is SubstrateClass.SUITABLE:
        return SubstrateClass.UNSUITABLE
    return SubstrateClass.SUITABLE


class ClassifierModel:
    """Rate-calibrated stochastic classifier.

    Predicts the true class with the per-class recall probability, else
    flips it. ``sticky_frames`` > 1 makes each error persist for that many
    consecutive frames (error bursts for sensitivity studies); default is
    independent per-frame errors.
    """

    def __init__(
        self,
        recall_suitable: float,
        recall_unsuitable: float,
        rng_seed: int = 0,
        sticky_frames: int = 0,
    ) -> None:
        if not 0.0 <= recall_suitable <= 1.0 or not 0.0 <= recall_unsuitable <= 1.0:
            raise InvalidParameterError("recalls must be in [0, 1]")
        if sticky_frames < 0:
            raise InvalidParameterError("sticky_frames must be >= 0")
        self.recall_suitable = recall_suitable
        self.recall_unsuitable = recall_unsuitable
        self.rng_seed = rng_seed
        self.sticky_frames = sticky_frames
        self._rng = np.random.default_rng(rng_seed)
        self._next_frame_id = 0
        self._sticky_left = 0

    def classify_frame(self, truth: SubstrateClass, timestamp: float = 0.0) -> Prediction:
        if self._sticky_left > 0:
            self._sticky_left -= 1
            predicted = _flip(truth)
        else:
            recall = (
                self.recall_suitable
                if truth is SubstrateClass.SUITABLE
                else self.recall_unsuitable
            )
            if self._rng.random() < recall:
                predicted = truth
            else:
                predicted = _flip(truth)
                if self.sticky_frames > 1:
                    self._sticky_left = self.sticky_frames - 1
        frame_id = self._next_frame_id
        self._next_frame_id += 1
        return Prediction(predicted=predicted, frame_id=frame_id, timestamp=timestamp)


def classify_frame(
    model: SubstrateClassifier, truth: SubstrateClass, timestamp: float = 0.0
) -> Prediction:
    return model.classify_frame(truth, timestamp)


def calibrate_model(target: str, seed: int = 0) -> ClassifierModel:
    """Classifier calibrated to one of the named performance profiles."""
    try:
        recall_suitable, recall_unsuitable = MODEL_RECALLS[target]
    except KeyError:
        raise ConfigurationError(
            "unknown classifier profile %r; expected one of %s"
            % (target, ", ".join(sorted(MODEL_RECALLS)))
        ) from None
    return ClassifierModel(recall_suitable, recall_unsuitable, rng_seed=seed)


@dataclass(frozen=True, slots=True)
class ConfusionMatrix:
    """Binary counts with Suitable as the positive class."""

    tp: int
    fn: int
    fp: int
    tn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fn, self.fp, self.tn) < 0:
            raise InvalidParameterError("confusion counts must be >= 0")

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn


def tally_confusion(
    pairs: Iterable[tuple[SubstrateClass, SubstrateClass]]
) -> ConfusionMatrix:
    """Count (truth, predicted) pairs into a ConfusionMatrix."""
    tp = fn = fp = tn = 0
    for truth, predicted in pairs:
        if truth is SubstrateClass.SUITABLE:
            if predicted is SubstrateClass.SUITABLE:
                tp += 1
            else:
                fn += 1
        else:
            if predicted is SubstrateClass.SUITABLE:
                fp += 1
            else:
                tn += 1
    return ConfusionMatrix(tp=tp, fn=fn, fp=fp, tn=tn)


def _f1(tp: int, false_pred: int, false_miss: int) -> float | None:
    """F1 for one class; None when the class has no true members."""
    if tp + false_miss == 0:
        return None
    if tp == 0:
        return 0.0
    precision = tp / (tp + false_pred)
    recall = tp / (tp + false_miss)
    return 2.0 * precision * recall / (precision + recall)


def confusion_to_metrics(
    cm: ConfusionMatrix,
) -> tuple[float, float | None, float | None]:
    """(accuracy, f1_suitable, f1_unsuitable); zero-support F1 is None."""
    if cm.total == 0:
        raise InvalidParameterError("confusion matrix is empty")
    accuracy = (cm.tp + cm.tn) / cm.total
    f1_suitable = _f1(cm.tp, cm.fp, cm.fn)
    f1_unsuitable = _f1(cm.tn, cm.fn, cm.fp)
    return accuracy, f1_suitable, f1_unsuitable
