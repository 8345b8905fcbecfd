"""Classifier emulator rates, determinism, and confusion metrics."""

import math

import numpy as np
import pytest

from reefseed.errors import ConfigurationError, InvalidParameterError
from reefseed.perception import (
    ClassifierModel,
    ConfusionMatrix,
    Prediction,
    calibrate_model,
    classify_frame,
    confusion_to_metrics,
    tally_confusion,
)
from reefseed.world import SubstrateClass

SUIT = SubstrateClass.SUITABLE
UNSUIT = SubstrateClass.UNSUITABLE


def mixed_truth_sequence(n, seed=123):
    rng = np.random.default_rng(seed)
    return [SUIT if rng.random() < 0.5 else UNSUIT for _ in range(n)]


class TestClassifyFrame:
    def test_perfect_recalls_always_match_truth(self):
        model = ClassifierModel(1.0, 1.0, rng_seed=1)
        for truth in mixed_truth_sequence(500):
            assert model.classify_frame(truth).predicted is truth

    def test_zero_recalls_always_flip(self):
        model = ClassifierModel(0.0, 0.0, rng_seed=1)
        assert model.classify_frame(SUIT).predicted is UNSUIT
        assert model.classify_frame(UNSUIT).predicted is SUIT

    def test_suitable_recall_rate_monte_carlo(self):
        model = ClassifierModel(0.9876, 1.0, rng_seed=7)
        n = 10**6
        hits = sum(
            model.classify_frame(SUIT).predicted is SUIT for _ in range(n)
        )
        assert hits / n == pytest.approx(0.9876, abs=0.001)

    def test_false_suitable_rate_monte_carlo(self):
        model = ClassifierModel(1.0, 0.9983, rng_seed=7)
        n = 10**6
        false_suitable = sum(
            model.classify_frame(UNSUIT).predicted is SUIT for _ in range(n)
        )
        assert false_suitable / n == pytest.approx(0.0017, abs=0.0005)

    def test_identical_seed_and_truth_sequence_reproduces_stream(self):
        truths = mixed_truth_sequence(2000)
        a = ClassifierModel(0.8, 0.6, rng_seed=42)
        b = ClassifierModel(0.8, 0.6, rng_seed=42)
        preds_a = [a.classify_frame(t).predicted for t in truths]
        preds_b = [b.classify_frame(t).predicted for t in truths]
        assert preds_a == preds_b

    def test_different_seeds_give_different_streams(self):
        truths = mixed_truth_sequence(2000)
        a = ClassifierModel(0.8, 0.6, rng_seed=1)
        b = ClassifierModel(0.8, 0.6, rng_seed=2)
        assert [a.classify_frame(t).predicted for t in truths] != [
            b.classify_frame(t).predicted for t in truths
        ]

    def test_frame_ids_strictly_increase_and_timestamp_passes_through(self):
        model = ClassifierModel(0.9, 0.9, rng_seed=3)
        last = -1
        for t in (0.0, 0.5, 1.0):
            pred = model.classify_frame(SUIT, timestamp=t)
            assert pred.frame_id > last
            assert pred.timestamp == t
            last = pred.frame_id

    @pytest.mark.parametrize(
        "recall,n", [(0.5, 20_000), (0.9876, 50_000), (0.1, 20_000)]
    )
    def test_empirical_recall_converges(self, recall, n):
        model = ClassifierModel(recall, recall, rng_seed=11)
        hits = sum(model.classify_frame(SUIT).predicted is SUIT for _ in range(n))
        bound = 3.0 * math.sqrt(recall * (1.0 - recall) / n)
        assert abs(hits / n - recall) <= bound

    def test_rejects_out_of_range_recalls(self):
        with pytest.raises(InvalidParameterError):
            ClassifierModel(1.2, 0.5)
        with pytest.raises(InvalidParameterError):
            ClassifierModel(0.5, -0.1)


class TestStickyErrors:
    def test_error_bursts_last_configured_length(self):
        model = ClassifierModel(0.7, 0.7, rng_seed=5, sticky_frames=3)
        errors = [model.classify_frame(SUIT).predicted is UNSUIT for _ in range(3000)]
        runs = []
        run = 0
        for is_err in errors:
            if is_err:
                run += 1
            elif run:
                runs.append(run)
                run = 0
        if run:
            runs.append(run)
        assert runs, "expected some error bursts"
        assert all(r >= 3 for r in runs)

    def test_default_mode_has_isolated_errors(self):
        model = ClassifierModel(0.7, 0.7, rng_seed=5)
        errors = [model.classify_frame(SUIT).predicted is UNSUIT for _ in range(3000)]
        isolated = any(
            errors[i] and not errors[i - 1] and not errors[i + 1]
            for i in range(1, len(errors) - 1)
        )
        assert isolated


class TestCalibrateModel:
    def test_named_profiles(self):
        loomis = calibrate_model("LoomisFieldModel", seed=1)
        assert loomis.recall_suitable == pytest.approx(0.9876, abs=5e-4)
        assert loomis.recall_unsuitable == pytest.approx(0.9983, abs=5e-4)
        watson = calibrate_model("WatsonFieldModel", seed=1)
        assert watson.recall_suitable == pytest.approx(0.9875, abs=5e-4)
        combined = calibrate_model("CombinedTestModel", seed=1)
        assert combined.recall_suitable == 0.9947
        assert combined.recall_unsuitable == 0.9947

    def test_unknown_profile_is_a_configuration_error(self):
        with pytest.raises(ConfigurationError):
            calibrate_model("MysteryModel", seed=1)


class TestConfusionMetrics:
    def test_perfect_matrix(self):
        acc, f1s, f1u = confusion_to_metrics(ConfusionMatrix(100, 0, 0, 100))
        assert (acc, f1s, f1u) == (1.0, 1.0, 1.0)

    def test_hand_computed_case(self):
        acc, f1s, f1u = confusion_to_metrics(ConfusionMatrix(tp=3, fn=1, fp=2, tn=4))
        assert acc == pytest.approx(0.7)
        assert f1s == pytest.approx(2 / 3)
        assert f1u == pytest.approx(8 / 11)

    def test_zero_support_class_yields_none_not_zero(self):
        acc, f1s, f1u = confusion_to_metrics(ConfusionMatrix(tp=0, fn=0, fp=5, tn=5))
        assert f1s is None
        assert f1u is not None

    def test_all_missed_class_yields_zero(self):
        _, f1s, _ = confusion_to_metrics(ConfusionMatrix(tp=0, fn=5, fp=0, tn=5))
        assert f1s == 0.0

    def test_empty_matrix_rejected(self):
        with pytest.raises(InvalidParameterError):
            confusion_to_metrics(ConfusionMatrix(0, 0, 0, 0))
        with pytest.raises(InvalidParameterError):
            ConfusionMatrix(-1, 0, 0, 1)

    def test_balanced_run_reproduces_combined_test_metrics(self):
        model = calibrate_model("CombinedTestModel", seed=9)
        truths = [SUIT] * 5000 + [UNSUIT] * 5000
        pairs = [(t, model.classify_frame(t).predicted) for t in truths]
        acc, f1s, f1u = confusion_to_metrics(tally_confusion(pairs))
        assert acc == pytest.approx(0.9947, abs=0.0015)
        assert f1s == pytest.approx(0.9947, abs=0.002)
        assert f1u == pytest.approx(0.9947, abs=0.002)

    def test_matches_brute_force_recount_on_random_cases(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            counts = rng.integers(0, 12, size=4)
            if counts.sum() == 0:
                continue
            tp, fn, fp, tn = (int(c) for c in counts)
            pairs = (
                [(SUIT, SUIT)] * tp
                + [(SUIT, UNSUIT)] * fn
                + [(UNSUIT, SUIT)] * fp
                + [(UNSUIT, UNSUIT)] * tn
            )
            acc, f1s, f1u = confusion_to_metrics(ConfusionMatrix(tp, fn, fp, tn))
            assert acc == sum(t is p for t, p in pairs) / len(pairs)
            assert f1s == brute_force_f1(pairs, SUIT)
            assert f1u == brute_force_f1(pairs, UNSUIT)


def brute_force_f1(pairs, positive):
    support = sum(t is positive for t, _ in pairs)
    if support == 0:
        return None
    true_pos = sum(t is positive and p is positive for t, p in pairs)
    predicted_pos = sum(p is positive for _, p in pairs)
    if true_pos == 0:
        return 0.0
    precision = true_pos / predicted_pos
    recall = true_pos / support
    return 2 * precision * recall / (precision + recall)


class TestPluggability:
    def test_truth_oblivious_classifier_satisfies_interface(self):
        class AlwaysSuitable:
            def __init__(self):
                self._frame = 0

            def classify_frame(self, truth, timestamp=0.0):
                pred = Prediction(SUIT, self._frame, timestamp)
                self._frame += 1
                return pred

        stub = AlwaysSuitable()
        pred = classify_frame(stub, UNSUIT, timestamp=1.5)
        assert pred.predicted is SUIT
        assert pred.timestamp == 1.5
        pairs = [(t, classify_frame(stub, t).predicted) for t in (SUIT, UNSUIT)]
        cm = tally_confusion(pairs)
        assert (cm.tp, cm.fp) == (1, 1)
