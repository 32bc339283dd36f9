"""Tests for the self-rectifying loss, its pieces and the ranking baseline."""

import numpy as np
import pytest

from milvad.errors import InputError
from milvad.losses import (
    BagPair,
    classical_ranking_loss,
    context_loss,
    instance_loss,
    pseudo_labels,
    self_rectifying_loss,
)
from milvad.tensor import Tensor, grad_check


def bags(anomaly, normal):
    return BagPair(anomaly=Tensor(np.asarray(anomaly, dtype=np.float64)),
                   normal=Tensor(np.asarray(normal, dtype=np.float64)))


class TestContextLoss:
    def test_separated_bags_cost_nothing(self):
        assert context_loss(bags([1.0, 1.0], [0.0, 0.0])).item() == 0.0

    def test_identical_zero_bags(self):
        assert context_loss(bags([0.0, 0.0], [0.0, 0.0])).item() == 1.0

    def test_hand_arithmetic(self):
        value = context_loss(bags([0.5, 0.5], [0.3, 0.2])).item()
        assert abs(value - 0.5) <= 1e-12

    def test_weight_scales(self):
        assert context_loss(bags([0.0, 0.0], [0.0, 0.0]), weight=2.5).item() == 2.5

    def test_normalized_variant(self):
        value = context_loss(bags([0.5, 0.5], [0.3, 0.2]), normalize=True).item()
        assert abs(value - (1.0 - 0.5 + 0.25)) <= 1e-12


class TestPseudoLabels:
    def test_midpoint_thresholding(self):
        labels = pseudo_labels(np.array([0.1, 0.9, 0.5]))
        assert labels.reference == 0.5
        assert np.array_equal(labels.anomaly, [0.0, 1.0, 0.0])  # 0.5 is not > 0.5

    def test_degenerate_all_equal(self):
        labels = pseudo_labels(np.array([0.3, 0.3]))
        assert labels.reference == pytest.approx(0.3)
        assert np.array_equal(labels.anomaly, [0.0, 0.0])

    def test_four_point_case(self):
        labels = pseudo_labels(np.array([0.0, 1.0, 0.6, 0.4]))
        assert labels.reference == 0.5
        assert np.array_equal(labels.anomaly, [0.0, 1.0, 1.0, 0.0])

    def test_spread_bag_gets_both_labels(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            scores = rng.uniform(size=rng.integers(2, 9))
            if scores.max() == scores.min():
                continue
            labels = pseudo_labels(scores).anomaly
            assert labels.max() == 1.0 and labels.min() == 0.0

    def test_invariant_under_increasing_affine_rescale(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            scores = rng.uniform(size=6)
            base = pseudo_labels(scores).anomaly
            a = rng.uniform(0.1, 3.0)
            b = rng.uniform(-2.0, 2.0)
            assert np.array_equal(pseudo_labels(a * scores + b).anomaly, base)


class TestInstanceLoss:
    def test_zero_when_both_errors_vanish(self):
        pair = bags([0.0, 1.0], [0.0, 0.0])
        value = instance_loss(pair, pseudo_labels(pair.anomaly))
        assert value.item() == 0.0

    def test_hand_arithmetic(self):
        pair = bags([0.4, 0.8], [0.2, 0.2])
        value = instance_loss(pair, pseudo_labels(pair.anomaly))
        assert abs(value.item() - 0.06) <= 1e-12

    def test_zero_weight(self):
        pair = bags([0.9, 0.2, 0.7], [0.4, 0.1, 0.3])
        assert instance_loss(pair, pseudo_labels(pair.anomaly), weight=0.0).item() == 0.0

    def test_label_length_checked(self):
        pair = bags([0.4, 0.8], [0.2, 0.2])
        with pytest.raises(InputError):
            instance_loss(pair, pseudo_labels(np.array([0.1, 0.5, 0.9])))


class TestSelfRectifyingLoss:
    def test_zero_iff_hinge_inactive_and_errors_match(self):
        # one anomalous and one normal segment, both scored exactly right:
        # hinge is 1 - 1 + 0 = 0 and both mse terms vanish
        assert self_rectifying_loss(bags([1.0, 0.0], [0.0, 0.0])).item() == 0.0

    def test_all_equal_anomaly_bag_is_penalized(self):
        # ties go below the midpoint, so a constant bag scores label 0
        # everywhere and the instance term keeps pushing it apart
        value = self_rectifying_loss(bags([1.0, 1.0], [0.0, 0.0])).item()
        assert abs(value - 1.0) <= 1e-12

    def test_composed_hand_case(self):
        value = self_rectifying_loss(bags([0.4, 0.8], [0.3, 0.2])).item()
        # context hinge: max(0, 1 - 1.2 + 0.5) = 0.3
        # instance: |mean([0.09, 0.04]) - mean([0.16, 0.04])| = 0.035
        assert abs(value - 0.335) <= 1e-12

    def test_acceptance_component_sum(self):
        # the two published hand-worked component cases and their sum
        ctx = context_loss(bags([0.4, 0.8], [0.3, 0.2])).item()
        pair = bags([0.4, 0.8], [0.2, 0.2])
        inst = instance_loss(pair, pseudo_labels(pair.anomaly)).item()
        assert abs(ctx - 0.3) <= 1e-12
        assert abs(inst - 0.06) <= 1e-12
        assert abs(ctx + inst - 0.36) <= 1e-12

    def test_nonnegative_on_random_bags(self):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            t = int(rng.integers(1, 9))
            value = self_rectifying_loss(
                bags(rng.uniform(0, 2, size=t), rng.uniform(0, 2, size=t))
            ).item()
            assert value >= 0.0

    def test_weights_apply_per_term(self):
        pair = bags([0.4, 0.8], [0.3, 0.2])
        value = self_rectifying_loss(pair, context_weight=2.0, instance_weight=10.0).item()
        assert abs(value - (2.0 * 0.3 + 10.0 * 0.035)) <= 1e-12


class TestClassicalRankingLoss:
    def test_hand_arithmetic(self):
        value = classical_ranking_loss(bags([0.9, 0.1], [0.2, 0.05])).item()
        assert abs(value - 0.3) <= 1e-12

    def test_fully_separated(self):
        assert classical_ranking_loss(bags([1.0, 0.3], [0.0, 0.0])).item() == 0.0

    def test_identical_bags(self):
        assert classical_ranking_loss(bags([0.4, 0.7], [0.4, 0.7])).item() == 1.0


class TestLossGradients:
    def test_gradients_away_from_kinks(self):
        # inputs chosen > 1e-3 from the hinge kink, |.| kink and label flips
        rng = np.random.default_rng(3)
        for trial in range(5):
            while True:
                a = rng.uniform(0.05, 0.95, size=4)
                n = rng.uniform(0.05, 0.95, size=4)
                ref = (a.max() + a.min()) / 2
                hinge_gap = abs(1.0 - a.sum() + n.sum())
                labels = (a > ref).astype(float)
                err_gap = abs((n ** 2).mean() - ((a - labels) ** 2).mean())
                flip_gap = np.abs(a - ref).min()
                if min(hinge_gap, err_gap, flip_gap) > 1e-3:
                    break
            anomaly = Tensor(a, requires_grad=True)
            normal = Tensor(n, requires_grad=True)

            def build():
                return self_rectifying_loss(BagPair(anomaly=anomaly, normal=normal))

            assert grad_check(build) < 1e-4, f"trial {trial}"

    def test_classical_loss_gradients(self):
        rng = np.random.default_rng(4)
        a = rng.uniform(0.1, 0.9, size=5)
        n = rng.uniform(0.1, 0.9, size=5)
        anomaly = Tensor(a, requires_grad=True)
        normal = Tensor(n, requires_grad=True)

        def build():
            return classical_ranking_loss(BagPair(anomaly=anomaly, normal=normal))

        assert grad_check(build) < 1e-4


class TestBagValidation:
    def test_mismatched_lengths_rejected(self):
        with pytest.raises(InputError):
            bags([0.1, 0.2], [0.1, 0.2, 0.3])

    def test_empty_bags_rejected(self):
        with pytest.raises(InputError):
            bags([], [])
