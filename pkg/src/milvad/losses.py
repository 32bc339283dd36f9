"""Self-rectifying MIL loss and the classical ranking baseline.

Training sees two bags per step: the segment scores of one anomaly-labeled
video and one normal-labeled video. The self-rectifying loss is a weighted
sum of

  * a context term: a unit-margin hinge between the bags' raw score sums,
  * an instance term: |mse(normal scores vs 0) - mse(anomaly scores vs
    their pseudo labels)|,

where the pseudo labels threshold each anomaly-bag score against the
midpoint of the bag's max and min. The labels and midpoint are recomputed
from the current scores at every call and are constants for gradient
purposes; the midpoint adjusts across iterations as the scores move,
which is what rectifies noisy labels.

The classical baseline is the unit-margin hinge on the two bag maxima.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .tensor import Tensor, absolute, mean, mul, pool, relu, total

__all__ = [
    "BagPair",
    "PseudoLabels",
    "pseudo_labels",
    "context_loss",
    "instance_loss",
    "self_rectifying_loss",
    "classical_ranking_loss",
]


@dataclass
class BagPair:
    """Score tensors for one (anomaly video, normal video) pair."""

    anomaly: Tensor  # (T,)
    normal: Tensor   # (T,)

    def __post_init__(self):
        if self.anomaly.ndim != 1 or self.anomaly.shape != self.normal.shape:
            raise InputError(
                f"bags must be equal-length vectors, got {self.anomaly.shape} and {self.normal.shape}"
            )
        if self.anomaly.shape[0] < 1:
            raise InputError("bags must contain at least one instance")


@dataclass
class PseudoLabels:
    """Stop-gradient targets for the anomaly bag (normal labels are all 0)."""

    reference: float        # midpoint of the bag's max and min score
    anomaly: np.ndarray     # (T,) of {0.0, 1.0}; 1 where score > reference


def pseudo_labels(anomaly_scores) -> PseudoLabels:
    """Threshold the anomaly bag against the midpoint of its own range.

    Scores strictly above (max + min) / 2 are labeled 1, the rest 0. The
    labels and the midpoint carry no gradient.
    """
    values = anomaly_scores.data if isinstance(anomaly_scores, Tensor) else np.asarray(anomaly_scores, dtype=np.float64)
    if values.ndim != 1 or values.size < 1:
        raise InputError(f"pseudo labels need a nonempty score vector, got shape {values.shape}")
    reference = (values.max() + values.min()) / 2.0
    return PseudoLabels(reference=float(reference), anomaly=(values > reference).astype(np.float64))


def context_loss(bags: BagPair, weight: float = 1.0, normalize: bool = False) -> Tensor:
    """Hinge between the bags' score sums: weight * max(0, 1 - sum_a + sum_n).

    Sums are raw by default, exactly as the margin is defined; `normalize`
    divides both by the bag length instead.
    """
    sum_a, sum_n = total(bags.anomaly), total(bags.normal)
    if normalize:
        t = bags.anomaly.shape[0]
        sum_a, sum_n = mul(sum_a, 1.0 / t), mul(sum_n, 1.0 / t)
    return mul(relu(1.0 - sum_a + sum_n), weight)


def instance_loss(bags: BagPair, labels: PseudoLabels, weight: float = 1.0) -> Tensor:
    """weight * |mse(normal, 0) - mse(anomaly, pseudo labels)|."""
    if labels.anomaly.shape != bags.anomaly.shape:
        raise InputError(
            f"labels of length {labels.anomaly.shape} do not match bag of length {bags.anomaly.shape}"
        )
    err_correct = mean(bags.normal.square())
    err_noisy = mean((bags.anomaly - Tensor(labels.anomaly)).square())
    return mul(absolute(err_correct - err_noisy), weight)


def self_rectifying_loss(
    bags: BagPair,
    context_weight: float = 1.0,
    instance_weight: float = 1.0,
    normalize_context: bool = False,
) -> Tensor:
    """Context hinge plus instance term, labels recomputed from the current bag."""
    labels = pseudo_labels(bags.anomaly)
    return context_loss(bags, context_weight, normalize_context) + instance_loss(
        bags, labels, instance_weight
    )


def classical_ranking_loss(bags: BagPair) -> Tensor:
    """Unit-margin hinge on the top instance of each bag."""
    top_a = pool(bags.anomaly, axis=0, mode="max")
    top_n = pool(bags.normal, axis=0, mode="max")
    return relu(1.0 - top_a + top_n)
