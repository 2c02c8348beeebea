"""Ranking objective over per-segment score lists.

For one (positive bag, negative bag) pair the objective is

    max(0, 1 - max(pos) + max(neg))
        + lambda1 * sum_i (pos_i - pos_{i+1})^2
        + lambda2 * sum_i pos_i

The hinge compares bag maxima (the best-scoring instance stands in for the
bag), the squared-difference term keeps consecutive positive-bag scores
smooth, and the plain sum keeps them sparse. Both regularizers act on the
positive bag only.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EmptyBag, EmptyBatch, NegativeLambda


@dataclass(frozen=True)
class LossBreakdown:
    """Per-term values of the pair objective.

    `smoothness` and `sparsity` are stored already weighted by their
    lambdas, so total = hinge + smoothness + sparsity.
    """

    hinge: float
    smoothness: float
    sparsity: float
    total: float
    lambda1: float
    lambda2: float


def _validate_bag(scores, name: str) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1:
        raise ValueError(f"{name} scores must be a flat list, got shape {scores.shape}")
    if scores.size == 0:
        raise EmptyBag(f"{name} bag has no segment scores")
    return scores


def _validate_lambdas(lambda1: float, lambda2: float) -> None:
    if lambda1 < 0 or lambda2 < 0:
        raise NegativeLambda(f"lambdas must be >= 0, got {lambda1} and {lambda2}")


def mil_ranking_loss(pos_scores, neg_scores, lambda1: float, lambda2: float) -> LossBreakdown:
    """Evaluate the pair objective on two score lists."""
    pos = _validate_bag(pos_scores, "positive")
    neg = _validate_bag(neg_scores, "negative")
    _validate_lambdas(lambda1, lambda2)
    hinge = max(0.0, 1.0 - float(np.max(pos)) + float(np.max(neg)))
    smoothness = lambda1 * float(np.sum((pos[:-1] - pos[1:]) ** 2))
    sparsity = lambda2 * float(np.sum(pos))
    return LossBreakdown(
        hinge=hinge,
        smoothness=smoothness,
        sparsity=sparsity,
        total=hinge + smoothness + sparsity,
        lambda1=lambda1,
        lambda2=lambda2,
    )


def loss_score_gradients(pos_scores, neg_scores, lambda1: float, lambda2: float):
    """Exact gradient of the pair objective with respect to every score.

    Subgradient conventions: the hinge contributes nothing when the margin
    is exactly met, and bag maxima resolve argmax ties to the lowest
    segment index.
    """
    pos = _validate_bag(pos_scores, "positive")
    neg = _validate_bag(neg_scores, "negative")
    _validate_lambdas(lambda1, lambda2)
    dpos = np.full(pos.shape, lambda2, dtype=np.float64)
    if pos.size > 1:
        d = pos[:-1] - pos[1:]
        dpos[:-1] += 2.0 * lambda1 * d
        dpos[1:] -= 2.0 * lambda1 * d
    dneg = np.zeros(neg.shape, dtype=np.float64)
    margin = 1.0 - float(np.max(pos)) + float(np.max(neg))
    if margin > 0.0:
        dpos[int(np.argmax(pos))] -= 1.0
        dneg[int(np.argmax(neg))] += 1.0
    return dpos, dneg


def ranking_satisfied(pos_scores, neg_scores) -> bool:
    """True iff the positive bag's best score strictly beats the negative's."""
    pos = _validate_bag(pos_scores, "positive")
    neg = _validate_bag(neg_scores, "negative")
    return bool(np.max(pos) > np.max(neg))


def batch_objective(pairs, lambda1: float, lambda2: float) -> float:
    """Mean pair objective over (pos_scores, neg_scores) pairs.

    The mean (not the sum) keeps the lambdas batch-size independent.
    """
    pairs = list(pairs)
    if len(pairs) == 0:
        raise EmptyBatch("batch contains no bag pairs")
    totals = [mil_ranking_loss(p, n, lambda1, lambda2).total for p, n in pairs]
    return float(np.sum(totals) / len(totals))
