"""Adagrad training loop over sampled bag pairs.

One epoch = sample `pairs_per_epoch` (positive, negative) bag pairs with
replacement, average the pair-objective gradients, and take one Adagrad
step. Runs are bit-for-bit reproducible from (dataset, config).
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatch, InsufficientData, NonFiniteLoss, ShapeMismatch
from .fusion import FusionMode
from .scoring import HeadGradients, ScoringHead, backprop, init_head

HISTORY_COLUMNS = ("total", "hinge", "smoothness", "sparsity")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 5000
    pairs_per_epoch: int = 30
    lambda1: float = 8e-5
    lambda2: float = 8e-5
    seed: int = 0
    adagrad_epsilon: float = 1e-8
    fusion_mode: FusionMode = FusionMode.GLOBAL_LOCAL_CONCAT

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.pairs_per_epoch < 1:
            raise ValueError(
                f"pairs_per_epoch must be >= 1, got {self.pairs_per_epoch}"
            )
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("lambda1 and lambda2 must be >= 0")
        if self.adagrad_epsilon <= 0:
            raise ValueError("adagrad_epsilon must be > 0")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


@dataclass
class AdagradState:
    """Per-parameter sums of squared gradients plus a step counter."""

    sum_sq: HeadGradients
    step: int = 0


def init_adagrad(head: ScoringHead) -> AdagradState:
    return AdagradState(
        sum_sq=HeadGradients(*(np.zeros_like(p) for p in head.params()))
    )


def adagrad_step(
    head: ScoringHead,
    grads: HeadGradients,
    state: AdagradState,
    learning_rate: float,
    epsilon: float,
):
    """One Adagrad update: acc += g^2; p -= lr * g / (sqrt(acc) + eps).

    Functional: returns a new (head, state) pair. Epsilon sits outside the
    square root.
    """
    for p, g, s in zip(head.params(), grads.params(), state.sum_sq.params()):
        if p.shape != g.shape or p.shape != s.shape:
            raise ShapeMismatch(
                f"parameter/gradient/accumulator shapes differ: "
                f"{p.shape} vs {g.shape} vs {s.shape}"
            )
    new_params = []
    new_sums = []
    for p, g, s in zip(head.params(), grads.params(), state.sum_sq.params()):
        acc = s + g * g
        assert np.all(acc >= s), "adagrad accumulator decreased"
        new_params.append(p - learning_rate * g / (np.sqrt(acc) + epsilon))
        new_sums.append(acc)
    return (
        ScoringHead(*new_params),
        AdagradState(sum_sq=HeadGradients(*new_sums), step=state.step + 1),
    )


@dataclass
class TrainRun:
    """Trained head plus per-epoch loss history and the config snapshot."""

    head: ScoringHead
    history: np.ndarray  # (epochs, 4) columns per HISTORY_COLUMNS
    config: TrainConfig


def train(dataset, config: TrainConfig) -> TrainRun:
    """Train a fresh head on labeled VideoBags.

    `dataset` is any sequence of bags exposing `.embeddings` (segments x
    dim) and `.is_positive`. Sampling, initialization, and reduction order
    are all fixed by config.seed.
    """
    bags = list(dataset)
    pos = [b for b in bags if b.is_positive]
    neg = [b for b in bags if not b.is_positive]
    if not pos or not neg:
        raise InsufficientData(
            f"need at least one positive and one negative bag, "
            f"got {len(pos)} positive / {len(neg)} negative"
        )
    dims = {b.embeddings.shape[1] for b in bags}
    if len(dims) != 1:
        raise DimensionMismatch(f"bags have mixed embedding dimensions {sorted(dims)}")
    (input_dim,) = dims

    head = init_head(input_dim, config.seed)
    state = init_adagrad(head)
    # sampling stream keyed off the seed, distinct from the init stream
    sampler = np.random.default_rng([config.seed, 1])
    history = np.empty((config.epochs, len(HISTORY_COLUMNS)))

    for epoch in range(config.epochs):
        pos_idx = sampler.integers(0, len(pos), size=config.pairs_per_epoch)
        neg_idx = sampler.integers(0, len(neg), size=config.pairs_per_epoch)
        grad_sum = None
        term_sum = np.zeros(len(HISTORY_COLUMNS))
        for pi, ni in zip(pos_idx, neg_idx):
            breakdown, grads = backprop(
                head,
                pos[pi].embeddings,
                neg[ni].embeddings,
                config.lambda1,
                config.lambda2,
            )
            term_sum += (
                breakdown.total,
                breakdown.hinge,
                breakdown.smoothness,
                breakdown.sparsity,
            )
            if grad_sum is None:
                grad_sum = list(grads.params())
            else:
                for acc, g in zip(grad_sum, grads.params()):
                    acc += g
        history[epoch] = term_sum / config.pairs_per_epoch
        if not np.isfinite(history[epoch, 0]):
            raise NonFiniteLoss(f"objective became non-finite at epoch {epoch}")
        mean_grads = HeadGradients(*(g / config.pairs_per_epoch for g in grad_sum))
        head, state = adagrad_step(
            head, mean_grads, state, config.learning_rate, config.adagrad_epsilon
        )

    return TrainRun(head=head, history=history, config=replace(config))


def write_run_log(run: TrainRun, path) -> None:
    """One line per epoch: epoch, total, hinge, smoothness, sparsity (tabs)."""
    lines = []
    for epoch, (total, hinge, smooth, spars) in enumerate(run.history, start=1):
        lines.append(f"{epoch}\t{total}\t{hinge}\t{smooth}\t{spars}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
