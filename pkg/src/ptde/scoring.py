"""Three-layer feedforward scoring head with hand-derived gradients.

The head maps a segment embedding to a theft confidence in (0, 1):

    sigmoid(w3 . relu(w2 . relu(w1 . x + b1) + b2) + b3)

Hidden widths are 512 and 32. Gradients of the pair ranking objective are
computed analytically; no autodiff framework is involved.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyBag
from .loss import loss_score_gradients, mil_ranking_loss

HIDDEN1 = 512
HIDDEN2 = 32
OUTPUT = 1


@dataclass
class ScoringHead:
    """Parameters of the scorer. Weight matrices are (fan_in, fan_out)."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray

    @property
    def input_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def layer_dims(self) -> tuple[int, int, int]:
        return (self.w1.shape[1], self.w2.shape[1], self.w3.shape[1])

    def params(self) -> tuple[np.ndarray, ...]:
        return (self.w1, self.b1, self.w2, self.b2, self.w3, self.b3)


@dataclass
class HeadGradients:
    """Shape-congruent companion of ScoringHead (gradients, accumulators)."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray

    def params(self) -> tuple[np.ndarray, ...]:
        return (self.w1, self.b1, self.w2, self.b2, self.w3, self.b3)


def init_head(input_dim: int, seed: int) -> ScoringHead:
    """Glorot-uniform weights, zero biases, deterministic per seed.

    The uniform bound sqrt(6 / (fan_in + fan_out)) keeps pre-activations
    small enough that the sigmoid output starts near 0.5.
    """
    if input_dim < 1:
        raise ValueError(f"input_dim must be >= 1, got {input_dim}")
    rng = np.random.default_rng(seed)

    def glorot(fan_in: int, fan_out: int) -> np.ndarray:
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, size=(fan_in, fan_out))

    return ScoringHead(
        w1=glorot(input_dim, HIDDEN1),
        b1=np.zeros(HIDDEN1),
        w2=glorot(HIDDEN1, HIDDEN2),
        b2=np.zeros(HIDDEN2),
        w3=glorot(HIDDEN2, OUTPUT),
        b3=np.zeros(OUTPUT),
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    out = np.empty_like(z)
    nonneg = z >= 0
    out[nonneg] = 1.0 / (1.0 + np.exp(-z[nonneg]))
    ez = np.exp(z[~nonneg])
    out[~nonneg] = ez / (1.0 + ez)
    return out


def _forward(head: ScoringHead, x: np.ndarray):
    z1 = x @ head.w1 + head.b1
    h1 = np.maximum(z1, 0.0)
    z2 = h1 @ head.w2 + head.b2
    h2 = np.maximum(z2, 0.0)
    z3 = h2 @ head.w3 + head.b3
    scores = _sigmoid(z3[:, 0])
    return z1, h1, z2, h2, scores


def _as_bag(embeddings, input_dim: int, name: str) -> np.ndarray:
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim == 1 and x.size == 0:
        x = x.reshape(0, input_dim)
    if x.ndim != 2:
        raise DimensionMismatch(
            f"{name} bag must be a (segments, dim) array, got shape {x.shape}"
        )
    if x.shape[1] != input_dim:
        raise DimensionMismatch(
            f"{name} bag has embedding dimension {x.shape[1]}, "
            f"head expects {input_dim}"
        )
    return x


def score(head: ScoringHead, embedding) -> float:
    """Theft confidence for a single segment embedding."""
    x = np.asarray(embedding, dtype=np.float64)
    if x.shape != (head.input_dim,):
        raise DimensionMismatch(
            f"embedding has shape {x.shape}, head expects ({head.input_dim},)"
        )
    return float(_forward(head, x[None, :])[4][0])


def score_segments(head: ScoringHead, embeddings) -> np.ndarray:
    """Scores for an ordered list of segment embeddings, order preserved."""
    if isinstance(embeddings, (list, tuple)) and len(embeddings) == 0:
        return np.zeros(0)
    x = _as_bag(embeddings, head.input_dim, "segment")
    if x.shape[0] == 0:
        return np.zeros(0)
    return _forward(head, x)[4]


def _backward(head: ScoringHead, x, z1, h1, z2, h2, scores, dscores) -> HeadGradients:
    # relu subgradient at exactly 0 is taken as 0
    dz3 = (dscores * scores * (1.0 - scores))[:, None]
    dw3 = h2.T @ dz3
    db3 = dz3.sum(axis=0)
    dh2 = dz3 @ head.w3.T
    dz2 = dh2 * (z2 > 0.0)
    dw2 = h1.T @ dz2
    db2 = dz2.sum(axis=0)
    dh1 = dz2 @ head.w2.T
    dz1 = dh1 * (z1 > 0.0)
    dw1 = x.T @ dz1
    db1 = dz1.sum(axis=0)
    return HeadGradients(w1=dw1, b1=db1, w2=dw2, b2=db2, w3=dw3, b3=db3)


def backprop(head: ScoringHead, pos_bag, neg_bag, lambda1: float, lambda2: float):
    """Pair objective on two bags and its exact parameter gradients.

    Returns (LossBreakdown, HeadGradients). Kink conventions follow the
    loss module: zero hinge gradient exactly at the margin, argmax ties to
    the lowest segment index; relu' (0) = 0.
    """
    pos = _as_bag(pos_bag, head.input_dim, "positive")
    neg = _as_bag(neg_bag, head.input_dim, "negative")
    if pos.shape[0] == 0 or neg.shape[0] == 0:
        raise EmptyBag("both bags need at least one segment")
    z1p, h1p, z2p, h2p, ps = _forward(head, pos)
    z1n, h1n, z2n, h2n, ns = _forward(head, neg)
    breakdown = mil_ranking_loss(ps, ns, lambda1, lambda2)
    dps, dns = loss_score_gradients(ps, ns, lambda1, lambda2)
    gp = _backward(head, pos, z1p, h1p, z2p, h2p, ps, dps)
    gn = _backward(head, neg, z1n, h1n, z2n, h2n, ns, dns)
    grads = HeadGradients(
        *(a + b for a, b in zip(gp.params(), gn.params()))
    )
    return breakdown, grads
