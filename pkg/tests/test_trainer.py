import numpy as np
import pytest

from ptde.data import VideoBag
from ptde.errors import (
    DimensionMismatch,
    InsufficientData,
    NonFiniteLoss,
    ShapeMismatch,
)
from ptde.fusion import FusionMode
from ptde.loss import ranking_satisfied
from ptde.scoring import HeadGradients, ScoringHead, score_segments
from ptde.trainer import (
    TrainConfig,
    adagrad_step,
    init_adagrad,
    train,
    write_run_log,
)


def micro_head():
    return ScoringHead(
        w1=np.array([[1.0, -1.0]]), b1=np.zeros(2),
        w2=np.array([[0.5], [0.25]]), b2=np.zeros(1),
        w3=np.array([[2.0]]), b3=np.zeros(1),
    )


def grads_like(head, value):
    return HeadGradients(*(np.full_like(p, value) for p in head.params()))


def make_bags(rng, n_pos=6, n_neg=6, dim=8, separation=4.0, segments=4):
    """In-memory bags: theft bags contain one shifted-cluster segment."""
    direction = np.zeros(dim)
    direction[0] = 1.0
    bags = []
    for i in range(n_pos):
        x = rng.standard_normal((segments, dim)) * 0.3
        x[rng.integers(0, segments)] += separation * direction
        bags.append(VideoBag(f"pos{i}", x, True, "PackageTheft", None))
    for i in range(n_neg):
        x = rng.standard_normal((segments, dim)) * 0.3
        bags.append(VideoBag(f"neg{i}", x, False, "Delivery", None))
    return bags


class TestAdagradStep:
    def test_zero_gradient_is_identity(self):
        head = micro_head()
        state = init_adagrad(head)
        new_head, new_state = adagrad_step(head, grads_like(head, 0.0), state, 0.01, 1e-8)
        for old, new in zip(head.params(), new_head.params()):
            assert np.array_equal(old, new)
        for old, new in zip(state.sum_sq.params(), new_state.sum_sq.params()):
            assert np.array_equal(old, new)
        assert new_state.step == 1

    def test_first_step_closed_form(self):
        head = micro_head()
        g = 0.5
        lr, eps = 0.01, 1e-8
        new_head, _ = adagrad_step(head, grads_like(head, g), init_adagrad(head), lr, eps)
        expected_delta = -lr * g / (g + eps)  # sqrt(g^2) = g on the first step
        for old, new in zip(head.params(), new_head.params()):
            np.testing.assert_allclose(new - old, expected_delta, rtol=1e-12)

    def test_two_equal_gradients(self):
        head = micro_head()
        g, lr, eps = 0.7, 0.01, 1e-8
        grads = grads_like(head, g)
        h1, s1 = adagrad_step(head, grads, init_adagrad(head), lr, eps)
        h2, s2 = adagrad_step(h1, grads, s1, lr, eps)
        expected_delta = -lr * g / (np.sqrt(2.0 * g * g) + eps)
        for a, b in zip(h1.params(), h2.params()):
            np.testing.assert_allclose(b - a, expected_delta, rtol=1e-12)
        assert s2.step == 2

    def test_accumulators_never_decrease(self):
        rng = np.random.default_rng(0)
        head = micro_head()
        state = init_adagrad(head)
        prev = [p.copy() for p in state.sum_sq.params()]
        for _ in range(10):
            grads = HeadGradients(
                *(rng.standard_normal(p.shape) for p in head.params())
            )
            head, state = adagrad_step(head, grads, state, 0.01, 1e-8)
            for before, after in zip(prev, state.sum_sq.params()):
                assert np.all(after >= before)
            prev = [p.copy() for p in state.sum_sq.params()]

    def test_shape_mismatch(self):
        head = micro_head()
        bad = grads_like(head, 1.0)
        bad.w1 = np.zeros((3, 3))
        with pytest.raises(ShapeMismatch):
            adagrad_step(head, bad, init_adagrad(head), 0.01, 1e-8)


class TestTrainConfig:
    def test_defaults(self):
        config = TrainConfig()
        assert config.learning_rate == 0.01
        assert config.epochs == 5000
        assert config.pairs_per_epoch == 30
        assert config.lambda1 == config.lambda2 == 8e-5
        assert config.adagrad_epsilon == 1e-8

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"learning_rate": 0.0},
            {"epochs": 0},
            {"pairs_per_epoch": 0},
            {"lambda1": -1e-9},
            {"adagrad_epsilon": 0.0},
        ],
    )
    def test_invalid_configs(self, kwargs):
        with pytest.raises(ValueError):
            TrainConfig(**kwargs)


def quick_config(**overrides):
    defaults = dict(
        epochs=5, pairs_per_epoch=4, seed=3, fusion_mode=FusionMode.GLOBAL_ONLY
    )
    defaults.update(overrides)
    return TrainConfig(**defaults)


class TestTrain:
    def test_bitwise_deterministic(self):
        bags = make_bags(np.random.default_rng(1))
        run1 = train(bags, quick_config())
        run2 = train(bags, quick_config())
        assert np.array_equal(run1.history, run2.history)
        for a, b in zip(run1.head.params(), run2.head.params()):
            assert np.array_equal(a, b)

    def test_history_length_single_epoch(self):
        bags = make_bags(np.random.default_rng(2))
        run = train(bags, quick_config(epochs=1))
        assert run.history.shape == (1, 4)

    def test_missing_class(self):
        bags = [b for b in make_bags(np.random.default_rng(3)) if b.is_positive]
        with pytest.raises(InsufficientData):
            train(bags, quick_config())

    def test_mixed_dimensions(self):
        rng = np.random.default_rng(4)
        bags = make_bags(rng)
        bags.append(VideoBag("odd", rng.standard_normal((2, 5)), False, "Pickup", None))
        with pytest.raises(DimensionMismatch):
            train(bags, quick_config())

    def test_non_finite_loss_aborts_with_epoch(self):
        rng = np.random.default_rng(5)
        bags = make_bags(rng, n_pos=2, n_neg=2)
        poisoned = VideoBag(
            "nan", np.full((3, 8), np.nan), True, "PackageTheft", None
        )
        bags.append(poisoned)
        with pytest.raises(NonFiniteLoss, match="epoch"):
            train(bags, quick_config(epochs=50))

    def test_learns_separable_data(self):
        rng = np.random.default_rng(6)
        bags = make_bags(rng, n_pos=8, n_neg=8)
        run = train(bags, quick_config(epochs=60, pairs_per_epoch=8))
        # fresh bags from the same distribution
        test_bags = make_bags(np.random.default_rng(7), n_pos=6, n_neg=6)
        hits = 0
        pairs = 0
        for pb in test_bags:
            if not pb.is_positive:
                continue
            for nb in test_bags:
                if nb.is_positive:
                    continue
                pairs += 1
                hits += ranking_satisfied(
                    score_segments(run.head, pb.embeddings),
                    score_segments(run.head, nb.embeddings),
                )
        assert hits / pairs >= 0.8

    def test_config_snapshot_is_attached(self):
        bags = make_bags(np.random.default_rng(8))
        config = quick_config()
        run = train(bags, config)
        assert run.config == config


class TestRunLog:
    def test_format(self, tmp_path):
        bags = make_bags(np.random.default_rng(9))
        run = train(bags, quick_config())
        path = tmp_path / "run.log"
        write_run_log(run, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == run.history.shape[0]
        for epoch, line in enumerate(lines, start=1):
            fields = line.split("\t")
            assert len(fields) == 5
            assert int(fields[0]) == epoch
            total, hinge, smooth, spars = map(float, fields[1:])
            assert total == run.history[epoch - 1, 0]
            assert hinge == run.history[epoch - 1, 1]
            assert smooth == run.history[epoch - 1, 2]
            assert spars == run.history[epoch - 1, 3]
