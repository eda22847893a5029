import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import mlp_by_hand
from tirlab import dynamics
from tirlab.dynamics import MLPParams, Transition


def random_params(m=4, actions=2, hidden=8, seed=0):
    """Params with non-zero biases so bias gradients are exercised."""
    p = dynamics.init_params(m, actions, hidden, seed)
    rng = np.random.default_rng(seed + 100)
    return MLPParams(p.w1, rng.normal(scale=0.3, size=hidden), p.w2, rng.normal(scale=0.3, size=m), action_count=actions)


def random_batch(rng, size, m=4, actions=2):
    return [
        Transition(rng.normal(size=m), int(rng.integers(actions)), 0.0, rng.normal(size=m), False)
        for _ in range(size)
    ]


def flat_loss(params, batch):
    x = dynamics.encode(params, np.stack([t.s for t in batch]), [t.a for t in batch])
    y = np.stack([t.s_next for t in batch])
    return dynamics.loss_and_grads(params, x, y)


def finite_difference_error(params, batch, eps=1e-5):
    _, grads = flat_loss(params, batch)
    worst = 0.0
    arrays = params.arrays()
    for idx, (arr, grad) in enumerate(zip(arrays, grads)):
        for pos in np.ndindex(arr.shape):
            bumped = []
            for sign in (1.0, -1.0):
                copy = [a.copy() for a in arrays]
                copy[idx][pos] += sign * eps
                bumped.append(flat_loss(MLPParams(*copy, action_count=params.action_count), batch)[0])
            numeric = (bumped[0] - bumped[1]) / (2 * eps)
            denom = max(abs(numeric), abs(grad[pos]), 1e-6)
            worst = max(worst, abs(numeric - grad[pos]) / denom)
    return worst


class TestInit:
    def test_deterministic(self):
        a = dynamics.init_params(4, 2, 8, seed=7)
        b = dynamics.init_params(4, 2, 8, seed=7)
        assert a.equals(b)

    def test_zero_biases_and_shapes(self):
        p = dynamics.init_params(4, 2, 8, seed=7)
        assert np.all(p.b1 == 0) and np.all(p.b2 == 0)
        assert p.w1.shape == (8, 6)
        assert p.w2.shape == (4, 8)

    def test_fan_in_scaling(self):
        p = dynamics.init_params(30, 4, 50, seed=1)
        assert np.abs(p.w1).max() <= 1 / np.sqrt(34)
        assert np.abs(p.w2).max() <= 1 / np.sqrt(50)

    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            dynamics.init_params(0, 2, 8)


class TestForward:
    def test_zero_weights_give_output_bias(self):
        z = MLPParams(np.zeros((8, 6)), np.zeros(8), np.zeros((4, 8)), np.zeros(4), action_count=2)
        np.testing.assert_array_equal(dynamics.forward(z, np.ones(4), 1), np.zeros(4))

    def test_pure(self):
        p = random_params()
        s = np.arange(4.0)
        np.testing.assert_array_equal(dynamics.forward(p, s, 1), dynamics.forward(p, s, 1))

    def test_matches_scalar_oracle(self):
        p = random_params(seed=3)
        s = np.array([0.3, -1.2, 0.5, 2.0])
        x = list(s) + [0.0, 1.0]
        expected = mlp_by_hand(p.w1.tolist(), p.b1.tolist(), p.w2.tolist(), p.b2.tolist(), x)
        np.testing.assert_allclose(dynamics.forward(p, s, 1), expected, atol=1e-14)

    def test_dimension_mismatch(self):
        p = random_params()
        with pytest.raises(ValueError):
            dynamics.forward(p, np.zeros(5), 0)
        with pytest.raises(ValueError):
            dynamics.forward(p, np.zeros(4), 2)


class TestLoss:
    def test_examples(self):
        assert dynamics.loss([1.0, 2.0], [1.0, 2.0]) == 0.0
        assert dynamics.loss([1.0, 0.0], [0.0, 0.0]) == 0.5
        assert dynamics.loss([1.0, 1.0], [0.0, 0.0]) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            dynamics.loss([1.0], [1.0, 2.0])


class TestTrainStep:
    def test_zero_gradient_when_targets_are_predictions(self):
        p = random_params()
        rng = np.random.default_rng(0)
        s, a = rng.normal(size=(5, 4)), rng.integers(0, 2, 5)
        targets = dynamics.forward(p, s, a)
        batch = [Transition(s[i], int(a[i]), 0.0, targets[i], False) for i in range(5)]
        new, value = dynamics.train_step(p, batch, lr=0.1)
        assert value == 0.0
        assert new.equals(p)

    def test_small_step_does_not_increase_loss(self):
        p = random_params(seed=2)
        batch = random_batch(np.random.default_rng(2), 1)
        new, before = dynamics.train_step(p, batch, lr=1e-4)
        _, after = dynamics.train_step(new, batch, lr=1e-4)
        assert after <= before

    def test_returns_pre_update_loss(self):
        p = random_params(seed=4)
        batch = random_batch(np.random.default_rng(4), 6)
        expected = np.mean([dynamics.loss(dynamics.forward(p, t.s, t.a), t.s_next) for t in batch])
        _, value = dynamics.train_step(p, batch, lr=0.01)
        assert value == pytest.approx(expected, abs=1e-14)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        for draw in range(3):
            p = random_params(seed=draw)
            assert finite_difference_error(p, random_batch(rng, 4)) < 1e-4

    def test_deterministic_and_permutation_invariant(self):
        p = random_params(seed=6)
        batch = random_batch(np.random.default_rng(6), 8)
        a, la = dynamics.train_step(p, batch, lr=0.05)
        b, lb = dynamics.train_step(p, batch, lr=0.05)
        assert a.equals(b) and la == lb
        c, lc = dynamics.train_step(p, batch[::-1], lr=0.05)
        assert lc == pytest.approx(la, abs=1e-12)
        for x, y in zip(a.arrays(), c.arrays()):
            np.testing.assert_allclose(x, y, atol=1e-12)

    def test_rejects_empty_batch_and_bad_lr(self):
        p = random_params()
        with pytest.raises(ValueError):
            dynamics.train_step(p, [], lr=0.1)
        with pytest.raises(ValueError):
            dynamics.train_step(p, random_batch(np.random.default_rng(0), 1), lr=0.0)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.floats(1e-4, 0.5))
    def test_parameters_stay_finite(self, seed, lr):
        p = random_params(seed=seed % 50)
        new, _ = dynamics.train_step(p, random_batch(np.random.default_rng(seed), 3), lr=lr)
        assert all(np.all(np.isfinite(x)) for x in new.arrays())
