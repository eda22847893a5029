"""Epsilon-greedy one-step Q-learning, tabular or linear in the features."""

import numpy as np

from tirlab import _accel, _kernels


def epsilon_at(step, total_steps, start=1.0, end=0.05, fraction=0.1):
    """Linear anneal from ``start`` to ``end`` over the first ``fraction`` of ``total_steps``."""
    horizon = max(1.0, fraction * total_steps)
    if step >= horizon:
        return end
    return start + (end - start) * step / horizon


class QAgent:
    """Action values over raw state ids (``tabular``) or over features (``linear``)."""

    def __init__(self, n_states, feature_dim, action_count, backend="tabular", lr=0.1, gamma=0.99, epsilon=1.0):
        if backend not in ("tabular", "linear"):
            raise ValueError(f"unknown backend {backend!r}")
        if not 0 < gamma <= 1:
            raise ValueError("gamma must be in (0, 1]")
        if not 0 <= epsilon <= 1:
            raise ValueError("epsilon must be in [0, 1]")
        if lr <= 0:
            raise ValueError("learning rate must be positive")
        self.backend = backend
        self.action_count = action_count
        self.lr = lr
        self.gamma = gamma
        self.epsilon = epsilon
        if backend == "tabular":
            self.table = np.zeros((n_states, action_count))
        else:
            self.table = np.zeros((action_count, feature_dim))

    def values(self, obs):
        if self.backend == "tabular":
            return self.table[obs.raw_state]
        return self.table @ obs.features

    def select_action(self, obs, rng):
        """Uniform action with probability epsilon, else the greedy one (lowest index on ties)."""
        if rng.random() < self.epsilon:
            return int(rng.integers(self.action_count))
        return int(np.argmax(self.values(obs)))

    def update(self, states, actions, rewards, next_states, dones):
        """Sequential TD(0) backups over the batch in order.

        ``states``/``next_states`` are raw ids for the tabular backend and
        feature rows for the linear one. ``rewards`` are already combined.
        """
        rewards = np.asarray(rewards, dtype=np.float64)
        if not np.all(np.isfinite(rewards)):
            raise ValueError("non-finite reward in batch")
        actions = np.asarray(actions, dtype=np.int64)
        dones = np.asarray(dones, dtype=np.bool_)
        if self.backend == "tabular":
            kernel = _kernels.td_tabular_numba if _accel.NUMBA_ENABLED else _kernels.td_tabular_python
            s = np.asarray(states, dtype=np.int64)
            s2 = np.asarray(next_states, dtype=np.int64)
        else:
            kernel = _kernels.td_linear_numba if _accel.NUMBA_ENABLED else _kernels.td_linear_python
            s = np.asarray(states, dtype=np.float64)
            s2 = np.asarray(next_states, dtype=np.float64)
            if not (np.all(np.isfinite(s)) and np.all(np.isfinite(s2))):
                raise ValueError("non-finite features in batch")
        kernel(self.table, s, actions, rewards, s2, dones, float(self.lr), float(self.gamma))
        return self
