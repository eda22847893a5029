"""Sliding window of frozen predictor generations."""

import numpy as np

from tirlab.dynamics import encode, mlp_forward


class SnapshotRing:
    """``n`` frozen copies of the predictor, oldest first.

    Every slot starts as a copy of the initial parameters. Each completed
    update round is reported through :meth:`observe_round`; every ``j``-th one
    drops the oldest slot and appends the live parameters.
    """

    def __init__(self, initial, n=5, j=4):
        if n < 2:
            raise ValueError(f"need at least 2 snapshots, got {n}")
        if j < 1:
            raise ValueError(f"rotation interval must be >= 1, got {j}")
        self.n = n
        self.j = j
        frozen = initial.frozen_copy()
        self.slots = [frozen] * n
        self.captured_at = [0] * n
        self.rounds_seen = 0
        self.rotations = 0

    def observe_round(self, current):
        """Count one update round; returns True when it triggered a rotation."""
        self.rounds_seen += 1
        if self.rounds_seen % self.j:
            return False
        self.slots = self.slots[1:] + [current.frozen_copy()]
        self.captured_at = self.captured_at[1:] + [self.rounds_seen]
        self.rotations += 1
        return True

    def predict_matrices(self, states, actions):
        """Prediction matrices for a batch, shape ``(N, m, n)``; column ``c`` is slot ``c``."""
        x = encode(self.slots[0], states, actions)
        return np.stack([mlp_forward(p, x) for p in self.slots], axis=2)

    def predict_matrix(self, s, a):
        """``m x n`` matrix of next-state predictions for one state-action pair."""
        return self.predict_matrices(np.asarray(s)[None, :], [a])[0]

    def __eq__(self, other):
        if not isinstance(other, SnapshotRing):
            return NotImplemented
        return (
            (self.n, self.j, self.rounds_seen, self.captured_at)
            == (other.n, other.j, other.rounds_seen, other.captured_at)
            and all(a.equals(b) for a, b in zip(self.slots, other.slots))
        )

    __hash__ = None
