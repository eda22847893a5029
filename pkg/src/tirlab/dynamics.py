"""Forward-dynamics predictor: one tanh hidden layer, linear output, plain gradient descent."""

from dataclasses import dataclass

import numpy as np

DEFAULT_HIDDEN = 64
DEFAULT_LR = 1e-3


@dataclass(frozen=True)
class Transition:
    s: np.ndarray
    a: int
    r_ext: float
    s_next: np.ndarray
    done: bool


@dataclass(frozen=True)
class MLPParams:
    """Weights of ``x -> W2 tanh(W1 x + b1) + b2``.

    ``action_count`` records how many one-hot action slots trail the state
    features in the input; 0 for state-only nets (the RND pair).
    """

    w1: np.ndarray  # (H, in_dim)
    b1: np.ndarray  # (H,)
    w2: np.ndarray  # (out_dim, H)
    b2: np.ndarray  # (out_dim,)
    action_count: int = 0

    @property
    def in_dim(self):
        return self.w1.shape[1]

    @property
    def state_dim(self):
        return self.w1.shape[1] - self.action_count

    @property
    def hidden(self):
        return self.w1.shape[0]

    @property
    def out_dim(self):
        return self.w2.shape[0]

    def arrays(self):
        return (self.w1, self.b1, self.w2, self.b2)

    def frozen_copy(self):
        arrays = [np.array(x, copy=True) for x in self.arrays()]
        for x in arrays:
            x.flags.writeable = False
        return MLPParams(*arrays, action_count=self.action_count)

    def equals(self, other):
        return self.action_count == other.action_count and all(
            np.array_equal(x, y) for x, y in zip(self.arrays(), other.arrays())
        )


def init_mlp(in_dim, hidden, out_dim, seed, action_count=0):
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases."""
    if in_dim < 1 or hidden < 1 or out_dim < 1:
        raise ValueError("layer widths must be >= 1")
    rng = np.random.default_rng(seed)
    lim1 = 1.0 / np.sqrt(in_dim)
    lim2 = 1.0 / np.sqrt(hidden)
    w1 = rng.uniform(-lim1, lim1, size=(hidden, in_dim))
    w2 = rng.uniform(-lim2, lim2, size=(out_dim, hidden))
    return MLPParams(w1, np.zeros(hidden), w2, np.zeros(out_dim), action_count=action_count)


def init_params(m, action_count, hidden=DEFAULT_HIDDEN, seed=0):
    """Predictor for ``m``-dim states and ``action_count`` discrete actions."""
    if m < 1 or action_count < 1:
        raise ValueError("state width and action count must be >= 1")
    return init_mlp(m + action_count, hidden, m, seed, action_count=action_count)


def encode(params, states, actions=None):
    """Stack state features with one-hot actions into the network input."""
    s = np.atleast_2d(np.asarray(states, dtype=np.float64))
    if s.shape[1] != params.state_dim:
        raise ValueError(f"state width {s.shape[1]} != {params.state_dim}")
    if params.action_count == 0:
        return s
    if actions is None:
        raise ValueError("this network needs actions")
    a = np.atleast_1d(np.asarray(actions, dtype=np.int64))
    if a.shape[0] != s.shape[0]:
        raise ValueError("states and actions differ in length")
    if np.any(a < 0) or np.any(a >= params.action_count):
        raise ValueError(f"action index outside [0, {params.action_count})")
    onehot = np.zeros((s.shape[0], params.action_count))
    onehot[np.arange(s.shape[0]), a] = 1.0
    return np.concatenate([s, onehot], axis=1)


def _hidden(params, x):
    return np.tanh(x @ params.w1.T + params.b1)


def mlp_forward(params, x):
    """Batched forward pass on pre-encoded inputs ``(N, in_dim) -> (N, out_dim)``."""
    return _hidden(params, x) @ params.w2.T + params.b2


def forward(params, s, a=None):
    """Predicted next-state features for one state (and action) or a batch of them."""
    single = np.ndim(s) == 1
    out = mlp_forward(params, encode(params, s, a))
    return out[0] if single else out


def loss(pred, target):
    """Half squared error."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {target.shape}")
    d = pred - target
    return 0.5 * float(np.sum(d * d))


def loss_and_grads(params, x, y):
    """Mean half-squared-error over the batch and its gradient w.r.t. each array."""
    n = x.shape[0]
    h = _hidden(params, x)
    out = h @ params.w2.T + params.b2
    diff = out - y
    value = 0.5 * float(np.sum(diff * diff)) / n
    dout = diff / n
    gw2 = dout.T @ h
    gb2 = dout.sum(axis=0)
    dz = (dout @ params.w2) * (1.0 - h * h)
    gw1 = dz.T @ x
    gb1 = dz.sum(axis=0)
    return value, (gw1, gb1, gw2, gb2)


def fit_step(params, x, y, lr):
    """One full-batch gradient step toward targets ``y``; returns (new params, pre-step loss)."""
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    if lr <= 0:
        raise ValueError("learning rate must be positive")
    value, grads = loss_and_grads(params, x, y)
    new = [p - lr * g for p, g in zip(params.arrays(), grads)]
    for arr in new:
        if not np.all(np.isfinite(arr)):
            raise FloatingPointError("predictor parameters diverged")
    return MLPParams(*new, action_count=params.action_count), value


def train_step(params, batch, lr=DEFAULT_LR):
    """Gradient step on a list of :class:`Transition` or an ``(s, a, s_next)`` array triple."""
    if isinstance(batch, tuple):
        s, a, s_next = batch
    else:
        if len(batch) == 0:
            raise ValueError("empty batch")
        s = np.stack([t.s for t in batch])
        a = np.array([t.a for t in batch])
        s_next = np.stack([t.s_next for t in batch])
    return fit_step(params, encode(params, s, a), np.asarray(s_next, dtype=np.float64), lr)
