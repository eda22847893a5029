"""Intrinsic reward engines: temporal inconsistency (TIR) and three baselines.

Each engine owns its learned state and exposes the same two calls used by the
training loop::

    r_int = engine.rewards(s, a, s_next, k)   # (N,) array, read-only
    loss = engine.update(s, a, s_next)        # one predictor step, pre-step loss
"""

from dataclasses import dataclass

import numpy as np

from tirlab import dynamics, linalg
from tirlab.dynamics import encode, fit_step, init_mlp, init_params, mlp_forward
from tirlab.snapshots import SnapshotRing

ENGINES = ("tir", "pred_error", "disagreement", "rnd", "none")
DEFAULT_LAMBDA = 0.001


@dataclass(frozen=True)
class RewardEngineConfig:
    engine: str = "tir"
    lam: float = DEFAULT_LAMBDA
    k_mode: str = "fixed"
    k: float = 2.0
    k_ini: float = 2.0
    alpha: float = 1.0
    beta: float = 0.0
    ensemble_size: int = 5
    scale: float = 1.0  # baselines only; TIR is scaled by lam

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}; choose from {ENGINES}")
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.alpha < 0 or self.beta < 0 or (self.alpha == 0 and self.beta == 0):
            raise ValueError("alpha and beta must be non-negative and not both zero")
        if self.k_mode not in ("fixed", "scheduled"):
            raise ValueError(f"k_mode must be 'fixed' or 'scheduled', got {self.k_mode!r}")
        if self.k < 1 or self.k_ini < 1:
            raise ValueError("k and k_ini must be >= 1")
        if self.engine == "disagreement" and self.ensemble_size < 2:
            raise ValueError("disagreement needs an ensemble of at least 2")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def current_k(self, u, U):
        if self.k_mode == "fixed":
            return float(self.k)
        return linalg.k_schedule(u, U, self.k_ini)


# ---------------------------------------------------------------------------
# per-transition reward functions


def tir_reward(p, k, lam=DEFAULT_LAMBDA):
    """``lam * sum(sigma_i ** (1/k))`` over the singular values of the prediction matrix."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return lam * linalg.weighted_nuclear_norm(p, k)


def batch_tir_reward(stack, k, lam=DEFAULT_LAMBDA):
    return lam * linalg.spectrum_power_sum(linalg.batch_singular_values(stack), k)


def pred_error_reward(params, t):
    return dynamics.loss(dynamics.forward(params, t.s, t.a), t.s_next)


def disagreement_reward(members, s, a):
    """Mean over output dims of the across-member population variance."""
    if len(members) < 2:
        raise ValueError("disagreement needs at least 2 members")
    preds = np.stack([dynamics.forward(p, s, a) for p in members])
    return np.var(preds, axis=0).mean(axis=-1)


def rnd_reward(rnd, s):
    """Half squared gap between the trained predictor and the frozen target at ``s``."""
    gap = rnd.gap(s)
    return float(gap[0]) if np.ndim(s) == 1 else gap


def combine(r_int, r_ext, alpha, beta):
    return alpha * r_int + beta * r_ext


# ---------------------------------------------------------------------------
# engines


class NoIntrinsic:
    name = "none"

    def rewards(self, s, a, s_next, k):
        return np.zeros(len(s))

    def update(self, s, a, s_next):
        return 0.0


class TIREngine:
    """Single predictor plus a ring of its past generations."""

    name = "tir"

    def __init__(self, state_dim, action_count, hidden, lr, n=5, j=4, lam=DEFAULT_LAMBDA, seed=0):
        self.params = init_params(state_dim, action_count, hidden, seed)
        self.ring = SnapshotRing(self.params, n=n, j=j)
        self.lr = lr
        self.lam = lam

    def rewards(self, s, a, s_next, k):
        return batch_tir_reward(self.ring.predict_matrices(s, a), k, self.lam)

    def update(self, s, a, s_next):
        self.params, value = fit_step(self.params, encode(self.params, s, a), s_next, self.lr)
        self.rotated = self.ring.observe_round(self.params)
        return value


class PredErrorEngine:
    """Forward-model error on raw features (no learned embedding)."""

    name = "pred_error"

    def __init__(self, state_dim, action_count, hidden, lr, scale=1.0, seed=0):
        self.params = init_params(state_dim, action_count, hidden, seed)
        self.lr = lr
        self.scale = scale

    def rewards(self, s, a, s_next, k):
        diff = mlp_forward(self.params, encode(self.params, s, a)) - s_next
        return self.scale * 0.5 * np.sum(diff * diff, axis=1)

    def update(self, s, a, s_next):
        self.params, value = fit_step(self.params, encode(self.params, s, a), s_next, self.lr)
        return value


class DisagreementEngine:
    """Ensemble of independently seeded predictors trained on the same batches."""

    name = "disagreement"

    def __init__(self, state_dim, action_count, hidden, lr, ensemble_size=5, scale=1.0, seed=0):
        if ensemble_size < 2:
            raise ValueError("disagreement needs at least 2 members")
        self.members = [init_params(state_dim, action_count, hidden, seed + 1000 * i) for i in range(ensemble_size)]
        self.lr = lr
        self.scale = scale

    def rewards(self, s, a, s_next, k):
        x = encode(self.members[0], s, a)
        preds = np.stack([mlp_forward(p, x) for p in self.members])
        return self.scale * np.var(preds, axis=0).mean(axis=1)

    def update(self, s, a, s_next):
        x = encode(self.members[0], s, a)
        losses = []
        for i, p in enumerate(self.members):
            self.members[i], value = fit_step(p, x, s_next, self.lr)
            losses.append(value)
        return float(np.mean(losses))


class RNDEngine:
    """Predictor regressing a frozen random target network; reward is the gap on ``s_next``."""

    name = "rnd"

    def __init__(self, state_dim, hidden, lr, scale=1.0, seed=0):
        self.target = init_mlp(state_dim, hidden, state_dim, seed + 7919).frozen_copy()
        self.predictor = init_mlp(state_dim, hidden, state_dim, seed)
        self.lr = lr
        self.scale = scale

    def gap(self, states):
        x = np.atleast_2d(states)
        diff = mlp_forward(self.predictor, x) - mlp_forward(self.target, x)
        return 0.5 * np.sum(diff * diff, axis=1)

    def rewards(self, s, a, s_next, k):
        return self.scale * self.gap(s_next)

    def update(self, s, a, s_next):
        x = np.atleast_2d(np.asarray(s_next, dtype=np.float64))
        self.predictor, value = fit_step(self.predictor, x, mlp_forward(self.target, x), self.lr)
        return value


def make_engine(cfg, state_dim, action_count, hidden, lr, n=5, j=4, seed=0):
    if cfg.engine == "tir":
        return TIREngine(state_dim, action_count, hidden, lr, n=n, j=j, lam=cfg.lam, seed=seed)
    if cfg.engine == "pred_error":
        return PredErrorEngine(state_dim, action_count, hidden, lr, scale=cfg.scale, seed=seed)
    if cfg.engine == "disagreement":
        return DisagreementEngine(state_dim, action_count, hidden, lr, cfg.ensemble_size, cfg.scale, seed=seed)
    if cfg.engine == "rnd":
        return RNDEngine(state_dim, hidden, lr, scale=cfg.scale, seed=seed)
    return NoIntrinsic()
