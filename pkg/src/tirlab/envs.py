"""Sparse-reward toy environments with featurised observations.

Map text format for grids: one row per line, ``#`` wall, ``.`` floor,
``S`` start, ``G`` goal. Reward is 1 on the step that enters the goal, 0
everywhere else.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

CHAIN_ACTIONS = ("left", "right")
GRID_ACTIONS = ("up", "down", "left", "right")
_GRID_MOVES = ((-1, 0), (1, 0), (0, -1), (0, 1))


def _four_rooms(size=20):
    mid = size // 2
    doors_a, doors_b = size // 5, size - size // 4
    rows = []
    for r in range(size):
        row = []
        for c in range(size):
            wall = (c == mid and r not in (doors_a, doors_b)) or (r == mid and c not in (doors_a, doors_b))
            row.append("#" if wall else ".")
        rows.append(row)
    rows[0][0] = "S"
    rows[-1][-1] = "G"
    return "\n".join("".join(r) for r in rows)


def _open_room(size):
    rows = [["."] * size for _ in range(size)]
    rows[0][0] = "S"
    rows[-1][-1] = "G"
    return "\n".join("".join(r) for r in rows)


LAYOUTS = {
    "four_rooms_20": _four_rooms(20),
    "four_rooms_10": _four_rooms(10),
    "open_5": _open_room(5),
    "open_10": _open_room(10),
}


@dataclass(frozen=True)
class Layout:
    walls: np.ndarray  # (height, width) bool
    start: tuple
    goal: tuple

    @property
    def height(self):
        return self.walls.shape[0]

    @property
    def width(self):
        return self.walls.shape[1]


def parse_layout(text):
    lines = [ln.rstrip("\r") for ln in text.strip("\n").splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty map")
    width = len(lines[0])
    if any(len(ln) != width for ln in lines):
        raise ValueError("map rows have unequal length")
    walls = np.zeros((len(lines), width), dtype=bool)
    start = goal = None
    for r, line in enumerate(lines):
        for c, ch in enumerate(line):
            if ch == "#":
                walls[r, c] = True
            elif ch == "S":
                if start is not None:
                    raise ValueError("map has more than one start")
                start = (r, c)
            elif ch == "G":
                if goal is not None:
                    raise ValueError("map has more than one goal")
                goal = (r, c)
            elif ch != ".":
                raise ValueError(f"unknown map character {ch!r}")
    if start is None or goal is None:
        raise ValueError("map needs exactly one S and one G")
    if walls.shape[0] < 3 or walls.shape[1] < 3:
        raise ValueError("grid must be at least 3x3")
    return Layout(walls, start, goal)


def load_layout(name_or_path):
    if name_or_path in LAYOUTS:
        return parse_layout(LAYOUTS[name_or_path])
    return parse_layout(Path(name_or_path).read_text())


@dataclass(frozen=True)
class EnvSpec:
    kind: str = "chain"  # "chain" or "grid"
    length: int = 40
    layout: str = "four_rooms_20"
    noise_sigma: float = 0.0
    noise_dims: int = 4
    noise_mode: str = "append"  # or "perturb"
    cap: int = 0  # 0 -> 200 for chains, 500 for grids

    def __post_init__(self):
        if self.kind not in ("chain", "grid"):
            raise ValueError(f"unknown env kind {self.kind!r}")
        if self.kind == "chain" and self.length < 3:
            raise ValueError("chain length must be >= 3")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.noise_mode not in ("append", "perturb"):
            raise ValueError(f"unknown noise_mode {self.noise_mode!r}")
        if self.noise_dims < 0 or self.cap < 0:
            raise ValueError("noise_dims and cap must be >= 0")

    @property
    def episode_cap(self):
        return self.cap or (200 if self.kind == "chain" else 500)

    @classmethod
    def named(cls, name, **overrides):
        """``chain``, ``grid`` or ``noisy-grid`` (sigma 0.25 on 4 appended dims)."""
        presets = {
            "chain": dict(kind="chain"),
            "grid": dict(kind="grid"),
            "noisy-grid": dict(kind="grid", noise_sigma=0.25),
        }
        if name not in presets:
            raise ValueError(f"unknown env {name!r}; choose from {sorted(presets)}")
        return cls(**{**presets[name], **overrides})


@dataclass(frozen=True)
class Observation:
    features: np.ndarray
    raw_state: int


def add_noise(features, sigma, rng, mode="append", dims=4):
    """Gaussian distractor: ``dims`` extra N(0, sigma) entries, or additive noise on every entry."""
    features = np.asarray(features, dtype=np.float64)
    if sigma == 0:
        return features
    if mode == "append":
        return np.concatenate([features, rng.normal(0.0, sigma, size=dims)])
    return features + rng.normal(0.0, sigma, size=features.shape)


class Env:
    """Chain or gridworld with an optional noisy-feature wrapper.

    Chain features are ``[x] + onehot(cell)`` with ``x`` in ``[-1, 1]``. Grid
    features are ``[x, y] + onehot(row) + onehot(col)``. Raw state ids are the
    cell index (chain) or ``row * width + col`` (grid).
    """

    def __init__(self, spec):
        self.spec = spec
        if spec.kind == "chain":
            self.action_count = 2
            self.n_states = spec.length
            self.start = 0
            self.goal = spec.length - 1
            self.base_dim = 1 + spec.length
        else:
            self.layout = load_layout(spec.layout)
            h, w = self.layout.height, self.layout.width
            self.action_count = 4
            self.n_states = h * w
            self.start = self.layout.start[0] * w + self.layout.start[1]
            self.goal = self.layout.goal[0] * w + self.layout.goal[1]
            self.base_dim = 2 + h + w
        extra = spec.noise_dims if spec.noise_mode == "append" and spec.noise_sigma > 0 else 0
        self.feature_dim = self.base_dim + extra
        self._table = np.stack([self._encode(i) for i in range(self.n_states)])
        self.state = self.start
        self.t = 0
        self.reached_goal = False
        self.noise_rng = np.random.default_rng(0)

    def _encode(self, raw):
        if self.spec.kind == "chain":
            length = self.spec.length
            out = np.zeros(1 + length)
            out[0] = 2.0 * raw / (length - 1) - 1.0
            out[1 + raw] = 1.0
            return out
        h, w = self.layout.height, self.layout.width
        r, c = divmod(raw, w)
        out = np.zeros(2 + h + w)
        out[0] = 2.0 * c / (w - 1) - 1.0
        out[1] = 2.0 * r / (h - 1) - 1.0
        out[2 + r] = 1.0
        out[2 + h + c] = 1.0
        return out

    def featurize(self, raw):
        """Noise-free encoding of ``raw``."""
        if not 0 <= raw < self.n_states:
            raise ValueError(f"state {raw} out of range")
        return self._table[raw].copy()

    def valid_states(self):
        if self.spec.kind == "chain":
            return list(range(self.n_states))
        return [int(i) for i in np.flatnonzero(~self.layout.walls.ravel())]

    def observe(self):
        feats = self._table[self.state]
        sigma = self.spec.noise_sigma
        if sigma > 0:
            feats = add_noise(feats, sigma, self.noise_rng, self.spec.noise_mode, self.spec.noise_dims)
        else:
            feats = feats.copy()
        return Observation(feats, int(self.state))

    def reset(self, seed=None):
        """Back to the start cell; a seed re-seeds the noise stream."""
        if seed is not None:
            self.noise_rng = np.random.default_rng(seed)
        self.state = self.start
        self.t = 0
        self.reached_goal = False
        return self.observe()

    def _move(self, action):
        if self.spec.kind == "chain":
            return max(0, self.state - 1) if action == 0 else min(self.n_states - 1, self.state + 1)
        w = self.layout.width
        r, c = divmod(self.state, w)
        dr, dc = _GRID_MOVES[action]
        nr, nc = r + dr, c + dc
        if not (0 <= nr < self.layout.height and 0 <= nc < w) or self.layout.walls[nr, nc]:
            return self.state
        return nr * w + nc

    def step(self, action):
        """Apply ``action``; returns ``(observation, r_ext, done)``.

        ``done`` is set at the goal or at the episode cap; :attr:`reached_goal`
        tells the two apart.
        """
        if not 0 <= action < self.action_count:
            raise ValueError(f"invalid action {action}")
        self.state = self._move(int(action))
        self.t += 1
        self.reached_goal = self.state == self.goal
        reward = 1.0 if self.reached_goal else 0.0
        done = self.reached_goal or self.t >= self.spec.episode_cap
        return self.observe(), reward, done
