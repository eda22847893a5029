"""Experiment configuration and its flat key-value file form (YAML mapping)."""

from dataclasses import asdict, dataclass, field, replace

import yaml

from tirlab.envs import EnvSpec
from tirlab.intrinsic import RewardEngineConfig


@dataclass(frozen=True)
class ExperimentConfig:
    env: EnvSpec = field(default_factory=EnvSpec)
    reward: RewardEngineConfig = field(default_factory=RewardEngineConfig)
    n: int = 5
    j: int = 4
    gamma: float = 0.99
    U: int = 500
    T: int = 0  # steps per rollout; 0 -> the env's default episode cap
    N: int = 64
    H: int = 64
    lr_pred: float = 1e-3
    lr_q: float = 0.1
    q_backend: str = "tabular"
    buffer_capacity: int = 0  # 0 -> 50 * T
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_fraction: float = 0.1
    seeds: tuple = (0,)
    out: str = "runs"

    def __post_init__(self):
        for name in ("n", "j", "U", "N", "H"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.T < 0 or self.buffer_capacity < 0:
            raise ValueError("T and buffer_capacity must be >= 0")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must be in (0, 1]")
        if self.lr_pred <= 0 or self.lr_q <= 0:
            raise ValueError("learning rates must be positive")
        if self.q_backend not in ("tabular", "linear"):
            raise ValueError(f"unknown q_backend {self.q_backend!r}")
        if not self.seeds:
            raise ValueError("need at least one seed")

    @property
    def steps_per_round(self):
        return self.T or self.env.episode_cap

    @property
    def capacity(self):
        return self.buffer_capacity or 50 * self.steps_per_round

    def with_(self, **changes):
        """Copy with top-level, env or reward fields replaced by name."""
        top, env, reward = {}, {}, {}
        env_names = EnvSpec.__dataclass_fields__
        reward_names = RewardEngineConfig.__dataclass_fields__
        for key, value in changes.items():
            if key in self.__dataclass_fields__:
                top[key] = value
            elif key in env_names:
                env[key] = value
            elif key in reward_names:
                reward[key] = value
            else:
                raise KeyError(f"unknown config field {key!r}")
        if env:
            top["env"] = replace(top.get("env", self.env), **env)
        if reward:
            top["reward"] = replace(top.get("reward", self.reward), **reward)
        return replace(self, **top)


# file key -> (section, field); everything else maps to a top-level field
_ALIASES = {
    "engine": ("reward", "engine"),
    "lambda": ("reward", "lam"),
    "k_mode": ("reward", "k_mode"),
    "k": ("reward", "k"),
    "k_ini": ("reward", "k_ini"),
    "alpha": ("reward", "alpha"),
    "beta": ("reward", "beta"),
    "ensemble_size": ("reward", "ensemble_size"),
    "intrinsic_scale": ("reward", "scale"),
    "chain_length": ("env", "length"),
    "layout": ("env", "layout"),
    "noise_sigma": ("env", "noise_sigma"),
    "noise_dims": ("env", "noise_dims"),
    "noise_mode": ("env", "noise_mode"),
}


def from_mapping(data):
    """Build a config from a flat mapping, e.g. ``{"env": "grid", "lambda": 0.001, "j": 4}``."""
    data = dict(data or {})
    env_name = data.pop("env", "chain")
    env_fields, reward_fields, top = {}, {}, {}
    for key, value in data.items():
        if key in _ALIASES:
            section, name = _ALIASES[key]
            (env_fields if section == "env" else reward_fields)[name] = value
        elif key == "seed":
            top["seeds"] = (int(value),)
        elif key == "seeds":
            top["seeds"] = tuple(int(s) for s in (value if isinstance(value, (list, tuple)) else str(value).split(",")))
        elif key in ExperimentConfig.__dataclass_fields__ and key not in ("env", "reward"):
            top[key] = value
        else:
            raise KeyError(f"unknown config key {key!r}")
    env = EnvSpec.named(env_name, **env_fields)
    return ExperimentConfig(env=env, reward=RewardEngineConfig(**reward_fields), **top)


def to_mapping(cfg):
    out = {"env": "grid" if cfg.env.kind == "grid" else "chain"}
    inverse = {v: k for k, v in _ALIASES.items()}
    for name, value in asdict(cfg.env).items():
        if ("env", name) in inverse:
            out[inverse[("env", name)]] = value
    for name, value in asdict(cfg.reward).items():
        out[inverse[("reward", name)]] = value
    for name in ExperimentConfig.__dataclass_fields__:
        if name not in ("env", "reward"):
            value = getattr(cfg, name)
            out[name] = list(value) if isinstance(value, tuple) else value
    return out


def load_config(path):
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if data is not None and not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a flat key-value mapping")
    return from_mapping(data)


def dump_config(cfg, path):
    with open(path, "w") as fh:
        yaml.safe_dump(to_mapping(cfg), fh, sort_keys=False)
