"""The training loop, run logs, CSV output and multi-engine comparisons.

One round of :func:`run_experiment`:

1. roll out one episode of at most ``T`` steps with the current policy;
2. sample ``N`` transitions uniformly from the replay buffer;
3. score them with the intrinsic engine (TIR reads the snapshot ring here);
4. combine ``alpha * r_int + beta * r_ext``;
5. take one predictor step, which may rotate the snapshot ring;
6. move ``k`` along its schedule;
7. apply the Q-learning backups on the sampled batch.
"""

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from tirlab.agent import QAgent, epsilon_at
from tirlab.envs import Env
from tirlab.intrinsic import combine, make_engine

log = logging.getLogger(__name__)

CSV_HEADER = ("round", "steps", "ext_return", "mean_int_reward", "pred_loss", "k", "coverage", "wallclock_ms")


@dataclass(frozen=True)
class RoundRecord:
    round: int
    steps: int
    ext_return: float
    mean_int_reward: float
    pred_loss: float
    k: float
    coverage: int
    wallclock_ms: float
    rotated: bool = False


@dataclass
class RunLog:
    records: list = field(default_factory=list)

    def append(self, record):
        if self.records and record.round <= self.records[-1].round:
            raise ValueError("rounds must be strictly increasing")
        self.records.append(record)

    @property
    def final(self):
        return self.records[-1]

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])

    def goal_rate(self):
        """Fraction of played rounds whose episode reached the goal."""
        played = [r.ext_return for r in self.records if r.round > 0]
        return float(np.mean(np.asarray(played) > 0)) if played else 0.0

    def rotation_rounds(self):
        return [r.round for r in self.records if r.rotated]


class RunError(RuntimeError):
    """A run aborted; ``round`` is where it failed and ``log`` holds the rounds before it."""

    def __init__(self, message, round_, log_):
        super().__init__(f"round {round_}: {message}")
        self.round = round_
        self.log = log_


class ReplayBuffer:
    """Fixed-capacity FIFO of transitions, sampled uniformly with replacement."""

    def __init__(self, capacity, feature_dim):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.s = np.zeros((capacity, feature_dim))
        self.s_next = np.zeros((capacity, feature_dim))
        self.raw = np.zeros(capacity, dtype=np.int64)
        self.raw_next = np.zeros(capacity, dtype=np.int64)
        self.a = np.zeros(capacity, dtype=np.int64)
        self.r = np.zeros(capacity)
        self.done = np.zeros(capacity, dtype=bool)
        self.size = 0
        self._next = 0

    def __len__(self):
        return self.size

    def add(self, obs, action, reward, next_obs, terminal):
        i = self._next
        self.s[i] = obs.features
        self.raw[i] = obs.raw_state
        self.a[i] = action
        self.r[i] = reward
        self.s_next[i] = next_obs.features
        self.raw_next[i] = next_obs.raw_state
        self.done[i] = terminal
        self._next = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size, rng):
        return rng.integers(0, self.size, size=batch_size)


def coverage(visits):
    """Number of distinct raw states in ``visits``."""
    return len(set(visits))


def hns(agent_score, random_score, human_score):
    """Human-normalised score: 0 at the random score, 1 at the human score."""
    denom = human_score - random_score
    if denom == 0:
        raise ZeroDivisionError("human and random scores are equal")
    return (agent_score - random_score) / denom


def run_experiment(cfg, seed=None):
    """Run every round of one (config, seed) cell and return its :class:`RunLog`."""
    seed = cfg.seeds[0] if seed is None else seed
    T = cfg.steps_per_round
    env = Env(replace(cfg.env, cap=T))
    rng = np.random.default_rng(seed)
    rc = cfg.reward
    engine = make_engine(rc, env.feature_dim, env.action_count, cfg.H, cfg.lr_pred, n=cfg.n, j=cfg.j, seed=seed)
    agent = QAgent(env.n_states, env.feature_dim, env.action_count, cfg.q_backend, cfg.lr_q, cfg.gamma, cfg.eps_start)
    buffer = ReplayBuffer(cfg.capacity, env.feature_dim)
    tabular = cfg.q_backend == "tabular"

    runlog = RunLog()
    k = rc.current_k(0, cfg.U)
    runlog.append(RoundRecord(0, 0, 0.0, 0.0, 0.0, k, 0, 0.0))
    visited = set()
    total_steps = cfg.U * T
    steps = 0
    obs = env.reset(seed)
    for u in range(1, cfg.U + 1):
        tic = time.perf_counter()
        try:
            if u > 1:
                obs = env.reset()
            visited.add(obs.raw_state)
            ep_return = 0.0
            for _ in range(T):
                agent.epsilon = epsilon_at(steps, total_steps, cfg.eps_start, cfg.eps_end, cfg.eps_fraction)
                action = agent.select_action(obs, rng)
                next_obs, r_ext, done = env.step(action)
                buffer.add(obs, action, r_ext, next_obs, env.reached_goal)
                visited.add(next_obs.raw_state)
                ep_return += r_ext
                steps += 1
                obs = next_obs
                if done:
                    break

            idx = buffer.sample(cfg.N, rng)
            s, a, s_next = buffer.s[idx], buffer.a[idx], buffer.s_next[idx]
            r_int = engine.rewards(s, a, s_next, k)
            r_total = combine(r_int, buffer.r[idx], rc.alpha, rc.beta)
            pred_loss = engine.update(s, a, s_next)
            rotated = bool(getattr(engine, "rotated", False))
            k = rc.current_k(u, cfg.U)
            if tabular:
                agent.update(buffer.raw[idx], a, r_total, buffer.raw_next[idx], buffer.done[idx])
            else:
                agent.update(s, a, r_total, s_next, buffer.done[idx])
        except (ValueError, ArithmeticError, RuntimeError) as exc:
            raise RunError(str(exc), u, runlog) from exc
        wall = (time.perf_counter() - tic) * 1000.0
        runlog.append(
            RoundRecord(u, steps, ep_return, float(np.mean(r_int)), float(pred_loss), k, len(visited), wall, rotated)
        )
    return runlog


# ---------------------------------------------------------------------------
# CSV I/O

_FORMATS = ("{:d}", "{:d}", "{:.6f}", "{:.12f}", "{:.12f}", "{:.12f}", "{:d}", "{:.3f}")


def emit_csv(runlog, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in runlog.records:
            values = [getattr(rec, name) for name in CSV_HEADER]
            writer.writerow([fmt.format(v) for fmt, v in zip(_FORMATS, values)])
    return path


def read_csv(path):
    runlog = RunLog()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            runlog.append(
                RoundRecord(
                    int(row["round"]),
                    int(row["steps"]),
                    float(row["ext_return"]),
                    float(row["mean_int_reward"]),
                    float(row["pred_loss"]),
                    float(row["k"]),
                    int(row["coverage"]),
                    float(row["wallclock_ms"]),
                )
            )
    return runlog


# ---------------------------------------------------------------------------
# engine comparison

SUMMARY_HEADER = (
    "engine", "runs", "failed", "ext_return_mean", "ext_return_std",
    "coverage_mean", "coverage_std", "goal_rate_mean",
)


def _run_cell(cfg, engine, seed, out_dir):
    cell_cfg = cfg.with_(engine=engine)
    path = Path(out_dir) / f"{engine}_seed{seed}.csv"
    try:
        runlog = run_experiment(cell_cfg, seed)
    except Exception as exc:  # recorded per cell; the other cells still run
        log.error("engine=%s seed=%s failed: %s", engine, seed, exc)
        return engine, seed, None, str(exc)
    emit_csv(runlog, path)
    return engine, seed, runlog, None


def summarize(results, engines):
    """Per-engine mean/std of final extrinsic return and final coverage (population std)."""
    rows = []
    for engine in engines:
        logs = [r for e, _, r, err in results if e == engine and err is None]
        failed = sum(1 for e, _, _, err in results if e == engine and err is not None)
        ret = np.array([lg.final.ext_return for lg in logs], dtype=float)
        cov = np.array([lg.final.coverage for lg in logs], dtype=float)
        goal = np.array([lg.goal_rate() for lg in logs], dtype=float)
        nan = math.nan
        rows.append(
            {
                "engine": engine,
                "runs": len(logs),
                "failed": failed,
                "ext_return_mean": ret.mean() if logs else nan,
                "ext_return_std": ret.std() if logs else nan,
                "coverage_mean": cov.mean() if logs else nan,
                "coverage_std": cov.std() if logs else nan,
                "goal_rate_mean": goal.mean() if logs else nan,
            }
        )
    return rows


def write_summary(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_HEADER, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in row.items()})


def compare_engines(cfg, engines, seeds, out_dir, jobs=1):
    """Run every (engine, seed) cell, write one CSV per run plus ``summary.csv``.

    Returns ``(summary_rows, results)`` where ``results`` holds
    ``(engine, seed, runlog_or_None, error_or_None)`` per cell.
    """
    if not seeds:
        raise ValueError("need at least one seed")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cells = [(engine, seed) for engine in engines for seed in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_cell, cfg, e, s, out_dir) for e, s in cells]
            results = [f.result() for f in futures]
    else:
        results = [_run_cell(cfg, e, s, out_dir) for e, s in cells]
    rows = summarize(results, engines)
    write_summary(rows, out_dir / "summary.csv")
    return rows, results
