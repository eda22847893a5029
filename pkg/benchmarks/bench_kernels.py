"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5] [--rounds 100]

Each case is run once per backend to warm up (this triggers JIT compilation
for numba), then timed ``--repeat`` times; the best time is reported.
Both backends must agree numerically, otherwise the case is flagged.
"""

import argparse
import time

import numpy as np

from tirlab import linalg, set_backend
from tirlab._accel import HAVE_NUMBA
from tirlab.agent import QAgent
from tirlab.config import ExperimentConfig
from tirlab.envs import EnvSpec
from tirlab.harness import run_experiment


def case_batch_svd(rng):
    stack = rng.normal(size=(256, 42, 5))
    return lambda: linalg.batch_singular_values(stack)


def case_sym_eig(rng):
    a = rng.normal(size=(24, 24))
    g = a @ a.T
    return lambda: linalg.sym_eigenvalues(g)


def case_td_tabular(rng):
    n, size = 400, 4096
    s = rng.integers(n, size=size)
    a = rng.integers(4, size=size)
    r = rng.normal(size=size)
    s2 = rng.integers(n, size=size)
    d = rng.random(size) < 0.01

    def run():
        agent = QAgent(n, 1, 4)
        agent.update(s, a, r, s2, d)
        return agent.table

    return run


def case_run(rounds):
    cfg = ExperimentConfig(env=EnvSpec.named("grid"), U=rounds, N=256, H=32, lr_pred=0.1).with_(alpha=1.0, beta=1.0)
    return lambda: run_experiment(cfg, 0).column("coverage")


def best_of(fn, repeat):
    out = fn()
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--rounds", type=int, default=100, help="rounds for the end-to-end grid run")
    args = parser.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    cases = {
        "batch_singular_values 256x(42x5)": lambda: case_batch_svd(np.random.default_rng(0)),
        "sym_eigenvalues 24x24": lambda: case_sym_eig(np.random.default_rng(0)),
        "td_tabular 4096 updates": lambda: case_td_tabular(np.random.default_rng(0)),
        f"grid run, {args.rounds} rounds": lambda: case_run(args.rounds),
    }
    print(f"{'case':<36}{'numpy s':>10}{'numba s':>10}{'speedup':>9}  agree")
    for name, make in cases.items():
        timings, outputs = {}, {}
        for which in ("numpy", "numba"):
            set_backend(which)
            timings[which], outputs[which] = best_of(make(), 1 if "run" in name else args.repeat)
        agree = np.allclose(outputs["numpy"], outputs["numba"], rtol=1e-9, atol=1e-9)
        print(f"{name:<36}{timings['numpy']:>10.4f}{timings['numba']:>10.4f}"
              f"{timings['numpy'] / timings['numba']:>8.1f}x  {'yes' if agree else 'NO'}")


if __name__ == "__main__":
    main()
