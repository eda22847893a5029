"""Command line: ``tirlab run``, ``tirlab compare`` and ``tirlab hns``."""

import argparse
import logging
import sys
from pathlib import Path

from tirlab.config import ExperimentConfig, load_config
from tirlab.envs import EnvSpec
from tirlab.harness import RunError, compare_engines, emit_csv, hns, run_experiment
from tirlab.intrinsic import ENGINES


def _csv_list(text, cast=str):
    return [cast(x) for x in text.split(",") if x.strip()]


def _apply_overrides(cfg, args):
    if getattr(args, "env", None):
        cur = cfg.env
        keep = dict(length=cur.length, layout=cur.layout, noise_dims=cur.noise_dims, noise_mode=cur.noise_mode)
        if args.env == "noisy-grid" and cur.noise_sigma > 0:
            keep["noise_sigma"] = cur.noise_sigma
        cfg = cfg.with_(env=EnvSpec.named(args.env, **keep))
    if getattr(args, "engine", None):
        cfg = cfg.with_(engine=args.engine)
    if getattr(args, "steps", None):
        cfg = cfg.with_(U=max(1, args.steps // cfg.steps_per_round))
    return cfg


def _load(path):
    return load_config(path) if path else ExperimentConfig()


def cmd_run(args):
    cfg = _apply_overrides(_load(args.config), args)
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    out = Path(args.out or cfg.out)
    try:
        runlog = run_experiment(cfg, seed)
    except RunError as exc:
        if exc.log.records:
            emit_csv(exc.log, out / f"{cfg.reward.engine}_seed{seed}.partial.csv")
        raise
    path = emit_csv(runlog, out / f"{cfg.reward.engine}_seed{seed}.csv")
    f = runlog.final
    print(f"{path}: rounds={f.round} steps={f.steps} coverage={f.coverage} "
          f"goal_rate={runlog.goal_rate():.4f} final_ext_return={f.ext_return:g}")
    return 0


def cmd_compare(args):
    cfg = _apply_overrides(_load(args.config), args)
    engines = _csv_list(args.engines)
    for e in engines:
        if e not in ENGINES:
            raise ValueError(f"unknown engine {e!r}; choose from {', '.join(ENGINES)}")
    seeds = _csv_list(args.seeds, int) if args.seeds else list(cfg.seeds)
    rows, results = compare_engines(cfg, engines, seeds, args.out or cfg.out, jobs=args.jobs)
    for row in rows:
        print(f"{row['engine']:>12}  runs={row['runs']} failed={row['failed']}  "
              f"ext_return={row['ext_return_mean']:.3f}±{row['ext_return_std']:.3f}  "
              f"coverage={row['coverage_mean']:.1f}±{row['coverage_std']:.1f}")
    return 1 if any(err for *_, err in results) else 0


def cmd_hns(args):
    print(f"{hns(args.agent, args.random, args.human):.6f}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="tirlab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and write its CSV")
    run.add_argument("--config")
    run.add_argument("--seed", type=int)
    run.add_argument("--engine", choices=ENGINES)
    run.add_argument("--env", choices=("chain", "grid", "noisy-grid"))
    run.add_argument("--steps", type=int, help="total env-step budget (sets U = steps // T)")
    run.add_argument("--out")
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", help="run engines x seeds and summarise")
    cmp_.add_argument("--config")
    cmp_.add_argument("--engines", required=True)
    cmp_.add_argument("--seeds")
    cmp_.add_argument("--env", choices=("chain", "grid", "noisy-grid"))
    cmp_.add_argument("--steps", type=int)
    cmp_.add_argument("--out")
    cmp_.add_argument("--jobs", type=int, default=1)
    cmp_.set_defaults(func=cmd_compare)

    h = sub.add_parser("hns", help="human-normalised score")
    h.add_argument("--agent", type=float, required=True)
    h.add_argument("--random", type=float, required=True)
    h.add_argument("--human", type=float, required=True)
    h.set_defaults(func=cmd_hns)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, ZeroDivisionError, RunError) as exc:
        print(f"tirlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
