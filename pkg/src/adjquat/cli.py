"""``bench`` command line entry point."""

from __future__ import annotations

import argparse
import sys

from .bench import TASKS, ExperimentConfig, run_experiment, write_outputs


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bench",
        description="Run synthetic rotation matching / pose experiments and write CSV + JSON.",
    )
    p.add_argument("task", choices=TASKS)
    p.add_argument("--points", type=int, default=50, help="points per cloud (K)")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--sigma", type=float, default=0.1, help="image noise standard deviation")
    focal = p.add_mutually_exclusive_group()
    focal.add_argument("--focal", type=float, help="focal length f")
    focal.add_argument("--fbar", type=float, help="inverse focal length 1/f")
    p.add_argument("--camera", choices=("origin", "cloud"), default="origin",
                   help="origin: camera at origin, cloud at depth f; cloud: cloud at origin")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV path; the JSON summary goes next to it")
    p.add_argument("--precenter", action="store_true", help="subtract centroids before solving")
    p.add_argument("--spread", type=float, default=1.0, help="half-width of the sampling cube")
    p.add_argument("--refine", type=int, default=0, help="perspective refinement passes")
    p.add_argument("--threads", type=int, default=None, help="override BENCH_THREADS")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = ExperimentConfig(
        task=args.task, points=args.points, trials=args.trials, sigma=args.sigma,
        focal=args.focal, fbar=args.fbar, camera=args.camera, seed=args.seed,
        out=args.out, precenter=args.precenter, spread=args.spread, refine=args.refine,
    )
    try:
        cfg.validate()
    except ValueError as exc:
        print(f"bench: error: {exc}", file=sys.stderr)
        return 2
    records, summary = run_experiment(cfg, threads=args.threads)
    csv_path, json_path = write_outputs(records, summary, args.out)
    mean = summary["mean"]
    print(f"{cfg.task}: {summary['n_success']} ok, {summary['n_failed']} failed; "
          f"mean loss_bi={mean['loss_bi']!r} loss_gen={mean['loss_gen']!r}")
    print(f"wrote {csv_path} and {json_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
