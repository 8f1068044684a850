"""Command-line entry points: train, run, bench."""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config
from .harness import bench, run, train


def _overrides(args) -> dict:
    out: dict = {}
    if args.seed is not None:
        out["seeds"] = [args.seed]
    if args.slots is not None:
        out["n_slots"] = args.slots
    if args.jammer is not None:
        out["jammer"] = {"kind": args.jammer}
    return out


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="antijam",
        description="Anti-jamming PRB-selection simulator (active inference vs. QL vs. FH)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the seed list")
    common.add_argument("--slots", type=int, default=None, help="override mission length")
    common.add_argument(
        "--jammer", choices=["constant", "sweep", "random"], default=None,
        help="override the jammer strategy",
    )

    p_train = sub.add_parser("train", parents=[common], help="learn the clean-signal model")
    p_train.add_argument("--config", required=True)
    p_train.add_argument("--out", required=True, help="model JSON output path")

    p_run = sub.add_parser("run", parents=[common], help="run one scenario over its seeds")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True, help="output directory")

    p_bench = sub.add_parser(
        "bench", parents=[common], help="compare agents on a shared environment"
    )
    p_bench.add_argument("--configs", nargs="+", required=True)
    p_bench.add_argument("--out", required=True, help="output directory")

    args = parser.parse_args(argv)
    try:
        if args.command == "train":
            cfg = load_config(args.config, _overrides(args))
            train(cfg, out_path=args.out)
            print(f"model written to {args.out}")
        elif args.command == "run":
            cfg = load_config(args.config, _overrides(args))
            summary = run(cfg, out_dir=args.out)
            for seed, s in summary["seeds"].items():
                print(
                    f"seed {seed}: reward {s['final_cum_reward']:.0f}, "
                    f"collisions {s['collisions']}, convergence {s['convergence_slot']}"
                )
        elif args.command == "bench":
            cfgs = [load_config(p, _overrides(args)) for p in args.configs]
            rows = bench(cfgs, out_dir=args.out)
            for r in rows:
                print(
                    f"{r['agent']:>4} seed {r['seed']}: reward {r['final_cum_reward']:.0f}, "
                    f"convergence {r['convergence_slot']}"
                )
    except (ConfigError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
