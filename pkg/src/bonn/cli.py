"""Command-line front end: train / eval / sweep / render.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, parse_config
from .harness import render_episode, run_eval, run_sweep, run_train

_OVERRIDE_DESTS = ("env", "obs_mode", "k", "lam", "epsilon", "gamma",
                   "k_options", "force_full_obs", "lr", "clip_norm", "batch",
                   "iterations", "eval_episodes", "seed", "out_dir")


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="path to a key = value config file")
    p.add_argument("--env", choices=("cartpole", "rooms", "oracle-maze"))
    p.add_argument("--obs-mode", dest="obs_mode", choices=("blind", "split"))
    p.add_argument("--k", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--k-options", dest="k_options", type=int,
                   help="number of discrete options (0 = continuous)")
    p.add_argument("--force-full-obs", dest="force_full_obs",
                   action="store_const", const=True, default=None)
    p.add_argument("--lr", type=float)
    p.add_argument("--clip", dest="clip_norm", type=float)
    p.add_argument("--batch", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--eval-episodes", dest="eval_episodes", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", dest="out_dir")


def _overrides(args) -> dict:
    return {k: getattr(args, k) for k in _OVERRIDE_DESTS
            if getattr(args, k, None) is not None}


def _load_config(args):
    text = ""
    if args.config:
        with open(args.config) as f:
            text = f.read()
    return parse_config(text, _overrides(args))


def _parse_list(raw: str, kind):
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if not items:
        raise ConfigError(f"empty list {raw!r}")
    try:
        return [kind(s) for s in items]
    except ValueError as e:
        raise ConfigError(f"bad list {raw!r}: {e}") from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bonn",
        description="Budgeted-observation recurrent policies: train, evaluate, "
                    "sweep the cost trade-off, and draw trajectories.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train one policy and evaluate it")
    _common_flags(p_train)

    p_eval = sub.add_parser("eval", help="re-evaluate a finished run directory")
    _common_flags(p_eval)

    p_sweep = sub.add_parser("sweep", help="train a grid of (lambda, seed) runs")
    _common_flags(p_sweep)
    p_sweep.add_argument("--lambdas", required=True,
                         help="comma-separated cost levels, e.g. 0.1,0.5,1")
    p_sweep.add_argument("--seeds", required=True,
                         help="comma-separated seeds, e.g. 0,1,2")

    p_render = sub.add_parser("render", help="draw one evaluation episode as SVG")
    p_render.add_argument("--out-dir", dest="out_dir", required=True)
    p_render.add_argument("--episode", type=int, default=0)
    p_render.add_argument("--out", help="output SVG path (default inside the run dir)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 1
    try:
        if args.command == "train":
            result = run_train(_load_config(args))
            if result is not None:
                print(f"eval: return {result.mean_return:.2f} "
                      f"obs_fraction {result.obs_fraction:.3f} "
                      f"length {result.mean_length:.1f}")
        elif args.command == "eval":
            if not args.out_dir:
                raise ConfigError("eval needs --out-dir of a finished run")
            keys = ("eval_episodes", "seed", "epsilon")
            overrides = {k: v for k, v in _overrides(args).items() if k in keys}
            result = run_eval(args.out_dir, overrides)
            if result is not None:
                print(f"eval: return {result.mean_return:.2f} "
                      f"obs_fraction {result.obs_fraction:.3f} "
                      f"length {result.mean_length:.1f}")
        elif args.command == "sweep":
            lambdas = _parse_list(args.lambdas, float)
            seeds = _parse_list(args.seeds, int)
            points, front = run_sweep(_load_config(args), lambdas, seeds)
            for p in points:
                tag = "front" if p in front else "dominated"
                print(f"lambda {p.lam}: cost {p.cost:.3f} reward {p.reward:.2f} [{tag}]")
        elif args.command == "render":
            path = render_episode(args.out_dir, args.episode, args.out)
            print(path)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
