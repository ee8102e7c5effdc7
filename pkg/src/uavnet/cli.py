"""Command-line entry points for training, evaluation, sweeps, and tooling."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .harness import ConfigError, eval_run, gen_traffic, graph_info, load_config, run, sweep_uavs


def _add_common(parser: argparse.ArgumentParser, out_help: str = "output directory override") -> None:
    parser.add_argument("--config", required=True, help="experiment config JSON")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config field by dotted path (repeatable), e.g. train.episodes=500",
    )
    parser.add_argument("--seed", type=int, default=None, help="run a single seed instead of the configured list")
    parser.add_argument("--out", default=None, help=out_help)
    parser.add_argument("--policy", default=None, help="policy kind override (q_sdam | q_sam | mu_greedy | random)")


def _parse_uav_list(raw: str) -> list[int]:
    try:
        values = [int(part) for part in raw.replace(" ", "").split(",") if part]
    except ValueError as exc:
        raise ConfigError(f"--uavs expects comma-separated integers, got {raw!r}") from exc
    if not values:
        raise ConfigError("--uavs is empty")
    return values


def _load(args: argparse.Namespace):
    overrides = list(args.overrides)
    if getattr(args, "policy", None):
        overrides.append(f"policy={args.policy}")
    if getattr(args, "seed", None) is not None:
        overrides.append(f"seeds=[{args.seed}]")
    if getattr(args, "out", None):
        overrides.append(f"out={args.out}")
    return load_config(args.config, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uavnet",
        description="Multi-UAV relay deployment over road networks: train, evaluate, and sweep policies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train and evaluate the configured policy per seed")
    _add_common(p_train)

    p_eval = sub.add_parser("eval", help="evaluate a policy (heuristics directly, learned ones from a checkpoint)")
    _add_common(p_eval)

    p_sweep = sub.add_parser("sweep", help="run every configured policy across a list of UAV counts")
    _add_common(p_sweep)
    p_sweep.add_argument("--uavs", required=True, help="comma-separated UAV counts, e.g. 1,2,4,8")

    p_gen = sub.add_parser("gen-traffic", help="generate a synthetic traffic trace CSV for a roadmap")
    p_gen.add_argument("--config", required=True, help="experiment config JSON (roadmap + synth section)")
    p_gen.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE", help="config override"
    )
    p_gen.add_argument("--seed", type=int, default=None, help="synthetic-traffic seed override")
    p_gen.add_argument("--out", required=True, help="output trace CSV path")

    p_info = sub.add_parser("graph-info", help="print a structural summary of a roadmap")
    p_info.add_argument("--config", required=True, help="experiment config JSON (only 'roadmap' is used)")
    p_info.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE", help="config override"
    )

    return parser


def main(argv: "list[str] | None" = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "train":
            run_dir = run(_load(args))
            print(run_dir)
        elif args.command == "eval":
            run_dir = eval_run(_load(args))
            print(run_dir)
        elif args.command == "sweep":
            cfg = _load(args)
            sweep_dir = sweep_uavs(cfg, _parse_uav_list(args.uavs))
            print(sweep_dir)
        elif args.command == "gen-traffic":
            cfg = load_config(args.config, list(args.overrides))
            synth = cfg.synth if args.seed is None else replace(cfg.synth, seed=args.seed)
            print(gen_traffic(cfg.roadmap, synth, cfg.horizon, args.out))
        elif args.command == "graph-info":
            cfg = load_config(args.config, list(args.overrides))
            print(graph_info(cfg.roadmap).to_text())
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # environment/runtime failures
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
