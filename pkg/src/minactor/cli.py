"""Command-line entry point.

Subcommands: ``train`` (one seeded run), ``search`` (full two-phase
pipeline from a JSON config), ``eval`` (evaluate a saved snapshot),
``params`` (weight-count table per environment), ``report`` (re-emit the
result table from persisted search results).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .agents import ALGO_NAMES, AgentConfig, ArchPair
from .config import DEFAULT_TOTAL_STEPS, ConfigError, default_out_dir, parse_config
from .envs import ENV_NAMES, make_env
from .experiment import run_experiment
from .io import load_json, load_snapshot, run_dir, write_run_record
from .nets import param_count
from .reports import emit_report, format_hidden
from .search import DEFAULT_LADDER
from .training import evaluate_policy, train_run


def _parse_hidden_arg(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        sizes = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad hidden sizes {text!r}; expected e.g. '16,16' or ''")
    if any(s < 1 for s in sizes):
        raise argparse.ArgumentTypeError("hidden sizes must be positive")
    return sizes


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="minactor",
                                     description="Actor-critic architecture-minimization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run one seeded training run")
    p_train.add_argument("--env", required=True, choices=ENV_NAMES)
    p_train.add_argument("--algo", required=True, choices=ALGO_NAMES)
    p_train.add_argument("--actor", type=_parse_hidden_arg, default=(16, 16),
                         help="actor hidden sizes, e.g. '16,16' or '' for a single linear layer")
    p_train.add_argument("--critic", type=_parse_hidden_arg, default=(16, 16))
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--steps", type=int, default=None, help="override total env steps")
    p_train.add_argument("--out", default=None, help="output directory (default $MINACTOR_OUT or ./runs)")

    p_search = sub.add_parser("search", help="baseline + two-phase architecture search")
    p_search.add_argument("--config", required=True, help="JSON experiment config")
    p_search.add_argument("--out", default=None, help="override the config's output directory")
    p_search.add_argument("--audit", action="store_true",
                          help="verify binary-search results with an exhaustive scan")
    p_search.add_argument("--no-baseline", action="store_true",
                          help="skip the baseline evaluation phase")

    p_eval = sub.add_parser("eval", help="evaluate a saved snapshot deterministically")
    p_eval.add_argument("--snapshot", required=True)
    p_eval.add_argument("--episodes", type=int, default=30)
    p_eval.add_argument("--seed", type=int, default=0)

    p_params = sub.add_parser("params", help="actor weight counts for the architecture ladder")
    p_params.add_argument("--env", required=True, choices=ENV_NAMES)

    p_report = sub.add_parser("report", help="re-emit the result table from saved search results")
    p_report.add_argument("--out", default=None)
    p_report.add_argument("--env", required=True, choices=ENV_NAMES)
    p_report.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    return parser


def _cmd_train(args) -> int:
    out = args.out or default_out_dir()
    arch = ArchPair(args.actor, args.critic)
    steps = args.steps or DEFAULT_TOTAL_STEPS.get(args.env, 30_000)
    config = AgentConfig(algo=args.algo, arch=arch, total_steps=steps)
    record = train_run(args.env, config, args.seed)
    directory = run_dir(out, args.env, args.algo, arch, args.seed)
    write_run_record(directory, record)
    status = "DIVERGED" if record.diverged else f"final eval {record.final_eval.mean:.2f} ± {record.final_eval.std:.2f}"
    print(f"{args.algo} on {args.env} actor={format_hidden(arch.actor_hidden)} "
          f"critic={format_hidden(arch.critic_hidden)} seed={args.seed}: {status}")
    print(f"wrote {directory}")
    return 0


def _cmd_search(args) -> int:
    path = Path(args.config)
    if not path.exists():
        print(f"config file not found: {path}", file=sys.stderr)
        return 1
    config = parse_config(path.read_text())
    if args.out:
        config.out_dir = args.out
    results = run_experiment(config, baseline=not args.no_baseline, audit=args.audit,
                             progress=lambda msg: print(msg, flush=True))
    docs = [load_json(Path(config.out_dir) / config.env / algo / "result.json")
            for algo in config.algos]
    report = emit_report(docs, "markdown")
    report_path = Path(config.out_dir) / config.env / "report.md"
    report_path.write_text(report)
    print(report)
    print(f"wrote {report_path}")
    return 0


def _cmd_eval(args) -> int:
    path = Path(args.snapshot)
    if not path.exists():
        print(f"snapshot not found: {path}", file=sys.stderr)
        return 1
    policy = load_snapshot(path)
    stats = evaluate_policy(policy, policy.env_name, args.episodes, args.seed)
    print(f"{policy.algo} on {policy.env_name}: {stats.mean:.2f} ± {stats.std:.2f} "
          f"over {args.episodes} episodes")
    return 0


def _cmd_params(args) -> int:
    env = make_env(args.env)
    print(f"actor weight counts for {args.env} (obs_dim={env.obs_dim}, act_dim={env.act_dim})")
    print(f"{'hidden':>12}  {'params':>8}")
    for hidden in reversed(DEFAULT_LADDER):
        count = param_count(env.obs_dim, hidden, env.act_dim)
        print(f"{format_hidden(hidden):>12}  {count:>8}")
    return 0


def _cmd_report(args) -> int:
    out = args.out or default_out_dir()
    docs = []
    for algo in ALGO_NAMES:
        path = Path(out) / args.env / algo / "result.json"
        if path.exists():
            docs.append(load_json(path))
    if not docs:
        print(f"no search results under {Path(out) / args.env}", file=sys.stderr)
        return 1
    print(emit_report(docs, args.format), end="")
    return 0


_COMMANDS = {"train": _cmd_train, "search": _cmd_search, "eval": _cmd_eval,
             "params": _cmd_params, "report": _cmd_report}


def cli_dispatch(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))
