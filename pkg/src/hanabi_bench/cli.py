"""Command-line interface: quick games, validation, the full pairing
experiment, and statistics over stored record files."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .agents import AGENT_NAMES, make_agent
from .engine import new_game, trace_lines
from .harness import (
    ExperimentConfig,
    aggregate,
    format_table,
    read_records,
    run_full_test,
    run_validation,
)
from .seeding import child_rng


def _cmd_play(args) -> int:
    names = [n.strip() for n in args.agents.split(",") if n.strip()]
    n_players = args.players
    if len(names) == 1:
        names = names * n_players
    if len(names) != n_players:
        raise SystemExit(f"got {len(names)} agents for {n_players} seats")
    search_kw = {"budget_iters": args.budget_iters,
                 "budget_ms": args.budget_ms}
    if args.exploration is not None:
        search_kw["exploration"] = args.exploration
    agents = []
    for seat, name in enumerate(names):
        model_names = None
        if name == "predictor":
            model_names = {s: names[s] for s in range(n_players) if s != seat}
        agents.append(make_agent(
            name, child_rng(args.seed, "agent", 0, seat),
            model_names=model_names, **search_kw))
    st = new_game(n_players, args.seed)
    while not st.is_terminal():
        seat = st.current_player
        st.apply(agents[seat].act(st.observe(seat)))
    if args.trace:
        print("\n".join(trace_lines(st)))
    print(f"score={st.score()} turns={st.turn} "
          f"lives={st.life_tokens} info={st.info_tokens}")
    return 0


def _cmd_validate(args) -> int:
    _, stats = run_validation(n_games=args.games, base_seed=args.seed,
                              out_dir=args.out)
    print(format_table(stats, title="self-play validation"))
    return 0


def _cmd_fulltest(args) -> int:
    if args.config:
        with open(args.config) as fh:
            config = ExperimentConfig.from_mapping(json.load(fh))
    else:
        config = ExperimentConfig()
    overrides = {}
    if args.seeds is not None:
        overrides["n_seeds"] = args.seeds
    if args.budget_iters is not None:
        overrides["budget_iters"] = args.budget_iters
    if args.exploration is not None:
        overrides["exploration"] = args.exploration
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.no_traces:
        overrides["write_traces"] = False
    if overrides:
        config = dataclasses.replace(config, **overrides)
    records, _, out = run_full_test(config)
    print(format_table(aggregate(records, group=("agent_under_test",)),
                       title=f"full test ({len(records)} games)"))
    crashed = sum(r.crashed for r in records)
    if crashed:
        print(f"warning: {crashed} crashed games excluded from stats",
              file=sys.stderr)
    print(f"outputs in {out}")
    return 0


def _cmd_stats(args) -> int:
    records = read_records(args.records)
    group = {"agent": ("agent_under_test",),
             "pairing": ("agent_under_test", "paired_agent"),
             "players": ("agent_under_test", "n_players"),
             "all": ("agent_under_test", "paired_agent", "n_players")}
    print(format_table(aggregate(records, group=group[args.by])))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hanabi-bench",
        description="Hanabi agents, pairing experiments, and statistics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("play", help="play one game and print the outcome")
    p.add_argument("--agents", required=True,
                   help="comma-separated names, one per seat or one for all; "
                        f"choices: {', '.join(AGENT_NAMES)}")
    p.add_argument("--players", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", action="store_true",
                   help="print the move-by-move trace")
    p.add_argument("--budget-iters", type=int, default=None)
    p.add_argument("--budget-ms", type=float, default=None)
    p.add_argument("--exploration", type=float, default=None,
                   help="UCB exploration constant for search agents")
    p.set_defaults(func=_cmd_play)

    p = sub.add_parser("validate", help="self-play validation baselines")
    p.add_argument("--games", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="directory for record files")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("fulltest", help="run the full pairing experiment")
    p.add_argument("--config", default=None,
                   help="JSON file of ExperimentConfig fields")
    p.add_argument("--seeds", type=int, default=None,
                   help="override the number of seeds")
    p.add_argument("--budget-iters", type=int, default=None,
                   help="iteration budget for search agents")
    p.add_argument("--exploration", type=float, default=None,
                   help="UCB exploration constant for search agents")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--no-traces", action="store_true")
    p.set_defaults(func=_cmd_fulltest)

    p = sub.add_parser("stats", help="aggregate a stored records.jsonl")
    p.add_argument("records")
    p.add_argument("--by", choices=("agent", "pairing", "players", "all"),
                   default="agent")
    p.set_defaults(func=_cmd_stats)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
