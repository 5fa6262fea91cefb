"""Experiment runner: seeded pairing games, self-play validation, the
full cross-pairing test, and statistics over stored game records.

A pairing game seats one agent under test at a seed-determined position
and fills every other seat with fresh copies of the paired agent. Runs
write three kinds of output under a run directory: raw records as JSONL
(one game per line, no timestamps, so identical configs produce
byte-identical files), aggregate CSVs, and plain-text per-game traces.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

from .agents import make_agent
from .engine import GameState, new_game, trace_lines
from .seeding import child_rng, derive_seed

# The full-test rosters: each agent under test plays alone among copies
# of each paired agent in turn.
AGENTS_UNDER_TEST = ("random", "outer", "iggi", "piers", "flawed", "vdb",
                     "mcs:random", "mcs:iggi", "mcs:flawed", "ismcts",
                     "predictor")
PAIRED_AGENTS = ("iggi", "internal", "outer", "random", "vdb", "flawed",
                 "piers")

# Self-play validation setups: (agent, player count).
VALIDATION_SETUPS = (("internal", 2), ("outer", 2), ("vdb", 3))

_GROUP_FIELDS = ("agent_under_test", "paired_agent", "n_players")


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """Full-test parameters. Total games per agent under test is
    n_seeds * len(player_counts) * len(paired_agents) * reruns."""

    agents_under_test: tuple[str, ...] = AGENTS_UNDER_TEST
    paired_agents: tuple[str, ...] = PAIRED_AGENTS
    n_seeds: int = 200
    player_counts: tuple[int, ...] = (2, 3, 4, 5)
    reruns: int = 2
    base_seed: int = 0
    budget_iters: int | None = None
    budget_ms: float | None = None
    exploration: float | None = None
    out_dir: str | None = None
    write_traces: bool = True

    def __post_init__(self):
        if self.n_seeds < 1 or self.reruns < 1:
            raise ValueError("n_seeds and reruns must be at least 1")
        for n in self.player_counts:
            if not 2 <= n <= 5:
                raise ValueError(f"unsupported player count: {n}")
        if self.exploration is not None and self.exploration <= 0:
            raise ValueError("exploration must be positive")

    def games_per_agent(self) -> int:
        return (self.n_seeds * len(self.player_counts)
                * len(self.paired_agents) * self.reruns)

    def config_hash(self) -> str:
        """Stable digest of the experiment parameters (not output paths)."""
        d = dataclasses.asdict(self)
        d.pop("out_dir")
        d.pop("write_traces")
        payload = repr(sorted(d.items())).encode()
        return hashlib.sha256(payload).hexdigest()[:12]

    @classmethod
    def from_mapping(cls, data: Mapping) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {unknown}")
        coerced = dict(data)
        for key in ("agents_under_test", "paired_agents", "player_counts"):
            if key in coerced:
                coerced[key] = tuple(coerced[key])
        return cls(**coerced)


class GameRecord(NamedTuple):
    """One finished (or crashed) pairing game."""

    seed: int
    n_players: int
    agent_under_test: str
    paired_agent: str
    rerun: int
    position: int
    score: int
    turns: int
    lives: int
    info: int
    trace: str = ""
    crashed: bool = False
    error: str = ""

    def to_json(self) -> str:
        return json.dumps(self._asdict())


def record_from_json(line: str) -> GameRecord:
    return GameRecord(**json.loads(line))


class AggregateStats(NamedTuple):
    """Group statistics; sem is sd/sqrt(n), reported as 0 when n=1 with
    the flag column marking the degenerate group."""

    agent: str
    paired_agent: str
    n_players: int
    n: int
    mean_score: float
    sd_score: float
    sem_score: float
    mean_turns: float
    mean_lives: float
    mean_info: float
    flag: str = ""


def position_for(seed: int, n_players: int) -> int:
    """Seat of the agent under test: fixed per (seed, player count) so
    every agent under test plays the same position for the same seed."""
    return derive_seed(seed, "position", n_players) % n_players


def play_game(seed: int, n_players: int, agent_under_test: str,
              paired_agent: str, rerun: int = 0, *,
              budget_iters: int | None = None,
              budget_ms: float | None = None,
              exploration: float | None = None
              ) -> tuple[GameRecord, GameState]:
    """Play one pairing game to the end, never raising for agent faults.

    A predictor under test receives fresh paired-agent models for the
    other seats, seeded from its own stream rather than the real agents'.
    An agent crash flags the record; the partial state still reports its
    score so the batch can continue.
    """
    position = position_for(seed, n_players)
    search_kw = {"budget_iters": budget_iters, "budget_ms": budget_ms}
    if exploration is not None:
        search_kw["exploration"] = exploration
    agents = []
    for seat in range(n_players):
        name = agent_under_test if seat == position else paired_agent
        model_names = None
        if name == "predictor":
            model_names = {s: paired_agent for s in range(n_players)
                           if s != seat}
        agents.append(make_agent(
            name, child_rng(seed, "agent", rerun, seat),
            model_names=model_names, **search_kw))

    st = new_game(n_players, seed)
    crashed = False
    error = ""
    try:
        while not st.is_terminal():
            seat = st.current_player
            st.apply(agents[seat].act(st.observe(seat)))
    except Exception as exc:  # flag-and-continue batch policy
        crashed = True
        error = f"{type(exc).__name__}: {exc}"
    record = GameRecord(
        seed=seed, n_players=n_players, agent_under_test=agent_under_test,
        paired_agent=paired_agent, rerun=rerun, position=position,
        score=st.score(), turns=st.turn, lives=st.life_tokens,
        info=st.info_tokens, crashed=crashed, error=error)
    return record, st


# ----------------------------------------------------------------------
# Statistics
# ----------------------------------------------------------------------
def aggregate(records: Iterable[GameRecord],
              group: Sequence[str] = _GROUP_FIELDS) -> list[AggregateStats]:
    """Statistics per group over non-crashed records. group is a subset
    of (agent_under_test, paired_agent, n_players); collapsed dimensions
    show "*" (or 0 for the player count)."""
    for field in group:
        if field not in _GROUP_FIELDS:
            raise ValueError(f"cannot group by {field!r}")
    groups: dict[tuple, list[GameRecord]] = {}
    for r in records:
        if r.crashed:
            continue
        key = (r.agent_under_test if "agent_under_test" in group else "*",
               r.paired_agent if "paired_agent" in group else "*",
               r.n_players if "n_players" in group else 0)
        groups.setdefault(key, []).append(r)

    rows = []
    for (agent, paired, players), recs in sorted(groups.items()):
        scores = [r.score for r in recs]
        n = len(scores)
        sd = statistics.stdev(scores) if n > 1 else 0.0
        rows.append(AggregateStats(
            agent=agent, paired_agent=paired, n_players=players, n=n,
            mean_score=statistics.fmean(scores), sd_score=sd,
            sem_score=sd / math.sqrt(n),
            mean_turns=statistics.fmean(r.turns for r in recs),
            mean_lives=statistics.fmean(r.lives for r in recs),
            mean_info=statistics.fmean(r.info for r in recs),
            flag="n=1" if n == 1 else ""))
    return rows


def format_table(stats: Sequence[AggregateStats], title: str = "") -> str:
    """Plain-text table, best mean score first."""
    headers = ("agent", "paired", "players", "n", "score", "sem", "sd",
               "turns", "lives", "info", "flags")
    body = []
    for s in sorted(stats, key=lambda s: -s.mean_score):
        body.append((s.agent, s.paired_agent,
                     str(s.n_players) if s.n_players else "*", str(s.n),
                     f"{s.mean_score:.2f}", f"{s.sem_score:.3f}",
                     f"{s.sd_score:.2f}", f"{s.mean_turns:.1f}",
                     f"{s.mean_lives:.2f}", f"{s.mean_info:.2f}", s.flag))
    widths = [max(len(h), *(len(row[i]) for row in body)) if body else len(h)
              for i, h in enumerate(headers)]
    lines = [title] if title else []
    lines.append("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(cell.ljust(w) for cell, w in zip(row, widths))
                 for row in body)
    return "\n".join(lines)


def write_records(records: Iterable[GameRecord], path: Path | str) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")


def read_records(path: Path | str) -> list[GameRecord]:
    with open(path) as fh:
        return [record_from_json(line) for line in fh if line.strip()]


def write_csv(stats: Sequence[AggregateStats], path: Path | str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(AggregateStats._fields)
        for s in stats:
            writer.writerow([f"{v:.6f}" if isinstance(v, float) else v
                             for v in s])


# ----------------------------------------------------------------------
# Batch execution
# ----------------------------------------------------------------------
def _pool_size() -> int:
    raw = os.environ.get("HANABI_BENCH_THREADS", "")
    if not raw:
        return 1
    n = int(raw)
    if n < 1:
        raise ValueError(f"HANABI_BENCH_THREADS must be >= 1: {raw}")
    return n


def _worker(job):
    (seed, n_players, agent, paired, rerun,
     budget_iters, budget_ms, exploration, want_trace) = job
    record, state = play_game(seed, n_players, agent, paired, rerun,
                              budget_iters=budget_iters, budget_ms=budget_ms,
                              exploration=exploration)
    text = "\n".join(trace_lines(state)) + "\n" if want_trace else None
    return record, text


def _run_jobs(jobs: list[tuple]) -> list[tuple[GameRecord, str | None]]:
    workers = _pool_size()
    if workers == 1 or len(jobs) < 2:
        return [_worker(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves input order, keeping the merge deterministic.
        return list(pool.map(_worker, jobs, chunksize=4))


def _record_sort_key(record: GameRecord):
    return (record.agent_under_test, record.seed, record.n_players,
            record.paired_agent, record.rerun)


def _safe(name: str) -> str:
    return name.replace(":", "-")


def _trace_relpath(r: GameRecord) -> str:
    return (f"traces/{_safe(r.agent_under_test)}/{_safe(r.paired_agent)}/"
            f"s{r.seed}_p{r.n_players}_r{r.rerun}.txt")


def _resolve_out_dir(config: ExperimentConfig, kind: str) -> Path:
    if config.out_dir is not None:
        out = Path(config.out_dir)
    else:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        out = Path("runs") / f"{kind}-{config.config_hash()}-{stamp}"
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_full_test(config: ExperimentConfig
                  ) -> tuple[list[GameRecord], list[AggregateStats], Path]:
    """Run the pairing experiment: every agent under test, alone among
    copies of each paired agent in turn, over all seeds, player counts,
    and reruns. Writes records.jsonl, aggregate CSVs, and traces."""
    out = _resolve_out_dir(config, "fulltest")
    jobs = []
    for agent in config.agents_under_test:
        for i in range(config.n_seeds):
            seed = config.base_seed + i
            for n_players in config.player_counts:
                for paired in config.paired_agents:
                    for rerun in range(config.reruns):
                        jobs.append((seed, n_players, agent, paired, rerun,
                                     config.budget_iters, config.budget_ms,
                                     config.exploration, config.write_traces))
    records = []
    for record, text in _run_jobs(jobs):
        if text is not None:
            rel = _trace_relpath(record)
            path = out / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
            record = record._replace(trace=rel)
        records.append(record)
    records.sort(key=_record_sort_key)
    write_records(records, out / "records.jsonl")

    stats = aggregate(records)
    write_csv(stats, out / "aggregates.csv")
    write_csv(aggregate(records, group=("agent_under_test",)),
              out / "by_agent.csv")
    write_csv(aggregate(records, group=("agent_under_test", "paired_agent")),
              out / "by_pairing.csv")
    write_csv(aggregate(records, group=("agent_under_test", "n_players")),
              out / "by_players.csv")
    return records, stats, out


def run_validation(n_games: int = 100, base_seed: int = 0,
                   out_dir: str | None = None
                   ) -> tuple[list[GameRecord], list[AggregateStats]]:
    """Self-play baselines: internal and outer at 2 players, vdb at 3."""
    jobs = [(base_seed + i, n_players, name, name, 0, None, None, None, False)
            for name, n_players in VALIDATION_SETUPS
            for i in range(n_games)]
    records = [record for record, _ in _run_jobs(jobs)]
    records.sort(key=_record_sort_key)
    stats = aggregate(records, group=("agent_under_test", "n_players"))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_records(records, out / "validation.jsonl")
        write_csv(stats, out / "validation.csv")
    return records, stats
