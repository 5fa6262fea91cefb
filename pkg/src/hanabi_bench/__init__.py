"""Hanabi engine, rule-based agents, Monte Carlo search, and a benchmark
harness for evaluating them against each other."""

from .agents import (
    AGENT_NAMES,
    Agent,
    AgentError,
    ISMCTSAgent,
    LegalRandomAgent,
    MCSAgent,
    PredictorISMCTSAgent,
    RULE_AGENTS,
    RuleAgent,
    make_agent,
    rule_agent,
)
from .cards import Card, DECK_SIZE, RANKS, SUITS, card, full_deck, parse_card
from .engine import (
    Action,
    ActionOutcome,
    ConfigurationError,
    Discard,
    EngineError,
    GameState,
    IllegalActionError,
    MoveRecord,
    Observation,
    Play,
    Tell,
    TerminalStateError,
    TurnOrderError,
    discard,
    new_game,
    play,
    replay_game,
    tell_rank,
    tell_suit,
    write_replay,
)
from .harness import (
    AGENTS_UNDER_TEST,
    AggregateStats,
    ExperimentConfig,
    GameRecord,
    PAIRED_AGENTS,
    aggregate,
    format_table,
    play_game,
    read_records,
    run_full_test,
    run_validation,
    write_records,
)
from .knowledge import (
    CardKnowledge,
    InconsistencyError,
    identity_distribution,
    is_definitely_playable,
    is_definitely_useless,
    playability_probability,
    uselessness_probability,
)
from .rules import Rule, RuleSyntaxError, parse_rule
from .search import (
    IllegalModelActionError,
    SearchConfig,
    SearchError,
    determinize,
    ismcts_choose,
    mcs_choose,
    predictor_ismcts_choose,
)
from .seeding import child_rng, derive_seed

__version__ = "0.1.0"

__all__ = [
    "AGENTS_UNDER_TEST", "AGENT_NAMES", "Action", "ActionOutcome", "Agent",
    "AgentError", "AggregateStats", "Card", "CardKnowledge",
    "ConfigurationError", "DECK_SIZE", "Discard", "EngineError",
    "ExperimentConfig", "GameRecord", "GameState", "ISMCTSAgent",
    "IllegalActionError", "IllegalModelActionError", "InconsistencyError",
    "LegalRandomAgent", "MCSAgent", "MoveRecord", "Observation",
    "PAIRED_AGENTS", "Play", "PredictorISMCTSAgent", "RANKS", "RULE_AGENTS",
    "Rule", "RuleAgent", "RuleSyntaxError", "SUITS", "SearchConfig",
    "SearchError", "Tell", "TerminalStateError", "TurnOrderError",
    "aggregate", "card", "child_rng", "derive_seed", "determinize", "discard",
    "format_table", "full_deck", "identity_distribution",
    "is_definitely_playable", "is_definitely_useless", "ismcts_choose",
    "make_agent", "mcs_choose", "new_game", "parse_card", "parse_rule",
    "play", "play_game", "playability_probability",
    "predictor_ismcts_choose", "read_records", "replay_game",
    "rule_agent", "run_full_test", "run_validation", "tell_rank",
    "tell_suit", "uselessness_probability", "write_records", "write_replay",
]
