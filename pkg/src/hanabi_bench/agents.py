"""Agent policies: ordered-rule agents, search wrappers, and the registry.

A rule agent tries its rules strictly in order and returns the first
action offered. Compositions are written in the rule expression language
(see rules.py), which keeps each agent's definition to a list of strings.

Name strings accepted by make_agent:

    random            uniform over legal actions
    internal          own-hand memory only; random tells
    outer             avoids repeating known facts
    cautious          never risks a life
    iggi              cautious plus oldest-first discards
    piers             risk-taking once the deck runs dry
    flawed            deliberately weak telling behaviour
    vdb               probability-threshold play/discard agent
    mcs:<policy>      one-step lookahead with <policy> rollouts
    ismcts            determinizing tree search
    predictor         tree search guided by models of the other seats
"""

from __future__ import annotations

import math
import random
from typing import TYPE_CHECKING, Mapping, Sequence

from .rules import DiscardRandomly, Rule, TellRandomly, parse_rule
from .search import SearchConfig, ismcts_choose, mcs_choose, predictor_ismcts_choose

if TYPE_CHECKING:
    from .engine import Action, Observation


class AgentError(Exception):
    pass


class Agent:
    """A seat-bound policy: maps the seat's observation to a legal action."""

    __slots__ = ("name", "rng")

    def __init__(self, name: str, rng: random.Random):
        self.name = name
        self.rng = rng

    def act(self, obs: "Observation") -> "Action":
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


class LegalRandomAgent(Agent):
    """Picks uniformly from the legal actions."""

    def __init__(self, rng: random.Random, name: str = "random"):
        super().__init__(name, rng)

    def act(self, obs):
        return self.rng.choice(obs.legal_actions())


class RuleAgent(Agent):
    """First-matching-rule policy.

    A trailing random-tell/random-discard pair backstops the listed
    rules: a few compositions can otherwise deadlock at the info-token
    cap with nothing worth telling (discards are illegal there, and none
    of their tell rules is unconditional). At least one of the pair is
    always legal, and neither risks a life.
    """

    __slots__ = ("rules",)

    _FALLBACK: tuple[Rule, ...] = (TellRandomly(), DiscardRandomly())

    def __init__(self, name: str, rules: Sequence[Rule], rng: random.Random):
        super().__init__(name, rng)
        self.rules = tuple(rules)

    def act(self, obs):
        for rule in self.rules:
            action = rule.try_fire(obs, self.rng)
            if action is not None:
                return action
        for rule in self._FALLBACK:
            action = rule.try_fire(obs, self.rng)
            if action is not None:
                return action
        raise AgentError(f"{self.name}: no rule fired and no fallback was legal")


# Rule compositions, in firing order.
RULE_AGENTS: dict[str, tuple[str, ...]] = {
    "internal": (
        "PlaySafeCard",
        "OsawaDiscard",
        "TellPlayableCard",
        "TellRandomly",
        "DiscardRandomly",
    ),
    "outer": (
        "PlaySafeCard",
        "OsawaDiscard",
        "TellPlayableCardOuter",
        "TellUnknown",
        "DiscardRandomly",
    ),
    "cautious": (
        "PlayIfCertain",
        "PlaySafeCard",
        "TellAnyoneAboutUsefulCard",
        "OsawaDiscard",
        "DiscardRandomly",
    ),
    "iggi": (
        "PlayIfCertain",
        "PlaySafeCard",
        "TellAnyoneAboutUsefulCard",
        "OsawaDiscard",
        "DiscardOldestFirst",
    ),
    "piers": (
        "If(lives>1 & !deckHasCards){PlayProbablySafeCard(0.0)}",
        "PlaySafeCard",
        "If(lives>1){PlayProbablySafeCard(0.6)}",
        "TellAnyoneAboutUsefulCard",
        "If(info<4){TellDispensable}",
        "OsawaDiscard",
        "DiscardOldestFirst",
        "TellRandomly",
        "DiscardRandomly",
    ),
    "flawed": (
        "PlaySafeCard",
        "PlayProbablySafeCard(0.25)",
        "TellRandomly",
        "OsawaDiscard",
        "DiscardOldestFirst",
        "DiscardRandomly",
    ),
    "vdb": (
        "If(lives>1){PlayProbablySafeCard(0.6)}Else{PlaySafeCard}",
        "DiscardProbablyUselessCard(1.0)",
        "TellAnyoneAboutUsefulCard",
        "TellAnyoneAboutUselessCard",
        "TellMostInformation",
        "DiscardProbablyUselessCard(0.0)",
    ),
}


def rule_agent(name: str, rng: random.Random) -> RuleAgent:
    texts = RULE_AGENTS.get(name)
    if texts is None:
        raise AgentError(f"unknown rule agent {name!r}")
    return RuleAgent(name, [parse_rule(t) for t in texts], rng)


# ----------------------------------------------------------------------
# Search wrappers
# ----------------------------------------------------------------------
def _child(rng: random.Random) -> random.Random:
    return random.Random(rng.getrandbits(64))


class MCSAgent(Agent):
    """One-step lookahead: bandit over root actions, rollouts by a fixed
    policy playing every seat."""

    __slots__ = ("config", "policy_name")

    def __init__(self, policy_name: str, rng: random.Random,
                 budget_iters: int | None = None,
                 budget_ms: float | None = None,
                 exploration: float = math.sqrt(2)):
        super().__init__(f"mcs:{policy_name}", rng)
        self.policy_name = policy_name
        factory = _policy_factory(policy_name)
        rollout_rng = _child(rng)
        self.config = SearchConfig(
            budget_iters=budget_iters, budget_ms=budget_ms,
            exploration=exploration, rng=_child(rng),
            rollout_policy=lambda seat: factory(_child(rollout_rng)),
        )

    def act(self, obs):
        return mcs_choose(obs, self.config)


class ISMCTSAgent(Agent):
    """Information-set tree search with uniform random rollouts."""

    __slots__ = ("config",)

    def __init__(self, rng: random.Random,
                 budget_iters: int | None = None,
                 budget_ms: float | None = None,
                 exploration: float = math.sqrt(2)):
        super().__init__("ismcts", rng)
        self.config = SearchConfig(
            budget_iters=budget_iters, budget_ms=budget_ms,
            exploration=exploration, rng=_child(rng),
        )

    def act(self, obs):
        return ismcts_choose(obs, self.config)


class PredictorISMCTSAgent(Agent):
    """Tree search that asks per-seat models what the other players would
    do instead of exploring their moves with the bandit. Models see the
    determinized state through normal observations, own hand hidden."""

    __slots__ = ("config", "model_names")

    def __init__(self, model_names: Mapping[int, str], rng: random.Random,
                 budget_iters: int | None = None,
                 budget_ms: float | None = None,
                 exploration: float = math.sqrt(2)):
        super().__init__("predictor", rng)
        if not model_names:
            raise AgentError("predictor needs a model name for every other seat")
        self.model_names = dict(model_names)
        models = {}
        for seat, name in sorted(self.model_names.items()):
            factory = _policy_factory(name)
            models[seat] = factory(_child(rng))
        self.config = SearchConfig(
            budget_iters=budget_iters, budget_ms=budget_ms,
            exploration=exploration, rng=_child(rng), models=models,
        )

    def act(self, obs):
        return predictor_ismcts_choose(obs, self.config)


def _policy_factory(name: str):
    """Factory for the plain policies usable as rollouts and models."""
    if name == "random":
        return lambda rng: LegalRandomAgent(rng)
    if name in RULE_AGENTS:
        return lambda rng: rule_agent(name, rng)
    raise AgentError(f"{name!r} cannot back a search agent; "
                     f"expected 'random' or one of {sorted(RULE_AGENTS)}")


def make_agent(spec: str, rng: random.Random, *,
               budget_iters: int | None = None,
               budget_ms: float | None = None,
               exploration: float = math.sqrt(2),
               model_names: Mapping[int, str] | None = None) -> Agent:
    """Build an agent from its registry name.

    Search budgets apply only to search agents; rule agents ignore them.
    model_names (seat -> registry name) is required for "predictor".
    """
    if spec == "random":
        return LegalRandomAgent(rng)
    if spec in RULE_AGENTS:
        return rule_agent(spec, rng)
    if spec.startswith("mcs:"):
        return MCSAgent(spec[4:], rng, budget_iters=budget_iters,
                        budget_ms=budget_ms, exploration=exploration)
    if spec == "ismcts":
        return ISMCTSAgent(rng, budget_iters=budget_iters,
                           budget_ms=budget_ms, exploration=exploration)
    if spec == "predictor":
        if model_names is None:
            raise AgentError("predictor needs model_names (seat -> agent name)")
        return PredictorISMCTSAgent(model_names, rng,
                                    budget_iters=budget_iters,
                                    budget_ms=budget_ms,
                                    exploration=exploration)
    raise AgentError(f"unknown agent {spec!r}")


AGENT_NAMES = tuple(sorted(RULE_AGENTS)) + ("random", "ismcts", "predictor") \
    + tuple(f"mcs:{p}" for p in ("random",) + tuple(sorted(RULE_AGENTS)))
