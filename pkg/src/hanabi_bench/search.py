"""Monte Carlo decision procedures over hidden-information states.

Three choosers share the same skeleton: sample a determinization (a
concrete completion of the viewer's unknown hand plus a deck order),
simulate, and aggregate rewards of final score / 25.

  - mcs_choose: bandit over root actions only; rollouts are played by a
    fixed policy for every seat.
  - ismcts_choose: one shared tree over the viewer's information set; a
    fresh determinization per iteration constrains which branches are
    followed; uniform random rollouts.
  - predictor_ismcts_choose: as ismcts_choose, but wherever another seat
    acts (tree or rollout) that seat's model is asked for its move, and
    only the answer is followed. The tree then only branches over the
    viewer's own choices.

Iteration budgets are bit-reproducible for a given rng; wall-clock
budgets are not.
"""

from __future__ import annotations

import math
import random
import time
from typing import TYPE_CHECKING, Callable, Mapping

from .cards import card
from .engine import GameState, IllegalActionError
from .knowledge import InconsistencyError, unseen_counts

if TYPE_CHECKING:
    from .engine import Action, Observation


class SearchError(Exception):
    pass


class IllegalModelActionError(SearchError):
    """A teammate model proposed an action the engine rejected."""


class SearchConfig:
    """Budget, exploration constant, rng, and the chooser-specific hooks.

    Exactly one of budget_iters / budget_ms is active; with neither given
    the wall-clock default is 1000 ms. determinizer is replaceable for
    tests that need a fixed world.
    """

    __slots__ = ("budget_iters", "budget_ms", "exploration", "rng",
                 "rollout_policy", "models", "determinizer")

    def __init__(self,
                 budget_iters: int | None = None,
                 budget_ms: float | None = None,
                 exploration: float = math.sqrt(2),
                 rng: random.Random | None = None,
                 rollout_policy: Callable[[int], object] | None = None,
                 models: Mapping[int, object] | None = None,
                 determinizer: Callable | None = None):
        if budget_iters is not None and budget_ms is not None:
            raise ValueError("set budget_iters or budget_ms, not both")
        if budget_iters is None and budget_ms is None:
            budget_ms = 1000.0
        if budget_iters is not None and budget_iters <= 0:
            raise ValueError(f"budget_iters must be positive: {budget_iters}")
        if budget_ms is not None and budget_ms <= 0:
            raise ValueError(f"budget_ms must be positive: {budget_ms}")
        if exploration < 0:
            raise ValueError(f"exploration must be non-negative: {exploration}")
        self.budget_iters = budget_iters
        self.budget_ms = budget_ms
        self.exploration = exploration
        self.rng = rng if rng is not None else random.Random()
        self.rollout_policy = rollout_policy
        self.models = dict(models) if models is not None else None
        self.determinizer = determinizer if determinizer is not None else determinize


def _iterations(config: SearchConfig):
    if config.budget_iters is not None:
        yield from range(config.budget_iters)
    else:
        deadline = time.perf_counter() + config.budget_ms / 1000.0
        i = 0
        while time.perf_counter() < deadline:
            yield i
            i += 1


# ----------------------------------------------------------------------
# Determinization
# ----------------------------------------------------------------------
def determinize(obs: "Observation", rng: random.Random) -> GameState:
    """Sample a full state consistent with everything the viewer knows.

    Own-hand slots are filled most-constrained-first, each drawn from the
    unseen pool proportionally to remaining copies within the slot's
    possibility sets; the leftover pool is shuffled into the deck. The
    rare dead end (an early pick starving a later slot) restarts the
    sample.
    """
    viewer = obs.viewer
    know = obs.knowledge[viewer]
    n_slots = obs.hand_sizes[viewer]
    base = unseen_counts(obs)

    for _ in range(1000):
        counts = list(base)
        picked = [-1] * n_slots
        pending = list(range(n_slots))
        while pending:
            best_at = -1
            best_opts = None
            for i in pending:
                k = know[i]
                opts = [s * 5 + r - 1 for s in k.possible_suits
                        for r in k.possible_ranks
                        if counts[s * 5 + r - 1] > 0]
                if best_opts is None or len(opts) < len(best_opts):
                    best_at, best_opts = i, opts
                    if not opts:
                        break
            if not best_opts:
                break  # dead end; restart
            total = 0
            for idx in best_opts:
                total += counts[idx]
            roll = rng.randrange(total)
            for idx in best_opts:
                roll -= counts[idx]
                if roll < 0:
                    break
            picked[best_at] = idx
            counts[idx] -= 1
            pending.remove(best_at)
        else:
            return _assemble(obs, picked, counts, rng)
    raise InconsistencyError(
        "no consistent determinization found; knowledge state is broken")


def _assemble(obs: "Observation", picked: list[int], counts: list[int],
              rng: random.Random) -> GameState:
    viewer = obs.viewer
    deck = []
    for idx, n in enumerate(counts):
        if n > 0:
            c = card(idx // 5, idx % 5 + 1)
            deck.extend([c] * n)
    rng.shuffle(deck)
    hands = []
    for p in range(obs.n_players):
        if p == viewer:
            hands.append([card(i // 5, i % 5 + 1) for i in picked])
        else:
            hands.append(list(obs.hands[p]))
    knowledge = [[k.clone() for k in hand] for hand in obs.knowledge]
    return GameState.from_components(
        hands=hands, deck=deck, stacks=obs.stacks,
        discard_pile=obs.discard, info_tokens=obs.info_tokens,
        life_tokens=obs.life_tokens, current_player=viewer,
        knowledge=knowledge, turn=obs.turn,
        final_turns_left=obs.final_turns_left, hand_size=obs.hand_size,
        validate=False)


# ----------------------------------------------------------------------
# MCS: one-step lookahead
# ----------------------------------------------------------------------
def mcs_choose(obs: "Observation", config: SearchConfig) -> "Action":
    """Bandit over root actions; each pull plays the action in a fresh
    determinization and rolls out with the configured policy on every
    seat. Returns the most-visited action; ties by mean then root order.
    """
    if config.rollout_policy is None:
        raise SearchError("mcs_choose needs config.rollout_policy")
    legal = obs.legal_actions()
    if len(legal) == 1:
        return legal[0]
    rng = config.rng
    policies = {seat: config.rollout_policy(seat)
                for seat in range(obs.n_players)}
    n_arms = len(legal)
    visits = [0] * n_arms
    totals = [0.0] * n_arms
    c = config.exploration
    pulls = 0

    for _ in _iterations(config):
        arm = -1
        for i in range(n_arms):
            if visits[i] == 0:
                arm = i
                break
        if arm < 0:
            log_n = math.log(pulls)
            best_v = -1.0
            for i in range(n_arms):
                v = totals[i] / visits[i] + c * math.sqrt(log_n / visits[i])
                if v > best_v:
                    arm, best_v = i, v
        state = config.determinizer(obs, rng)
        state.apply(legal[arm])
        while not state.is_terminal():
            seat = state.current_player
            state.apply(policies[seat].act(state.observe(seat)))
        visits[arm] += 1
        totals[arm] += state.score() / 25.0
        pulls += 1

    if pulls == 0:
        # Budget elapsed before any rollout: defer to the policy itself.
        return policies[obs.viewer].act(obs)
    best = 0
    best_key = (-1, 0.0)
    for i in range(n_arms):
        key = (visits[i], totals[i] / visits[i] if visits[i] else 0.0)
        if key > best_key:
            best, best_key = i, key
    return legal[best]


# ----------------------------------------------------------------------
# ISMCTS and the predictor variant
# ----------------------------------------------------------------------
class Node:
    """One tree position. visits/total aggregate backpropagated rewards;
    avail counts how often the node was selectable, for the UCB1 term."""

    __slots__ = ("action", "player", "children", "visits", "total", "avail")

    def __init__(self, action, player: int):
        self.action = action
        self.player = player
        self.children: dict = {}
        self.visits = 0
        self.total = 0.0
        self.avail = 0

    def mean(self) -> float:
        return self.total / self.visits if self.visits else 0.0

    def __repr__(self) -> str:
        return (f"<Node {self.action} p{self.player} "
                f"visits={self.visits} mean={self.mean():.3f}>")


def _ucb_pick(node: Node, legal: list, c: float) -> Node:
    """UCB1 over the node's children that are legal right now. Every
    considered child's availability count advances."""
    best = None
    best_v = -math.inf
    for a in legal:
        child = node.children[a]
        child.avail += 1
        v = child.mean() + c * math.sqrt(math.log(child.avail) / child.visits)
        if v > best_v:
            best, best_v = child, v
    return best


def _model_move(models, seat: int, state: GameState):
    action = models[seat].act(state.observe(seat))
    try:
        state.apply(action)
    except IllegalActionError as exc:
        name = getattr(models[seat], "name", repr(models[seat]))
        raise IllegalModelActionError(
            f"model {name!r} for seat {seat} chose illegal {action}: {exc}"
        ) from exc
    return action


def _search(obs: "Observation", config: SearchConfig,
            models) -> tuple["Action", Node | None]:
    legal_root = obs.legal_actions()
    if len(legal_root) == 1:
        return legal_root[0], None
    rng = config.rng
    viewer = obs.viewer
    c = config.exploration
    root = Node(None, viewer)
    reward_sum = 0.0
    completed = 0

    for _ in _iterations(config):
        state = config.determinizer(obs, rng)
        node = root
        path = [root]

        # Selection and one expansion.
        while not state.is_terminal():
            if models is not None and node.player != viewer:
                action = _model_move(models, node.player, state)
                child = node.children.get(action)
                if child is None:
                    child = Node(action, state.current_player)
                    node.children[action] = child
                    path.append(child)
                    break
                node = child
                path.append(node)
                continue
            acts = state.legal_actions()
            untried = [a for a in acts if a not in node.children]
            if untried:
                action = untried[0] if len(untried) == 1 else rng.choice(untried)
                state.apply(action)
                child = Node(action, state.current_player)
                node.children[action] = child
                path.append(child)
                break
            node = _ucb_pick(node, acts, c)
            state.apply(node.action)
            path.append(node)

        # Rollout.
        while not state.is_terminal():
            seat = state.current_player
            if models is not None and seat != viewer:
                _model_move(models, seat, state)
            else:
                state.apply(rng.choice(state.legal_actions()))

        reward = state.score() / 25.0
        for n in path:
            n.visits += 1
            n.total += reward
        reward_sum += reward
        completed += 1

    if completed == 0:
        return rng.choice(legal_root), root
    # Accounting identity: everything backpropagated reached the root.
    assert abs(root.total - reward_sum) < 1e-9

    best = None
    best_key = (-1, 0.0)
    for a in legal_root:
        child = root.children.get(a)
        key = (child.visits, child.mean()) if child is not None else (0, 0.0)
        if key > best_key:
            best, best_key = a, key
    return best, root


def ismcts_choose(obs: "Observation", config: SearchConfig) -> "Action":
    """Single-tree information-set search with uniform random rollouts."""
    action, _ = _search(obs, config, None)
    return action


def predictor_ismcts_choose(obs: "Observation", config: SearchConfig) -> "Action":
    """ISMCTS with every other seat driven by its model, in the tree and
    in rollouts alike."""
    if not config.models:
        raise SearchError("predictor_ismcts_choose needs config.models")
    missing = [s for s in range(obs.n_players)
               if s != obs.viewer and s not in config.models]
    if missing:
        raise SearchError(f"no model for seats {missing}")
    action, _ = _search(obs, config, config.models)
    return action
