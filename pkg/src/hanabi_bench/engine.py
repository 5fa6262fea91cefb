"""Hanabi state machine: deal, legality, action application, observations.

The engine is strict: apply() validates before mutating, so an illegal
action can never corrupt a state. Everything random flows from the game
seed through derived child streams, making every game replayable.

House rulings baked in here:
  - Discarding requires an information token to be gainable, so it is
    illegal at the 8-token cap.
  - Misplayed cards land in the discard pile, face up.
  - Completing a stack refunds one information token, capped at 8.
  - Once the last card is drawn, each of the n players (the drawer
    included) gets exactly one more turn.
  - The game ends immediately at score 25.
  - The stack sum is retained as the score when the lives run out.
"""

from __future__ import annotations

import random
from typing import NamedTuple, Sequence

from .cards import (
    Card,
    DECK_SIZE,
    RANKS,
    SUIT_CHARS,
    SUITS,
    card,
    copies,
    full_deck,
)
from .knowledge import CardKnowledge, update_on_tell
from .seeding import derive_seed

MAX_INFO_TOKENS = 8
MAX_LIFE_TOKENS = 3


class EngineError(Exception):
    """Base class for rule violations and misconfiguration."""


class ConfigurationError(EngineError):
    pass


class TurnOrderError(EngineError):
    pass


class TerminalStateError(EngineError):
    pass


class IllegalActionError(EngineError):
    pass


class Play(NamedTuple):
    slot: int


class Discard(NamedTuple):
    slot: int


class Tell(NamedTuple):
    target: int
    suit: int | None
    rank: int | None


Action = Play | Discard | Tell

# Interned actions: the whole action space is tiny, so legal-move
# generation never allocates.
_PLAYS = tuple(Play(i) for i in range(10))
_DISCARDS = tuple(Discard(i) for i in range(10))
_TELL_SUIT = tuple(tuple(Tell(t, s, None) for s in SUITS) for t in range(5))
_TELL_RANK = tuple(tuple(Tell(t, None, r) for r in RANKS) for t in range(5))


def play(slot: int) -> Play:
    return _PLAYS[slot] if slot < 10 else Play(slot)


def discard(slot: int) -> Discard:
    return _DISCARDS[slot] if slot < 10 else Discard(slot)


def tell_suit(target: int, suit: int) -> Tell:
    return _TELL_SUIT[target][suit]


def tell_rank(target: int, rank: int) -> Tell:
    return _TELL_RANK[target][rank - 1]


class ActionOutcome(NamedTuple):
    """What an action did: the card moved (plays/discards), whether a play
    hit, which slots a tell pointed at, and whether a replacement was drawn."""
    card: Card | None
    success: bool | None
    indicated: tuple[int, ...] | None
    drew: bool


class MoveRecord(NamedTuple):
    player: int
    action: Action
    outcome: ActionOutcome


class Observation:
    """One player's view of a state: everyone else's cards, their own hand
    only through CardKnowledge, plus all public information.

    Observations are cheap snapshots taken at call time; knowledge objects
    are shared with the state, so treat an observation as read-only and
    stale once the underlying game advances.
    """

    __slots__ = (
        "viewer", "n_players", "hand_size", "current_player", "turn",
        "hands", "hand_sizes", "knowledge", "stacks", "discard",
        "info_tokens", "life_tokens", "deck_size", "final_turns_left",
        "_state", "_unseen", "_dead",
    )

    def __init__(self, state: "GameState", viewer: int):
        self.viewer = viewer
        self.n_players = state.n_players
        self.hand_size = state.hand_size
        self.current_player = state.current_player
        self.turn = state.turn
        self.hands = tuple(
            () if p == viewer else tuple(h) for p, h in enumerate(state.hands)
        )
        self.hand_sizes = tuple(len(h) for h in state.hands)
        self.knowledge = state.knowledge
        self.stacks = tuple(state.stacks)
        self.discard = tuple(state.discard)
        self.info_tokens = state.info_tokens
        self.life_tokens = state.life_tokens
        self.deck_size = len(state.deck)
        self.final_turns_left = state.final_turns_left
        self._state = state
        self._unseen = None
        self._dead = None

    @property
    def move_history(self) -> tuple[MoveRecord, ...]:
        return tuple(self._state.move_history)

    @property
    def own_knowledge(self) -> Sequence[CardKnowledge]:
        return self.knowledge[self.viewer]

    @property
    def deck_has_cards(self) -> bool:
        return self.deck_size > 0

    def visible_hand(self, player: int) -> tuple[Card, ...]:
        if player == self.viewer:
            raise ValueError("a player cannot see their own hand")
        return self.hands[player]

    def other_players(self) -> list[int]:
        """The other seats in turn order starting after the viewer."""
        n = self.n_players
        return [(self.viewer + i) % n for i in range(1, n)]

    def legal_actions(self) -> list[Action]:
        """Legal actions for the viewer, derived from public info only.
        Matches GameState.legal_actions exactly (same order)."""
        return _legal_actions(
            self.hand_sizes[self.viewer], self.info_tokens, self.hands,
            self.viewer, self.n_players,
        )

    def snapshot(self) -> tuple:
        """Value-equality key over everything the viewer can see."""
        return (
            self.viewer, self.current_player, self.turn, self.hands,
            self.hand_sizes,
            tuple((k.suit_mask, k.rank_mask, k.drawn_turn)
                  for hand in self.knowledge for k in hand),
            self.stacks, self.discard, self.info_tokens, self.life_tokens,
            self.deck_size, self.final_turns_left,
        )


def _legal_actions(hand_len, info_tokens, hands, player, n_players):
    actions: list[Action] = []
    for slot in range(hand_len):
        actions.append(_PLAYS[slot])
    if info_tokens < MAX_INFO_TOKENS:
        for slot in range(hand_len):
            actions.append(_DISCARDS[slot])
    if info_tokens >= 1:
        for i in range(1, n_players):
            target = (player + i) % n_players
            suit_mask = 0
            rank_mask = 0
            for c in hands[target]:
                suit_mask |= 1 << c.suit
                rank_mask |= 1 << (c.rank - 1)
            tells_s = _TELL_SUIT[target]
            tells_r = _TELL_RANK[target]
            for s in SUITS:
                if suit_mask >> s & 1:
                    actions.append(tells_s[s])
            for r in RANKS:
                if rank_mask >> (r - 1) & 1:
                    actions.append(tells_r[r - 1])
    return actions


class GameState:
    """Full hidden-information game state; mutated only through apply()."""

    __slots__ = (
        "n_players", "hand_size", "seed", "deck", "hands", "stacks",
        "discard", "info_tokens", "life_tokens", "current_player", "turn",
        "knowledge", "final_turns_left", "move_history",
    )

    def __init__(self):
        raise TypeError("use new_game() or GameState.from_components()")

    @classmethod
    def _blank(cls) -> "GameState":
        return object.__new__(cls)

    @classmethod
    def from_components(
        cls,
        hands: Sequence[Sequence[Card]],
        deck: Sequence[Card],
        stacks: Sequence[int],
        discard_pile: Sequence[Card] = (),
        info_tokens: int = MAX_INFO_TOKENS,
        life_tokens: int = MAX_LIFE_TOKENS,
        current_player: int = 0,
        knowledge: list[list[CardKnowledge]] | None = None,
        turn: int = 0,
        final_turns_left: int | None = None,
        hand_size: int | None = None,
        seed: int | None = None,
        validate: bool = True,
    ) -> "GameState":
        """Assemble a mid-game state directly. Checks the 50-card multiset
        and, when knowledge is supplied, that each card fits its slot's
        possibility sets."""
        st = cls._blank()
        st.n_players = len(hands)
        st.hand_size = hand_size if hand_size is not None else max(
            (len(h) for h in hands), default=0)
        st.seed = seed
        st.deck = list(deck)
        st.hands = [list(h) for h in hands]
        st.stacks = list(stacks)
        st.discard = list(discard_pile)
        st.info_tokens = info_tokens
        st.life_tokens = life_tokens
        st.current_player = current_player
        st.turn = turn
        if knowledge is None:
            knowledge = [[CardKnowledge() for _ in h] for h in st.hands]
        st.knowledge = knowledge
        if final_turns_left is None and not st.deck:
            final_turns_left = st.n_players
        st.final_turns_left = final_turns_left
        st.move_history = []
        if validate:
            st._validate()
        return st

    def _validate(self) -> None:
        if not 2 <= self.n_players <= 5:
            raise ConfigurationError(f"n_players must be 2..5, got {self.n_players}")
        if not 0 <= self.info_tokens <= MAX_INFO_TOKENS:
            raise ConfigurationError(f"info_tokens out of range: {self.info_tokens}")
        if not 0 <= self.life_tokens <= MAX_LIFE_TOKENS:
            raise ConfigurationError(f"life_tokens out of range: {self.life_tokens}")
        if any(not 0 <= v <= 5 for v in self.stacks) or len(self.stacks) != 5:
            raise ConfigurationError(f"bad stacks: {self.stacks}")
        counts: dict[Card, int] = {}
        for c in self.deck:
            counts[c] = counts.get(c, 0) + 1
        for h in self.hands:
            for c in h:
                counts[c] = counts.get(c, 0) + 1
        for c in self.discard:
            counts[c] = counts.get(c, 0) + 1
        for s, top in enumerate(self.stacks):
            for r in range(1, top + 1):
                c = card(s, r)
                counts[c] = counts.get(c, 0) + 1
        for s in SUITS:
            for r in RANKS:
                c = card(s, r)
                if counts.get(c, 0) != copies(r):
                    raise ConfigurationError(
                        f"card conservation violated for {c}: {counts.get(c, 0)}")
        for p, h in enumerate(self.hands):
            if len(self.knowledge[p]) != len(h):
                raise ConfigurationError(f"knowledge shape mismatch for player {p}")
            for c, k in zip(h, self.knowledge[p]):
                if not k.can_be(c):
                    raise ConfigurationError(
                        f"player {p} holds {c} outside its possibility sets")

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------
    def score(self) -> int:
        return sum(self.stacks)

    def is_terminal(self) -> bool:
        return (self.life_tokens == 0
                or self.final_turns_left == 0
                or sum(self.stacks) == 25)

    def legal_actions(self, player: int | None = None) -> list[Action]:
        """All legal actions for the player to move. Never empty in a
        non-terminal state: a Tell or a Discard is always available."""
        if self.is_terminal():
            raise TerminalStateError("no actions in a terminal state")
        if player is not None and player != self.current_player:
            raise TurnOrderError(
                f"player {player} asked to move, but it is "
                f"player {self.current_player}'s turn")
        p = self.current_player
        return _legal_actions(len(self.hands[p]), self.info_tokens,
                              self.hands, p, self.n_players)

    def observe(self, player: int) -> Observation:
        if not 0 <= player < self.n_players:
            raise ConfigurationError(f"no such player: {player}")
        return Observation(self, player)

    def copy(self) -> "GameState":
        st = GameState._blank()
        st.n_players = self.n_players
        st.hand_size = self.hand_size
        st.seed = self.seed
        st.deck = list(self.deck)
        st.hands = [list(h) for h in self.hands]
        st.stacks = list(self.stacks)
        st.discard = list(self.discard)
        st.info_tokens = self.info_tokens
        st.life_tokens = self.life_tokens
        st.current_player = self.current_player
        st.turn = self.turn
        st.knowledge = [[k.clone() for k in hand] for hand in self.knowledge]
        st.final_turns_left = self.final_turns_left
        st.move_history = list(self.move_history)
        return st

    # ------------------------------------------------------------------
    # Mutation
    # ------------------------------------------------------------------
    def apply(self, action: Action) -> ActionOutcome:
        """Validate then apply one action; advances the turn. Raises
        without mutating anything if the action is illegal."""
        if self.is_terminal():
            raise TerminalStateError("game is over")
        p = self.current_player
        hand = self.hands[p]
        kind = type(action)

        if kind is Tell:
            target, t_suit, t_rank = action
            if self.info_tokens < 1:
                raise IllegalActionError("telling needs an information token")
            if not 0 <= target < self.n_players or target == p:
                raise IllegalActionError(f"bad tell target {target}")
            if (t_suit is None) == (t_rank is None):
                raise IllegalActionError("a tell names a suit or a rank, not both")
            target_hand = self.hands[target]
            if t_suit is not None:
                indicated = tuple(i for i, c in enumerate(target_hand)
                                  if c.suit == t_suit)
            else:
                indicated = tuple(i for i, c in enumerate(target_hand)
                                  if c.rank == t_rank)
            if not indicated:
                raise IllegalActionError("a tell must point at at least one card")
            was_final = self.final_turns_left is not None
            self.info_tokens -= 1
            update_on_tell(self.knowledge[target], action, indicated)
            outcome = ActionOutcome(None, None, indicated, False)

        elif kind is Play:
            slot = action.slot
            if not 0 <= slot < len(hand):
                raise IllegalActionError(f"no card in slot {slot}")
            was_final = self.final_turns_left is not None
            c = hand.pop(slot)
            del self.knowledge[p][slot]
            if self.stacks[c.suit] == c.rank - 1:
                self.stacks[c.suit] = c.rank
                if c.rank == 5 and self.info_tokens < MAX_INFO_TOKENS:
                    self.info_tokens += 1
                success = True
            else:
                self.life_tokens -= 1
                self.discard.append(c)
                success = False
            drew = self._draw(p)
            outcome = ActionOutcome(c, success, None, drew)

        elif kind is Discard:
            slot = action.slot
            if self.info_tokens >= MAX_INFO_TOKENS:
                raise IllegalActionError("discarding at the token cap gains nothing")
            if not 0 <= slot < len(hand):
                raise IllegalActionError(f"no card in slot {slot}")
            was_final = self.final_turns_left is not None
            c = hand.pop(slot)
            del self.knowledge[p][slot]
            self.discard.append(c)
            self.info_tokens += 1
            drew = self._draw(p)
            outcome = ActionOutcome(c, None, None, drew)

        else:
            raise IllegalActionError(f"not an action: {action!r}")

        if was_final:
            self.final_turns_left -= 1
        self.turn += 1
        self.move_history.append(MoveRecord(p, action, outcome))
        self.current_player = (p + 1) % self.n_players
        return outcome

    def _draw(self, player: int) -> bool:
        deck = self.deck
        if not deck:
            return False
        self.hands[player].append(deck.pop())
        self.knowledge[player].append(CardKnowledge(drawn_turn=self.turn + 1))
        if not deck:
            # Last card drawn: everyone, this player included, gets one
            # more turn after the current one.
            self.final_turns_left = self.n_players
        return True


def new_game(n_players: int, seed: int, hand_size: int = 5) -> GameState:
    """Deal a fresh game. The deal is a pure function of the seed."""
    if not 2 <= n_players <= 5:
        raise ConfigurationError(f"n_players must be 2..5, got {n_players}")
    if hand_size <= 0:
        raise ConfigurationError(f"hand_size must be positive, got {hand_size}")
    if n_players * hand_size > DECK_SIZE:
        raise ConfigurationError("not enough cards to deal that configuration")
    deck = full_deck()
    random.Random(derive_seed(seed, "deal")).shuffle(deck)
    st = GameState._blank()
    st.n_players = n_players
    st.hand_size = hand_size
    st.seed = seed
    st.deck = deck
    st.hands = [[deck.pop() for _ in range(hand_size)] for _ in range(n_players)]
    st.stacks = [0, 0, 0, 0, 0]
    st.discard = []
    st.info_tokens = MAX_INFO_TOKENS
    st.life_tokens = MAX_LIFE_TOKENS
    st.current_player = 0
    st.turn = 0
    st.knowledge = [[CardKnowledge() for _ in range(hand_size)]
                    for _ in range(n_players)]
    st.final_turns_left = None
    st.move_history = []
    return st


# ----------------------------------------------------------------------
# Serialization: trace lines and replay files
# ----------------------------------------------------------------------
def action_kind(action: Action) -> str:
    return type(action).__name__


def action_to_str(action: Action) -> str:
    kind = type(action)
    if kind is Play:
        return f"play {action.slot}"
    if kind is Discard:
        return f"discard {action.slot}"
    if action.suit is not None:
        return f"tell {action.target} suit {SUIT_CHARS[action.suit]}"
    return f"tell {action.target} rank {action.rank}"


def action_from_str(text: str) -> Action:
    parts = text.split()
    if parts[0] == "play":
        return play(int(parts[1]))
    if parts[0] == "discard":
        return discard(int(parts[1]))
    if parts[0] == "tell":
        target = int(parts[1])
        if parts[2] == "suit":
            return tell_suit(target, SUIT_CHARS.index(parts[3].upper()))
        if parts[2] == "rank":
            return tell_rank(target, int(parts[3]))
    raise ValueError(f"unparseable action: {text!r}")


def format_trace_line(turn: int, record: MoveRecord,
                      lives: int, info: int, score: int) -> str:
    """One stable, human-readable line per move; token counts and score are
    the values after the move."""
    action, outcome = record.action, record.outcome
    kind = type(action)
    if kind is Tell:
        which = (f"suit={SUIT_CHARS[action.suit]}" if action.suit is not None
                 else f"rank={action.rank}")
        detail = f"target={action.target} {which}"
        out = "slots=" + ",".join(str(i) for i in outcome.indicated)
    else:
        detail = f"slot={action.slot}"
        if kind is Play:
            out = f"card={outcome.card} {'hit' if outcome.success else 'miss'}"
        else:
            out = f"card={outcome.card}"
    return (f"turn={turn} player={record.player} action={kind.__name__} "
            f"detail={detail} outcome={out} lives={lives} info={info} score={score}")


def trace_lines(state: GameState) -> list[str]:
    """Reconstruct the full trace of a finished (or in-progress) game by
    replaying its move history from the seed."""
    if state.seed is None:
        raise ConfigurationError("state was not created by new_game; no seed to replay")
    fresh = new_game(state.n_players, state.seed, state.hand_size)
    lines = []
    for t, rec in enumerate(state.move_history):
        fresh.apply(rec.action)
        lines.append(format_trace_line(
            t, rec, fresh.life_tokens, fresh.info_tokens, fresh.score()))
    return lines


def write_replay(state: GameState) -> str:
    """Serialize a game so replay_game() can reconstruct it bit-identically."""
    if state.seed is None:
        raise ConfigurationError("state was not created by new_game; cannot replay")
    lines = [f"players={state.n_players} seed={state.seed} hand_size={state.hand_size}"]
    lines.extend(action_to_str(rec.action) for rec in state.move_history)
    return "\n".join(lines) + "\n"


def replay_game(text: str) -> GameState:
    """Rebuild a state from a replay file's text."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = dict(field.split("=") for field in lines[0].split())
    st = new_game(int(header["players"]), int(header["seed"]),
                  int(header["hand_size"]))
    for ln in lines[1:]:
        st.apply(action_from_str(ln))
    return st
