"""Per-slot card knowledge and unseen-card probability math.

Every Tell carries information about all slots of the target hand: pointed
slots pin the told dimension, unpointed slots rule the told value out.
Probabilities are computed per slot by counting card copies the holder
cannot see (other hands, the discard pile and played stacks are visible to
them; their own hand is not). Slots are treated independently against that
global unseen pool; there is no joint inference across the holder's slots.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Iterable, NamedTuple

from .cards import COPIES_BY_RANK, Card, card

if TYPE_CHECKING:
    from .engine import Observation

FULL_MASK = 0b11111
# Bit positions set in each 5-bit mask, precomputed for fast iteration.
_BITS = tuple(tuple(i for i in range(5) if m >> i & 1) for m in range(32))
# Sentinel rank meaning "no dead rank above the stack" in dead-rank tables.
NO_DEAD_RANK = 6


class InconsistencyError(Exception):
    """A possibility set became empty; signals an engine or caller bug."""


class CardKnowledge:
    """What a card's holder can deduce about one slot from Tell actions.

    Possibility sets are 5-bit masks: bit s for suit s, bit r-1 for rank r.
    The true identity is always inside possible_suits x possible_ranks.
    """

    __slots__ = ("suit_mask", "rank_mask", "drawn_turn")

    def __init__(self, drawn_turn: int = 0,
                 suit_mask: int = FULL_MASK, rank_mask: int = FULL_MASK):
        self.suit_mask = suit_mask
        self.rank_mask = rank_mask
        self.drawn_turn = drawn_turn

    @property
    def possible_suits(self) -> tuple[int, ...]:
        return _BITS[self.suit_mask]

    @property
    def possible_ranks(self) -> tuple[int, ...]:
        return tuple(b + 1 for b in _BITS[self.rank_mask])

    @property
    def is_suit_known(self) -> bool:
        m = self.suit_mask
        return m & (m - 1) == 0

    @property
    def is_rank_known(self) -> bool:
        m = self.rank_mask
        return m & (m - 1) == 0

    @property
    def known_suit(self) -> int | None:
        return self.suit_mask.bit_length() - 1 if self.is_suit_known else None

    @property
    def known_rank(self) -> int | None:
        return self.rank_mask.bit_length() if self.is_rank_known else None

    @property
    def known_card(self) -> Card | None:
        if self.is_suit_known and self.is_rank_known:
            return card(self.suit_mask.bit_length() - 1, self.rank_mask.bit_length())
        return None

    def apply_suit(self, suit: int, indicated: bool) -> None:
        if indicated:
            self.suit_mask &= 1 << suit
        else:
            self.suit_mask &= ~(1 << suit)
        if not self.suit_mask:
            raise InconsistencyError("suit possibilities emptied")

    def apply_rank(self, rank: int, indicated: bool) -> None:
        if indicated:
            self.rank_mask &= 1 << (rank - 1)
        else:
            self.rank_mask &= ~(1 << (rank - 1))
        if not self.rank_mask:
            raise InconsistencyError("rank possibilities emptied")

    def can_be(self, c: Card) -> bool:
        return bool(self.suit_mask >> c.suit & 1 and self.rank_mask >> (c.rank - 1) & 1)

    def clone(self) -> "CardKnowledge":
        return CardKnowledge(self.drawn_turn, self.suit_mask, self.rank_mask)

    def __eq__(self, other) -> bool:
        return (isinstance(other, CardKnowledge)
                and self.suit_mask == other.suit_mask
                and self.rank_mask == other.rank_mask
                and self.drawn_turn == other.drawn_turn)

    def __repr__(self) -> str:
        suits = "".join("WYGBR"[s] for s in self.possible_suits)
        ranks = "".join(str(r) for r in self.possible_ranks)
        return f"CardKnowledge({suits}|{ranks}, drawn@{self.drawn_turn})"


def update_on_tell(slots: list[CardKnowledge], tell, indicated: Iterable[int]) -> None:
    """Fold one Tell into a hand's knowledge: pointed slots collapse the
    told dimension, the rest drop the told value. Idempotent."""
    pointed = frozenset(indicated)
    if tell.suit is not None:
        for i, k in enumerate(slots):
            k.apply_suit(tell.suit, i in pointed)
    else:
        for i, k in enumerate(slots):
            k.apply_rank(tell.rank, i in pointed)


class IdentityDistribution(NamedTuple):
    """Unseen-copy counts over the identities a slot can still be."""
    weights: dict[Card, int]
    total: int


def unseen_counts(obs: "Observation") -> list[int]:
    """Remaining copies of each identity the viewer cannot see, as a flat
    list indexed suit*5 + rank - 1. Cached on the observation."""
    counts = obs._unseen
    if counts is None:
        counts = [COPIES_BY_RANK[r - 1] for _ in range(5) for r in (1, 2, 3, 4, 5)]
        viewer = obs.viewer
        for p, hand in enumerate(obs.hands):
            if p != viewer:
                for c in hand:
                    counts[c.suit * 5 + c.rank - 1] -= 1
        for c in obs.discard:
            counts[c.suit * 5 + c.rank - 1] -= 1
        for s, top in enumerate(obs.stacks):
            for r in range(1, top + 1):
                counts[s * 5 + r - 1] -= 1
        obs._unseen = counts
    return counts


def dead_ranks(obs: "Observation") -> list[int]:
    """Per suit: the lowest rank above the stack with every copy in the
    discard pile, or NO_DEAD_RANK. Ranks beyond it can never score."""
    dead = obs._dead
    if dead is None:
        in_discard = [0] * 25
        for c in obs.discard:
            in_discard[c.suit * 5 + c.rank - 1] += 1
        dead = []
        for s, top in enumerate(obs.stacks):
            first = NO_DEAD_RANK
            for r in range(top + 1, 6):
                if in_discard[s * 5 + r - 1] == COPIES_BY_RANK[r - 1]:
                    first = r
                    break
            dead.append(first)
        obs._dead = dead
    return dead


def card_playable(c: Card, stacks) -> bool:
    """A card is playable when it extends its suit's stack by exactly one."""
    return stacks[c.suit] == c.rank - 1


def card_useless(c: Card, stacks, dead) -> bool:
    """A card can never score: the stack has passed it, or some lower rank
    it still needs has all copies discarded."""
    return c.rank <= stacks[c.suit] or dead[c.suit] < c.rank


def identity_distribution(obs: "Observation", slot: int) -> IdentityDistribution:
    k = obs.knowledge[obs.viewer][slot]
    counts = unseen_counts(obs)
    weights: dict[Card, int] = {}
    total = 0
    for s in _BITS[k.suit_mask]:
        base = s * 5
        for rb in _BITS[k.rank_mask]:
            w = counts[base + rb]
            if w > 0:
                weights[card(s, rb + 1)] = w
                total += w
    if total == 0:
        raise InconsistencyError(f"slot {slot} has no consistent identity")
    return IdentityDistribution(weights, total)


def playability_probability(obs: "Observation", slot: int) -> float:
    """Probability the slot's card is playable right now, by unseen-copy
    counting over its possibility sets."""
    k = obs.knowledge[obs.viewer][slot]
    counts = unseen_counts(obs)
    stacks = obs.stacks
    total = 0
    hit = 0
    for s in _BITS[k.suit_mask]:
        base = s * 5
        want = stacks[s]  # playable rank bit for this suit is `want`
        for rb in _BITS[k.rank_mask]:
            w = counts[base + rb]
            total += w
            if rb == want:
                hit += w
    if total == 0:
        raise InconsistencyError(f"slot {slot} has no consistent identity")
    return hit / total


def uselessness_probability(obs: "Observation", slot: int) -> float:
    """Probability the slot's card can never score."""
    k = obs.knowledge[obs.viewer][slot]
    counts = unseen_counts(obs)
    stacks = obs.stacks
    dead = dead_ranks(obs)
    total = 0
    hit = 0
    for s in _BITS[k.suit_mask]:
        base = s * 5
        top = stacks[s]
        dead_at = dead[s]
        for rb in _BITS[k.rank_mask]:
            w = counts[base + rb]
            total += w
            r = rb + 1
            if r <= top or dead_at < r:
                hit += w
    if total == 0:
        raise InconsistencyError(f"slot {slot} has no consistent identity")
    return hit / total


def is_definitely_playable(obs: "Observation", slot: int) -> bool:
    """True when every identity in the slot's possibility sets is
    playable. Pure set reasoning: no card counting, so this is what the
    holder can prove from tells alone. Implies probability 1, but a
    probability of 1 reached only through exhausted copies does not imply
    this."""
    k = obs.knowledge[obs.viewer][slot]
    stacks = obs.stacks
    for s in _BITS[k.suit_mask]:
        want = stacks[s]
        for rb in _BITS[k.rank_mask]:
            if rb != want:
                return False
    return True


def is_definitely_useless(obs: "Observation", slot: int) -> bool:
    """True when every identity in the slot's possibility sets can never
    score. Same set-only reasoning as is_definitely_playable."""
    k = obs.knowledge[obs.viewer][slot]
    return useless_by_sets(k, obs.stacks, dead_ranks(obs))


def useless_by_sets(k: CardKnowledge, stacks, dead) -> bool:
    """Set-only uselessness proof: every identity in the possibility
    product can never score. Used when reasoning about another player's
    hand, where their exact unseen pool is not available."""
    for s in _BITS[k.suit_mask]:
        top = stacks[s]
        dead_at = dead[s]
        for rb in _BITS[k.rank_mask]:
            r = rb + 1
            if r > top and dead_at >= r:
                return False
    return True
