"""Card primitives: five suits, ranks 1..5, and the 50-card deck composition."""

from typing import NamedTuple

WHITE, YELLOW, GREEN, BLUE, RED = range(5)
SUITS = (WHITE, YELLOW, GREEN, BLUE, RED)
SUIT_CHARS = "WYGBR"
SUIT_NAMES = ("White", "Yellow", "Green", "Blue", "Red")
RANKS = (1, 2, 3, 4, 5)

# Copies per rank: three 1s, two each of 2/3/4, one 5 (10 cards per suit).
COPIES_BY_RANK = (3, 2, 2, 2, 1)
DECK_SIZE = 50


class Card(NamedTuple):
    suit: int
    rank: int

    def __str__(self) -> str:
        return f"{SUIT_CHARS[self.suit]}{self.rank}"


# Interned instances; the engine only ever deals these 25 objects.
_CARDS = tuple(tuple(Card(s, r) for r in RANKS) for s in SUITS)


def card(suit: int, rank: int) -> Card:
    if not 1 <= rank <= 5:
        raise ValueError(f"rank out of range: {rank}")
    return _CARDS[suit][rank - 1]


def copies(rank: int) -> int:
    """Number of copies of a given rank within one suit."""
    return COPIES_BY_RANK[rank - 1]


def full_deck() -> list[Card]:
    """All 50 cards in canonical (suit-major, rank-ascending) order."""
    return [
        _CARDS[s][r - 1]
        for s in SUITS
        for r in RANKS
        for _ in range(COPIES_BY_RANK[r - 1])
    ]


def parse_card(text: str) -> Card:
    """Parse the compact form used in traces, e.g. "R3"."""
    if not text:
        raise ValueError("empty card string")
    suit = SUIT_CHARS.index(text[0].upper())
    rank = int(text[1:])
    if rank not in RANKS:
        raise ValueError(f"bad card rank in {text!r}")
    return _CARDS[suit][rank - 1]
