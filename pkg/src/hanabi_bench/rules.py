"""Production rules: guarded action generators over observations.

A rule looks at one player's Observation and either fires, returning a
legal Action, or abstains, returning None. Agents chain rules with
first-match semantics (see agents.py). Rules read only what the acting
player could know: public state plus per-slot knowledge.

Rules that need randomness take it from the explicit rng argument, so
behaviour is a pure function of (observation, rng state).

parse_rule() accepts a small expression language, used by agent
definitions and the command line:

    rule  := 'If' '(' expr ')' '{' rule '}' [ 'Else' '{' rule '}' ]
           | NAME                          e.g. PlaySafeCard
           | NAME '(' NUMBER ')'           e.g. PlayProbablySafeCard(0.6)
           | 'TellMostInformation' [ '(' ('new'|'all') ')' ]
    expr  := and ( '|' and )*
    and   := unary ( '&' unary )*
    unary := '!' unary | '(' expr ')' | VAR CMP NUMBER | VAR
    VAR   := lives | info | infoTokens | deckHasCards | deckHasCardsLeft
    CMP   := '>' | '<' | '>=' | '<=' | '==' | '!='

Bare VAR atoms must be boolean (deckHasCards); lives and info need a
comparison. TellMostInformation defaults to counting only new facts;
the 'all' flag counts every touched card.
"""

from __future__ import annotations

import operator
import re
from typing import TYPE_CHECKING, Callable

from .engine import (
    Action,
    MAX_INFO_TOKENS,
    discard as make_discard,
    play as make_play,
    tell_rank,
    tell_suit,
)
from .knowledge import (
    card_playable,
    card_useless,
    dead_ranks,
    is_definitely_playable,
    is_definitely_useless,
    playability_probability,
    uselessness_probability,
    useless_by_sets,
)

if TYPE_CHECKING:
    import random

    from .engine import Observation, Tell


class Rule:
    """Base class; subclasses implement try_fire."""

    __slots__ = ()

    def try_fire(self, obs: "Observation", rng: "random.Random") -> Action | None:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<Rule {self}>"


# ----------------------------------------------------------------------
# Shared helpers
# ----------------------------------------------------------------------
def _missing_dimension_tell(obs: "Observation", target: int, slot: int):
    """Complete an unknown dimension of the target's card, suit before
    rank; None when both dimensions are already known."""
    k = obs.knowledge[target][slot]
    c = obs.hands[target][slot]
    if not k.is_suit_known:
        return tell_suit(target, c.suit)
    if not k.is_rank_known:
        return tell_rank(target, c.rank)
    return None


def _legal_tells_to(obs: "Observation", target: int) -> list["Tell"]:
    """Distinct legal tells to one player: suits ascending, then ranks."""
    suits = sorted({c.suit for c in obs.hands[target]})
    ranks = sorted({c.rank for c in obs.hands[target]})
    return ([tell_suit(target, s) for s in suits]
            + [tell_rank(target, r) for r in ranks])


def _conveys_new_information(obs: "Observation", t: "Tell") -> bool:
    """True when some indicated card's told dimension is still open."""
    know = obs.knowledge[t.target]
    hand = obs.hands[t.target]
    if t.suit is not None:
        return any(c.suit == t.suit and not know[i].is_suit_known
                   for i, c in enumerate(hand))
    return any(c.rank == t.rank and not know[i].is_rank_known
               for i, c in enumerate(hand))


def _check_threshold(threshold: float) -> float:
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    return threshold


# ----------------------------------------------------------------------
# Play rules
# ----------------------------------------------------------------------
class PlayIfCertain(Rule):
    """Play a card whose exact identity is known and currently playable."""

    def try_fire(self, obs, rng):
        stacks = obs.stacks
        for slot, k in enumerate(obs.own_knowledge):
            c = k.known_card
            if c is not None and card_playable(c, stacks):
                return make_play(slot)
        return None

    def __str__(self) -> str:
        return "PlayIfCertain"


class PlaySafeCard(Rule):
    """Play a card that cannot miss, judging by possibility sets and the
    copies still unseen. Weaker premise than PlayIfCertain: the exact
    identity may be open as long as every candidate is playable."""

    def try_fire(self, obs, rng):
        for slot in range(obs.hand_sizes[obs.viewer]):
            if is_definitely_playable(obs, slot):
                return make_play(slot)
        return None

    def __str__(self) -> str:
        return "PlaySafeCard"


class PlayProbablySafeCard(Rule):
    """Play the most probably playable card if that probability reaches
    the threshold; ties go to the lowest slot."""

    __slots__ = ("threshold",)

    def __init__(self, threshold: float):
        self.threshold = _check_threshold(threshold)

    def try_fire(self, obs, rng):
        best_slot = None
        best_p = -1.0
        for slot in range(obs.hand_sizes[obs.viewer]):
            p = playability_probability(obs, slot)
            if p > best_p:
                best_slot, best_p = slot, p
        if best_slot is not None and best_p >= self.threshold:
            return make_play(best_slot)
        return None

    def __str__(self) -> str:
        return f"PlayProbablySafeCard({self.threshold:g})"


# ----------------------------------------------------------------------
# Discard rules (all abstain at the info-token cap, where discarding
# is illegal)
# ----------------------------------------------------------------------
class OsawaDiscard(Rule):
    """Discard a card that provably can never score."""

    def try_fire(self, obs, rng):
        if obs.info_tokens >= MAX_INFO_TOKENS:
            return None
        for slot in range(obs.hand_sizes[obs.viewer]):
            if is_definitely_useless(obs, slot):
                return make_discard(slot)
        return None

    def __str__(self) -> str:
        return "OsawaDiscard"


class DiscardOldestFirst(Rule):
    """Discard the card held the longest; ties go to the lowest slot."""

    def try_fire(self, obs, rng):
        if obs.info_tokens >= MAX_INFO_TOKENS:
            return None
        ks = obs.own_knowledge
        if not ks:
            return None
        slot = min(range(len(ks)), key=lambda i: (ks[i].drawn_turn, i))
        return make_discard(slot)

    def __str__(self) -> str:
        return "DiscardOldestFirst"


class DiscardRandomly(Rule):
    """Discard a uniformly random card."""

    def try_fire(self, obs, rng):
        n = obs.hand_sizes[obs.viewer]
        if obs.info_tokens >= MAX_INFO_TOKENS or n == 0:
            return None
        return make_discard(rng.randrange(n))

    def __str__(self) -> str:
        return "DiscardRandomly"


class DiscardProbablyUselessCard(Rule):
    """Discard the card most probably useless if that probability reaches
    the threshold; ties go to the lowest slot."""

    __slots__ = ("threshold",)

    def __init__(self, threshold: float):
        self.threshold = _check_threshold(threshold)

    def try_fire(self, obs, rng):
        if obs.info_tokens >= MAX_INFO_TOKENS:
            return None
        best_slot = None
        best_p = -1.0
        for slot in range(obs.hand_sizes[obs.viewer]):
            p = uselessness_probability(obs, slot)
            if p > best_p:
                best_slot, best_p = slot, p
        if best_slot is not None and best_p >= self.threshold:
            return make_discard(best_slot)
        return None

    def __str__(self) -> str:
        return f"DiscardProbablyUselessCard({self.threshold:g})"


# ----------------------------------------------------------------------
# Tell rules (all abstain without an information token)
# ----------------------------------------------------------------------
class TellPlayableCard(Rule):
    """Tell the next player a uniformly random fact about one of their
    playable cards. The choice space is (playable card, dimension) pairs,
    so a suit shared by two playable cards is twice as likely."""

    def try_fire(self, obs, rng):
        if obs.info_tokens < 1:
            return None
        target = (obs.viewer + 1) % obs.n_players
        stacks = obs.stacks
        facts = []
        for c in obs.hands[target]:
            if card_playable(c, stacks):
                facts.append(tell_suit(target, c.suit))
                facts.append(tell_rank(target, c.rank))
        if not facts:
            return None
        return rng.choice(facts)

    def __str__(self) -> str:
        return "TellPlayableCard"


class TellPlayableCardOuter(Rule):
    """Like TellPlayableCard, restricted to facts the target does not
    already know; abstains when every playable card is fully known."""

    def try_fire(self, obs, rng):
        if obs.info_tokens < 1:
            return None
        target = (obs.viewer + 1) % obs.n_players
        stacks = obs.stacks
        know = obs.knowledge[target]
        facts = []
        for slot, c in enumerate(obs.hands[target]):
            if card_playable(c, stacks):
                if not know[slot].is_suit_known:
                    facts.append(tell_suit(target, c.suit))
                if not know[slot].is_rank_known:
                    facts.append(tell_rank(target, c.rank))
        if not facts:
            return None
        return rng.choice(facts)

    def __str__(self) -> str:
        return "TellPlayableCardOuter"


class TellRandomly(Rule):
    """Uniformly random legal tell to the next player."""

    def try_fire(self, obs, rng):
        if obs.info_tokens < 1:
            return None
        target = (obs.viewer + 1) % obs.n_players
        tells = _legal_tells_to(obs, target)
        if not tells:
            return None
        return rng.choice(tells)

    def __str__(self) -> str:
        return "TellRandomly"


class TellUnknown(Rule):
    """Uniformly random tell to the next player among those conveying at
    least one fact the target does not already know."""

    def try_fire(self, obs, rng):
        if obs.info_tokens < 1:
            return None
        target = (obs.viewer + 1) % obs.n_players
        tells = [t for t in _legal_tells_to(obs, target)
                 if _conveys_new_information(obs, t)]
        if not tells:
            return None
        return rng.choice(tells)

    def __str__(self) -> str:
        return "TellUnknown"


class TellAnyoneAboutUsefulCard(Rule):
    """Scan the other players in turn order for a currently playable card
    with an open dimension and complete it, suit before rank. Abstains
    when every playable card out there is already fully known."""

    def try_fire(self, obs, rng):
        if obs.info_tokens < 1:
            return None
        stacks = obs.stacks
        for target in obs.other_players():
            for slot, c in enumerate(obs.hands[target]):
                if card_playable(c, stacks):
                    t = _missing_dimension_tell(obs, target, slot)
                    if t is not None:
                        return t
        return None

    def __str__(self) -> str:
        return "TellAnyoneAboutUsefulCard"


class TellAnyoneAboutUselessCard(Rule):
    """Same scan as TellAnyoneAboutUsefulCard, for cards that can never
    score."""

    def try_fire(self, obs, rng):
        if obs.info_tokens < 1:
            return None
        stacks = obs.stacks
        dead = dead_ranks(obs)
        for target in obs.other_players():
            for slot, c in enumerate(obs.hands[target]):
                if card_useless(c, stacks, dead):
                    t = _missing_dimension_tell(obs, target, slot)
                    if t is not None:
                        return t
        return None

    def __str__(self) -> str:
        return "TellAnyoneAboutUselessCard"


class TellMostInformation(Rule):
    """Tell whichever legal fact touches the most cards, over all other
    players. With new_only, a touched card counts only if its told
    dimension is still open; the rule abstains when no tell scores.
    Ties go to the earliest target in turn order, suits before ranks."""

    __slots__ = ("new_only",)

    def __init__(self, new_only: bool = True):
        self.new_only = new_only

    def try_fire(self, obs, rng):
        if obs.info_tokens < 1:
            return None
        best = None
        best_score = 0
        new_only = self.new_only
        for target in obs.other_players():
            hand = obs.hands[target]
            know = obs.knowledge[target]
            for t in _legal_tells_to(obs, target):
                if t.suit is not None:
                    score = sum(
                        1 for i, c in enumerate(hand) if c.suit == t.suit
                        and not (new_only and know[i].is_suit_known))
                else:
                    score = sum(
                        1 for i, c in enumerate(hand) if c.rank == t.rank
                        and not (new_only and know[i].is_rank_known))
                if score > best_score:
                    best, best_score = t, score
        return best

    def __str__(self) -> str:
        return "TellMostInformation" + ("(new)" if self.new_only else "(all)")


class TellDispensable(Rule):
    """Find a single tell after which its receiver can prove one of their
    cards useless from possibility sets alone. Scans players in turn
    order, suit tells before rank tells; abstains if no one tell works."""

    def try_fire(self, obs, rng):
        if obs.info_tokens < 1:
            return None
        stacks = obs.stacks
        dead = dead_ranks(obs)
        for target in obs.other_players():
            hand = obs.hands[target]
            know = obs.knowledge[target]
            for t in _legal_tells_to(obs, target):
                for slot, c in enumerate(hand):
                    k = know[slot]
                    if useless_by_sets(k, stacks, dead):
                        continue  # already provable; no new dispensability
                    k2 = k.clone()
                    if t.suit is not None:
                        k2.apply_suit(t.suit, c.suit == t.suit)
                    else:
                        k2.apply_rank(t.rank, c.rank == t.rank)
                    if useless_by_sets(k2, stacks, dead):
                        return t
        return None

    def __str__(self) -> str:
        return "TellDispensable"


# ----------------------------------------------------------------------
# Conditional composition
# ----------------------------------------------------------------------
class Condition:
    """Pure predicate over public observation facts (lives, info tokens,
    whether the deck has cards)."""

    __slots__ = ("_fn", "source")

    def __init__(self, fn: Callable, source: str):
        self._fn = fn
        self.source = source

    def __call__(self, obs: "Observation") -> bool:
        return bool(self._fn(obs))

    def __str__(self) -> str:
        return self.source


class If(Rule):
    """Gate a rule behind a condition, with an optional alternative."""

    __slots__ = ("condition", "then_rule", "else_rule")

    def __init__(self, condition: Condition, then_rule: Rule,
                 else_rule: Rule | None = None):
        self.condition = condition
        self.then_rule = then_rule
        self.else_rule = else_rule

    def try_fire(self, obs, rng):
        if self.condition(obs):
            return self.then_rule.try_fire(obs, rng)
        if self.else_rule is not None:
            return self.else_rule.try_fire(obs, rng)
        return None

    def __str__(self) -> str:
        text = f"If({self.condition}){{{self.then_rule}}}"
        if self.else_rule is not None:
            text += f"Else{{{self.else_rule}}}"
        return text


# ----------------------------------------------------------------------
# Expression parser
# ----------------------------------------------------------------------
class RuleSyntaxError(ValueError):
    pass


_SIMPLE_RULES: dict[str, type[Rule]] = {
    "PlayIfCertain": PlayIfCertain,
    "PlaySafeCard": PlaySafeCard,
    "OsawaDiscard": OsawaDiscard,
    "DiscardOldestFirst": DiscardOldestFirst,
    "DiscardRandomly": DiscardRandomly,
    "TellPlayableCard": TellPlayableCard,
    "TellPlayableCardOuter": TellPlayableCardOuter,
    "TellRandomly": TellRandomly,
    "TellUnknown": TellUnknown,
    "TellDispensable": TellDispensable,
    "TellAnyoneAboutUsefulCard": TellAnyoneAboutUsefulCard,
    "TellAnyoneAboutUselessCard": TellAnyoneAboutUselessCard,
}

_THRESHOLD_RULES: dict[str, type[Rule]] = {
    "PlayProbablySafeCard": PlayProbablySafeCard,
    "DiscardProbablyUselessCard": DiscardProbablyUselessCard,
}

_VARIABLES: dict[str, tuple[Callable, bool]] = {
    # accessor, is_boolean
    "lives": (lambda obs: obs.life_tokens, False),
    "info": (lambda obs: obs.info_tokens, False),
    "infoTokens": (lambda obs: obs.info_tokens, False),
    "deckHasCards": (lambda obs: obs.deck_size > 0, True),
    "deckHasCardsLeft": (lambda obs: obs.deck_size > 0, True),
}

_COMPARATORS = {
    ">": operator.gt, "<": operator.lt, ">=": operator.ge,
    "<=": operator.le, "==": operator.eq, "!=": operator.ne,
}

_TOKEN_RE = re.compile(
    r"(?:>=|<=|==|!=|[0-9]+(?:\.[0-9]+)?|[A-Za-z_][A-Za-z0-9_]*|[(){}!&|<>])")


def _lex(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise RuleSyntaxError(
                f"bad character {text[pos]!r} at offset {pos} in {text!r}")
        tokens.append((m.group(), pos))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _lex(text)
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def next(self) -> str:
        if self.pos >= len(self.tokens):
            raise RuleSyntaxError(f"unexpected end of input in {self.text!r}")
        tok = self.tokens[self.pos][0]
        self.pos += 1
        return tok

    def expect(self, want: str) -> None:
        tok = self.next()
        if tok != want:
            raise RuleSyntaxError(
                f"expected {want!r}, got {tok!r} in {self.text!r}")

    def span_from(self, start_index: int) -> str:
        start = self.tokens[start_index][1]
        if self.pos < len(self.tokens):
            end = self.tokens[self.pos][1]
        else:
            end = len(self.text)
        return self.text[start:end].strip()

    # -- rules ---------------------------------------------------------
    def parse_rule(self) -> Rule:
        name = self.next()
        if name == "If":
            return self._parse_if()
        if name in _SIMPLE_RULES:
            if self.peek() == "(":
                raise RuleSyntaxError(f"{name} takes no arguments")
            return _SIMPLE_RULES[name]()
        if name in _THRESHOLD_RULES:
            self.expect("(")
            threshold = self._parse_number()
            self.expect(")")
            return _THRESHOLD_RULES[name](threshold)
        if name == "TellMostInformation":
            new_only = True
            if self.peek() == "(":
                self.next()
                flag = self.next()
                if flag not in ("new", "all"):
                    raise RuleSyntaxError(
                        f"TellMostInformation takes 'new' or 'all', got {flag!r}")
                new_only = flag == "new"
                self.expect(")")
            return TellMostInformation(new_only)
        raise RuleSyntaxError(f"unknown rule {name!r} in {self.text!r}")

    def _parse_if(self) -> If:
        self.expect("(")
        condition = self._parse_expr()
        self.expect(")")
        self.expect("{")
        then_rule = self.parse_rule()
        self.expect("}")
        else_rule = None
        if self.peek() == "Else":
            self.next()
            self.expect("{")
            else_rule = self.parse_rule()
            self.expect("}")
        return If(condition, then_rule, else_rule)

    def _parse_number(self) -> float:
        tok = self.next()
        try:
            return float(tok)
        except ValueError:
            raise RuleSyntaxError(f"expected a number, got {tok!r}") from None

    # -- conditions ------------------------------------------------------
    def _parse_expr(self) -> Condition:
        start = self.pos
        terms = [self._parse_and()]
        while self.peek() == "|":
            self.next()
            terms.append(self._parse_and())
        if len(terms) == 1:
            return terms[0]
        fns = [t._fn for t in terms]
        return Condition(lambda obs: any(f(obs) for f in fns),
                         self.span_from(start))

    def _parse_and(self) -> Condition:
        start = self.pos
        terms = [self._parse_unary()]
        while self.peek() == "&":
            self.next()
            terms.append(self._parse_unary())
        if len(terms) == 1:
            return terms[0]
        fns = [t._fn for t in terms]
        return Condition(lambda obs: all(f(obs) for f in fns),
                         self.span_from(start))

    def _parse_unary(self) -> Condition:
        start = self.pos
        tok = self.peek()
        if tok == "!":
            self.next()
            inner = self._parse_unary()
            fn = inner._fn
            return Condition(lambda obs: not fn(obs), self.span_from(start))
        if tok == "(":
            self.next()
            inner = self._parse_expr()
            self.expect(")")
            return Condition(inner._fn, self.span_from(start))
        name = self.next()
        if name not in _VARIABLES:
            raise RuleSyntaxError(f"unknown variable {name!r} in {self.text!r}")
        accessor, is_boolean = _VARIABLES[name]
        if self.peek() in _COMPARATORS:
            op = _COMPARATORS[self.next()]
            value = self._parse_number()
            return Condition(lambda obs: op(accessor(obs), value),
                             self.span_from(start))
        if not is_boolean:
            raise RuleSyntaxError(
                f"{name} needs a comparison, e.g. {name}>1")
        return Condition(accessor, self.span_from(start))


def parse_rule(text: str) -> Rule:
    """Parse one rule expression; raises RuleSyntaxError on bad input."""
    parser = _Parser(text)
    rule = parser.parse_rule()
    if parser.peek() is not None:
        raise RuleSyntaxError(
            f"trailing input {parser.peek()!r} in {text!r}")
    return rule
