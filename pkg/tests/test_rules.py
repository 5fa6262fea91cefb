"""Rule firing semantics, legality fuzz, and the expression parser."""

import random

import pytest

from hanabi_bench.cards import card, full_deck
from hanabi_bench.engine import (
    Discard,
    GameState,
    Play,
    Tell,
    new_game,
    tell_rank,
    tell_suit,
)
from hanabi_bench.knowledge import CardKnowledge, playability_probability
from hanabi_bench.rules import (
    Condition,
    DiscardOldestFirst,
    DiscardProbablyUselessCard,
    DiscardRandomly,
    If,
    OsawaDiscard,
    PlayIfCertain,
    PlayProbablySafeCard,
    PlaySafeCard,
    RuleSyntaxError,
    TellAnyoneAboutUsefulCard,
    TellAnyoneAboutUselessCard,
    TellDispensable,
    TellMostInformation,
    TellPlayableCard,
    TellPlayableCardOuter,
    TellRandomly,
    TellUnknown,
    parse_rule,
)

W, Y, G, B, R = range(5)


def fresh_know(shape):
    return [[CardKnowledge() for _ in range(n)] for n in shape]


def build(hands, stacks=(0, 0, 0, 0, 0), discard_pile=(), info_tokens=8,
          life_tokens=3, knowledge=None):
    deck = full_deck()
    for h in hands:
        for c in h:
            deck.remove(c)
    for c in discard_pile:
        deck.remove(c)
    for s, top in enumerate(stacks):
        for r in range(1, top + 1):
            deck.remove(card(s, r))
    return GameState.from_components(
        hands=[list(h) for h in hands], deck=deck, stacks=list(stacks),
        discard_pile=list(discard_pile), info_tokens=info_tokens,
        life_tokens=life_tokens, knowledge=knowledge)


RNG = random.Random(0)


# ----------------------------------------------------------------------
# Probability-threshold play rules on a fixed state
# ----------------------------------------------------------------------
def _threshold_fixture():
    """Viewer slots with playability probabilities 0.5, 3/8, 0.0.

    slot 0: rank 2, suit in {W, Y}; white stack at 1, yellow empty, and
            both W2/Y2 pairs unseen, so p = 2/4.
    slot 1: suit R, ranks {1,2,4,5} after a negative rank-3 tell; both
            R3s sit in the partner's hand, so p = 3/8 over 8 copies.
    slot 2: rank 5; no stack is at 4, so p = 0.
    """
    hands = [[card(W, 2), card(R, 1), card(B, 5)],
             [card(R, 3), card(R, 3), card(G, 1)]]
    know = fresh_know((3, 3))
    know[0][0].apply_rank(2, indicated=True)
    know[0][0].apply_suit(G, indicated=False)
    know[0][0].apply_suit(B, indicated=False)
    know[0][0].apply_suit(R, indicated=False)
    know[0][1].apply_suit(R, indicated=True)
    know[0][1].apply_rank(3, indicated=False)
    know[0][2].apply_rank(5, indicated=True)
    st = build(hands, stacks=(1, 0, 0, 0, 0), knowledge=know)
    return st.observe(0)


def test_threshold_fixture_probabilities():
    obs = _threshold_fixture()
    assert playability_probability(obs, 0) == pytest.approx(0.5)
    assert playability_probability(obs, 1) == pytest.approx(3 / 8)
    assert playability_probability(obs, 2) == 0.0


def test_play_probably_safe_thresholds():
    obs = _threshold_fixture()
    assert PlayProbablySafeCard(0.6).try_fire(obs, RNG) is None
    assert PlayProbablySafeCard(0.25).try_fire(obs, RNG) == Play(0)
    assert PlayProbablySafeCard(0.5).try_fire(obs, RNG) == Play(0)
    assert PlayProbablySafeCard(0.0).try_fire(obs, RNG) == Play(0)
    # Nothing is certain here for the set-reasoning rules.
    assert PlaySafeCard().try_fire(obs, RNG) is None
    assert PlayIfCertain().try_fire(obs, RNG) is None


def test_threshold_bounds_checked():
    with pytest.raises(ValueError):
        PlayProbablySafeCard(1.5)
    with pytest.raises(ValueError):
        DiscardProbablyUselessCard(-0.1)


def test_play_safe_and_certain():
    hands = [[card(R, 1), card(W, 3)], [card(G, 2), card(B, 2)]]
    know = fresh_know((2, 2))
    know[0][0].apply_rank(1, indicated=True)
    st = build(hands, knowledge=know)
    obs = st.observe(0)
    # Rank 1 on empty stacks: safe by sets, but identity is unknown.
    assert PlaySafeCard().try_fire(obs, RNG) == Play(0)
    assert PlayIfCertain().try_fire(obs, RNG) is None
    know[0][0].apply_suit(R, indicated=True)
    obs = st.observe(0)
    assert PlayIfCertain().try_fire(obs, RNG) == Play(0)


def test_play_if_certain_needs_playability():
    hands = [[card(R, 4)], [card(G, 2)]]
    know = fresh_know((1, 1))
    know[0][0].apply_suit(R, indicated=True)
    know[0][0].apply_rank(4, indicated=True)
    st = build(hands, knowledge=know)
    assert PlayIfCertain().try_fire(st.observe(0), RNG) is None


# ----------------------------------------------------------------------
# Discard rules
# ----------------------------------------------------------------------
def _useless_slot_state(info_tokens):
    hands = [[card(W, 1), card(G, 3)], [card(Y, 2), card(B, 4)]]
    know = fresh_know((2, 2))
    know[0][0].apply_rank(1, indicated=True)
    know[0][0].apply_suit(W, indicated=True)
    return build(hands, stacks=(1, 0, 0, 0, 0), info_tokens=info_tokens,
                 knowledge=know)


def test_osawa_discard_fires_on_provably_useless():
    st = _useless_slot_state(info_tokens=5)
    assert OsawaDiscard().try_fire(st.observe(0), RNG) == Discard(0)


def test_osawa_discard_abstains_at_token_cap():
    st = _useless_slot_state(info_tokens=8)
    assert OsawaDiscard().try_fire(st.observe(0), RNG) is None


def test_discard_oldest_first_uses_age():
    st = new_game(2, seed=12)
    st.info_tokens = 5
    st.knowledge[0][1].drawn_turn = -3  # pretend slot 1 is oldest
    assert DiscardOldestFirst().try_fire(st.observe(0), RNG) == Discard(1)
    st.knowledge[0][1].drawn_turn = 0
    # All equal ages: lowest slot wins.
    assert DiscardOldestFirst().try_fire(st.observe(0), RNG) == Discard(0)


def test_discard_probably_useless_argmax():
    st = _useless_slot_state(info_tokens=5)
    obs = st.observe(0)
    assert DiscardProbablyUselessCard(1.0).try_fire(obs, RNG) == Discard(0)
    assert DiscardProbablyUselessCard(0.0).try_fire(obs, RNG) == Discard(0)
    st8 = _useless_slot_state(info_tokens=8)
    assert DiscardProbablyUselessCard(0.0).try_fire(st8.observe(0), RNG) is None


def test_discard_randomly_legality():
    st = new_game(2, seed=1)
    assert DiscardRandomly().try_fire(st.observe(0), RNG) is None  # 8 tokens
    st.info_tokens = 7
    a = DiscardRandomly().try_fire(st.observe(0), RNG)
    assert isinstance(a, Discard) and 0 <= a.slot < 5


# ----------------------------------------------------------------------
# Tell rules
# ----------------------------------------------------------------------
def test_tell_playable_card_random_fact():
    hands = [[card(B, 3), card(B, 4)], [card(W, 1), card(G, 4)]]
    st = build(hands)
    seen = set()
    for _ in range(60):
        a = TellPlayableCard().try_fire(st.observe(0), RNG)
        seen.add(a)
    # Only the playable W1 generates facts: its suit or its rank.
    assert seen == {tell_suit(1, W), tell_rank(1, 1)}


def test_tell_playable_card_abstains_without_playables():
    hands = [[card(B, 3)], [card(W, 4), card(G, 3)]]
    st = build(hands)
    assert TellPlayableCard().try_fire(st.observe(0), RNG) is None
    st.info_tokens = 0
    assert TellRandomly().try_fire(st.observe(0), RNG) is None


def test_tell_playable_outer_skips_known_facts():
    hands = [[card(B, 3)], [card(W, 1), card(G, 4)]]
    know = fresh_know((1, 2))
    know[1][0].apply_suit(W, indicated=True)
    st = build(hands, knowledge=know)
    obs = st.observe(0)
    # Suit already known: only the rank fact remains.
    for _ in range(20):
        assert TellPlayableCardOuter().try_fire(obs, RNG) == tell_rank(1, 1)
    know[1][0].apply_rank(1, indicated=True)
    obs = st.observe(0)
    assert TellPlayableCardOuter().try_fire(obs, RNG) is None
    # The plain variant happily repeats known facts.
    assert TellPlayableCard().try_fire(obs, RNG) in (
        tell_suit(1, W), tell_rank(1, 1))


def test_tell_unknown_only_new_facts():
    hands = [[card(B, 3)], [card(W, 1), card(W, 4)]]
    know = fresh_know((1, 2))
    know[1][0].apply_suit(W, indicated=True)
    know[1][1].apply_suit(W, indicated=True)
    know[1][0].apply_rank(1, indicated=True)
    st = build(hands, knowledge=know)
    # Suit W and rank 1 are fully known; only rank 4 is news.
    for _ in range(20):
        assert TellUnknown().try_fire(st.observe(0), RNG) == tell_rank(1, 4)
    know[1][1].apply_rank(4, indicated=True)
    assert TellUnknown().try_fire(st.observe(0), RNG) is None


def test_tell_anyone_useful_scans_turn_order():
    # Player 1 holds nothing playable; player 2 does.
    hands = [[card(B, 3)], [card(W, 4)], [card(G, 1), card(Y, 1)]]
    st = build(hands)
    a = TellAnyoneAboutUsefulCard().try_fire(st.observe(0), RNG)
    assert a == tell_suit(2, G)  # first playable slot, suit first


def test_tell_anyone_useful_prefers_missing_dimension():
    hands = [[card(B, 3)], [card(W, 1)]]
    know = fresh_know((1, 1))
    know[1][0].apply_suit(W, indicated=True)
    st = build(hands, knowledge=know)
    assert TellAnyoneAboutUsefulCard().try_fire(st.observe(0), RNG) \
        == tell_rank(1, 1)
    know[1][0].apply_rank(1, indicated=True)
    assert TellAnyoneAboutUsefulCard().try_fire(st.observe(0), RNG) is None


def test_tell_anyone_useless():
    hands = [[card(B, 3)], [card(W, 1), card(G, 2)]]
    st = build(hands, stacks=(1, 0, 0, 0, 0))
    # W1 can never score once the white stack passed it.
    assert TellAnyoneAboutUselessCard().try_fire(st.observe(0), RNG) \
        == tell_suit(1, W)
    st2 = build(hands)
    assert TellAnyoneAboutUselessCard().try_fire(st2.observe(0), RNG) is None


def test_tell_most_information_counts_and_ties():
    hands = [[card(B, 3)], [card(W, 1), card(W, 2), card(Y, 1)]]
    st = build(hands)
    obs = st.observe(0)
    # suit W and rank 1 both touch two cards; suits come first.
    assert TellMostInformation(True).try_fire(obs, RNG) == tell_suit(1, W)
    assert TellMostInformation(False).try_fire(obs, RNG) == tell_suit(1, W)
    # Once suit W is known everywhere, only rank 1 still scores 2.
    st.apply(tell_suit(1, W))
    st.current_player = 0
    obs = st.observe(0)
    assert TellMostInformation(True).try_fire(obs, RNG) == tell_rank(1, 1)
    assert TellMostInformation(False).try_fire(obs, RNG) == tell_suit(1, W)


def test_tell_most_information_abstains_without_news():
    hands = [[card(B, 3)], [card(W, 1)]]
    know = fresh_know((1, 1))
    know[1][0].apply_suit(W, indicated=True)
    know[1][0].apply_rank(1, indicated=True)
    st = build(hands, knowledge=know)
    obs = st.observe(0)
    assert TellMostInformation(True).try_fire(obs, RNG) is None
    assert TellMostInformation(False).try_fire(obs, RNG) == tell_suit(1, W)


def test_tell_dispensable_completes_a_proof():
    # Partner's W1 has a known suit; the white stack is past rank 1, so
    # telling rank 1 lets them prove the card useless.
    hands = [[card(B, 3)], [card(W, 1), card(W, 4)]]
    know = fresh_know((1, 2))
    know[1][0].apply_suit(W, indicated=True)
    know[1][1].apply_suit(W, indicated=True)
    st = build(hands, stacks=(2, 0, 0, 0, 0), knowledge=know)
    assert TellDispensable().try_fire(st.observe(0), RNG) == tell_rank(1, 1)


def test_tell_dispensable_abstains_when_no_single_tell_works():
    hands = [[card(B, 3)], [card(W, 1), card(G, 4)]]
    st = build(hands, stacks=(2, 0, 0, 0, 0))
    # W1 is useless in truth, but no single tell proves it to the holder.
    assert TellDispensable().try_fire(st.observe(0), RNG) is None


def test_tells_need_an_information_token():
    hands = [[card(B, 3)], [card(W, 1)]]
    st = build(hands, info_tokens=0)
    obs = st.observe(0)
    for rule in (TellPlayableCard(), TellPlayableCardOuter(), TellRandomly(),
                 TellUnknown(), TellAnyoneAboutUsefulCard(),
                 TellAnyoneAboutUselessCard(), TellMostInformation(),
                 TellDispensable()):
        assert rule.try_fire(obs, RNG) is None


# ----------------------------------------------------------------------
# If rule and conditions
# ----------------------------------------------------------------------
def test_if_rule_branches():
    st = new_game(2, seed=3)
    st.info_tokens = 5
    obs = st.observe(0)
    cond = Condition(lambda o: o.life_tokens > 1, "lives>1")
    rule = If(cond, DiscardOldestFirst())
    assert rule.try_fire(obs, RNG) == Discard(0)
    st.life_tokens = 1
    obs = st.observe(0)
    assert rule.try_fire(obs, RNG) is None
    both = If(cond, DiscardOldestFirst(), PlayProbablySafeCard(0.0))
    assert isinstance(both.try_fire(obs, RNG), Play)


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------
def test_parse_simple_rules_roundtrip():
    for text in ("PlaySafeCard", "PlayIfCertain", "OsawaDiscard",
                 "DiscardOldestFirst", "DiscardRandomly", "TellPlayableCard",
                 "TellPlayableCardOuter", "TellRandomly", "TellUnknown",
                 "TellDispensable", "TellAnyoneAboutUsefulCard",
                 "TellAnyoneAboutUselessCard", "PlayProbablySafeCard(0.6)",
                 "DiscardProbablyUselessCard(1)", "TellMostInformation(new)",
                 "TellMostInformation(all)"):
        rule = parse_rule(text)
        again = parse_rule(str(rule))
        assert type(again) is type(rule)


def test_parse_if_expressions():
    rule = parse_rule("If(lives>1 & !deckHasCards){PlayProbablySafeCard(0.0)}")
    assert isinstance(rule, If)
    assert isinstance(rule.then_rule, PlayProbablySafeCard)
    assert rule.else_rule is None
    st = new_game(2, seed=9)
    obs = st.observe(0)
    assert not rule.condition(obs)  # deck still has cards
    st.deck.clear()
    obs = st.observe(0)
    assert rule.condition(obs)
    st.life_tokens = 1
    obs = st.observe(0)
    assert not rule.condition(obs)


def test_parse_if_else():
    rule = parse_rule("If(lives>1){PlayProbablySafeCard(0.6)}Else{PlaySafeCard}")
    assert isinstance(rule.then_rule, PlayProbablySafeCard)
    assert isinstance(rule.else_rule, PlaySafeCard)
    assert parse_rule(str(rule)).then_rule.threshold == 0.6


def test_parse_condition_operators():
    st = new_game(3, seed=5)
    obs = st.observe(0)  # lives 3, info 8, deck non-empty
    cases = [
        ("If(info<4){DiscardRandomly}", False),
        ("If(info>=8){DiscardRandomly}", True),
        ("If(info==8 & lives==3){DiscardRandomly}", True),
        ("If(lives!=3){DiscardRandomly}", False),
        ("If(lives<2 | deckHasCards){DiscardRandomly}", True),
        ("If(!(lives<2) & !(info<8)){DiscardRandomly}", True),
        ("If(deckHasCardsLeft & infoTokens>0){DiscardRandomly}", True),
    ]
    for text, expect in cases:
        assert parse_rule(text).condition(obs) is expect, text


def test_parse_rejects_garbage():
    for bad in ("", "Flip", "PlaySafeCard(0.5)", "PlayProbablySafeCard",
                "PlayProbablySafeCard()", "If(lives>1)", "If(lives){X}",
                "If(lives>1){PlaySafeCard} junk", "TellMostInformation(maybe)",
                "If(bogus>1){PlaySafeCard}", "PlaySafeCard extra",
                "If(lives>1){PlaySafeCard}Else", "PlayProbablySafeCard(2.0)"):
        with pytest.raises((RuleSyntaxError, ValueError)):
            parse_rule(bad)


# ----------------------------------------------------------------------
# Cross-cutting properties
# ----------------------------------------------------------------------
ALL_RULES = [
    PlayIfCertain(), PlaySafeCard(), PlayProbablySafeCard(0.0),
    PlayProbablySafeCard(0.25), PlayProbablySafeCard(0.6),
    PlayProbablySafeCard(1.0), OsawaDiscard(), DiscardOldestFirst(),
    DiscardRandomly(), DiscardProbablyUselessCard(0.0),
    DiscardProbablyUselessCard(1.0), TellPlayableCard(),
    TellPlayableCardOuter(), TellRandomly(), TellUnknown(),
    TellMostInformation(True), TellMostInformation(False), TellDispensable(),
    TellAnyoneAboutUsefulCard(), TellAnyoneAboutUselessCard(),
    If(Condition(lambda o: o.life_tokens > 1, "lives>1"),
       PlayProbablySafeCard(0.0), PlaySafeCard()),
]


def test_fired_actions_are_always_legal():
    rng = random.Random(42)
    rule_rng = random.Random(43)
    for seed in range(25):
        st = new_game(rng.choice((2, 3, 4, 5)), seed)
        while not st.is_terminal():
            obs = st.observe(st.current_player)
            legal = set(st.legal_actions())
            for rule in ALL_RULES:
                action = rule.try_fire(obs, rule_rng)
                if action is not None:
                    assert action in legal, (rule, action)
            st.apply(rng.choice(st.legal_actions()))


def test_threshold_monotonicity():
    rng = random.Random(7)
    for seed in range(15):
        st = new_game(2, seed + 300)
        while not st.is_terminal():
            obs = st.observe(st.current_player)
            low = PlayProbablySafeCard(0.2).try_fire(obs, RNG)
            high = PlayProbablySafeCard(0.8).try_fire(obs, RNG)
            if high is not None:
                assert low == high  # same argmax slot, lower bar
            st.apply(rng.choice(st.legal_actions()))


def test_safe_play_implies_probability_one():
    rng = random.Random(8)
    for seed in range(15):
        st = new_game(3, seed + 600)
        while not st.is_terminal():
            obs = st.observe(st.current_player)
            fired = PlaySafeCard().try_fire(obs, RNG)
            if fired is not None:
                assert playability_probability(obs, fired.slot) == 1.0
                assert PlayProbablySafeCard(1.0).try_fire(obs, RNG) is not None
            st.apply(rng.choice(st.legal_actions()))


def test_outer_tell_strictly_shrinks_target_knowledge():
    rng = random.Random(9)
    checked = 0
    for seed in range(20):
        st = new_game(2, seed + 900)
        while not st.is_terminal():
            obs = st.observe(st.current_player)
            t = TellPlayableCardOuter().try_fire(obs, rng)
            if t is not None:
                target = t.target
                before = [(k.suit_mask, k.rank_mask)
                          for k in st.knowledge[target]]
                probe = st.copy()
                if probe.current_player != st.current_player:
                    break
                probe.apply(t)
                after = [(k.suit_mask, k.rank_mask)
                         for k in probe.knowledge[target]]
                assert any(b != a for b, a in zip(before, after))
                checked += 1
            st.apply(rng.choice(st.legal_actions()))
    assert checked > 20


def test_rules_deterministic_given_rng_state():
    st = new_game(4, seed=77)
    obs = st.observe(0)
    for rule in ALL_RULES:
        a1 = rule.try_fire(obs, random.Random(5))
        a2 = rule.try_fire(obs, random.Random(5))
        assert a1 == a2
