import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsgames.game import (
    NOT_ASKED,
    Game,
    Question,
    builtin_game,
    check_uniqueness,
    dumps_game,
    load_game,
    loads_game,
    make_chsh,
    make_chsh_n,
    make_distributed_chsh,
    make_exor_game,
    make_extended_chsh,
    make_extended_chsh_n,
    make_ghz_game,
    make_teleported_chsh,
    save_game,
    tabulate,
    unique_accepting_answer,
    validate_game,
)

ALL_GAMES = [
    make_chsh(),
    make_chsh_n(3),
    make_chsh_n(5),
    make_extended_chsh(1),
    make_extended_chsh(2),
    make_extended_chsh_n(3, 1),
    make_extended_chsh_n(4, 2),
    make_teleported_chsh(),
    make_teleported_chsh(postselected=True),
    make_ghz_game(),
    make_distributed_chsh(2),
]


@pytest.mark.parametrize("g", ALL_GAMES, ids=lambda g: g.name)
def test_builtin_games_are_valid(g):
    rep = validate_game(g)
    assert rep.valid, rep.violations
    assert sum(q.prob for q in g.questions) == 1


@pytest.mark.parametrize("g", ALL_GAMES, ids=lambda g: g.name)
def test_serialization_round_trip(g, tmp_path):
    assert loads_game(dumps_game(g)) == g
    path = tmp_path / "g.json"
    save_game(g, path)
    assert load_game(path) == g
    assert dumps_game(loads_game(dumps_game(g))) == dumps_game(g)


def test_chsh_table():
    g = make_chsh()
    assert len(g.questions) == 4
    for qi, q in enumerate(g.questions):
        a, b = q.inputs
        for x, y in itertools.product((0, 1), repeat=2):
            assert g.accepts(qi, (x, y)) == ((x ^ y) == a * b)


def test_chsh_n_questions_are_adjacent_pairs():
    g = make_chsh_n(4)
    pairs = {q.inputs for q in g.questions}
    assert pairs == {(a, b) for a in range(4) for b in (a, (a + 1) % 4)}
    assert all(q.prob == Fraction(1, 8) for q in g.questions)


def test_extended_chsh_weights():
    for k in (1, 2, 3):
        g = make_extended_chsh(k)
        cons = g.questions_with_tag("consistency")
        assert len(cons) == k
        assert sum(g.questions[i].prob for i in cons) == 1 - Fraction(2, 3**k + 1)
        # Alice cannot tell consistency questions from A=0 game questions
        assert all(g.questions[i].inputs[0] == 0 for i in cons)


def test_extended_chsh_ignores_unasked_players():
    g = make_extended_chsh(2)
    for qi, q in enumerate(g.questions):
        for i, a in enumerate(q.inputs):
            if a is NOT_ASKED:
                assert not g.depends_on(qi, i)


def test_extended_chsh_n_consistency_balance():
    # Markov-chain balance: 1/(1-q) = 1 + (3^k - 1) p
    for n, k in ((3, 1), (4, 2), (5, 3)):
        g = make_extended_chsh_n(n, k)
        p, q = g.metadata["p"], g.metadata["q"]
        assert 1 / (1 - q) == 1 + (3**k - 1) * p
        assert validate_game(g).valid


def test_ghz_game_unique():
    assert check_uniqueness(make_ghz_game()).unique


@pytest.mark.parametrize("g", [make_chsh(), make_chsh_n(3), make_extended_chsh(2), make_ghz_game()],
                         ids=lambda g: g.name)
def test_xor_style_games_are_unique(g):
    assert check_uniqueness(g).unique


def test_non_unique_game_detected():
    g = tabulate("always", ("A", "B"), ((0,), (0,)), ((0, 1), (0, 1)),
                 [Question((0, 0), Fraction(1))], lambda q, ans: True)
    rep = check_uniqueness(g)
    # the predicate ignores both players, so nobody is involved
    assert rep.unique
    g2 = tabulate("or", ("A", "B"), ((0,), (0,)), ((0, 1), (0, 1)),
                  [Question((0, 0), Fraction(1))], lambda q, ans: ans[0] or ans[1])
    rep2 = check_uniqueness(g2)
    assert not rep2.unique
    assert rep2.counterexamples[0]["accepting_replies"] in (0, 2)


def test_unique_accepting_answer():
    g = make_chsh()
    qi = next(i for i, q in enumerate(g.questions) if q.inputs == (1, 1))
    assert unique_accepting_answer(g, qi, 1, (0, None)) == 1
    assert unique_accepting_answer(g, qi, 0, (None, 1)) == 0


def test_validation_catches_errors():
    g = make_chsh()
    bad = Game(g.name, g.players, g.input_alphabet, g.output_alphabet,
               g.questions[:3], g.accept[:3])
    assert any("normalized" in v for v in validate_game(bad).violations)
    q = Question((0, 7), Fraction(1, 4))
    bad2 = Game(g.name, g.players, g.input_alphabet, g.output_alphabet,
                (q,) + g.questions[1:], g.accept)
    assert any("not in alphabet" in v for v in validate_game(bad2).violations)


def test_validation_catches_predicate_reading_unasked_player():
    g = tabulate("leak", ("A", "B"), ((0,), (0, NOT_ASKED)), ((0, 1), (0, 1)),
                 [Question((0, NOT_ASKED), Fraction(1))], lambda q, ans: ans[0] == ans[1])
    assert any("unasked" in v for v in validate_game(g).violations)


def test_teleported_predicate_accounts_for_corrections():
    g = make_teleported_chsh()
    # with no correction it is CHSH
    for qi, q in enumerate(g.questions):
        a, b, _ = q.inputs
        for x, y in itertools.product((0, 1), repeat=2):
            assert g.accepts(qi, (x, y, (0, 0))) == ((x ^ y) == a * b)


def test_exor_game_matches_ghz():
    ghz = make_ghz_game()
    g = make_exor_game("ghz2", ghz.players, [(q.inputs, q.prob) for q in ghz.questions],
                       lambda ins: int(all(ins)))
    assert g.accept == ghz.accept


def test_builtin_registry():
    assert builtin_game("chsh_n", n=4) == make_chsh_n(4)
    assert builtin_game("chsh_plus_k", k=2) == make_extended_chsh(2)
    with pytest.raises(ValueError):
        builtin_game("nope")
    with pytest.raises(ValueError):
        make_chsh_n(1)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6))
def test_chsh_n_round_trip_property(n):
    g = make_chsh_n(n)
    assert loads_game(dumps_game(g)) == g
    assert validate_game(g).valid


def test_distributed_chsh_shape():
    g = make_distributed_chsh(3)
    assert g.num_players == 5
    assert len(g.questions) == 2 * 8 * 3
    assert validate_game(g).valid
