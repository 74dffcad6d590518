import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsgames import surgery
from nsgames.game import Question, make_chsh, make_extended_chsh, tabulate
from nsgames.surgery import (
    ParameterizedStrategy,
    SurgeryPreconditionError,
    check_v_compatible,
    fix_randomness,
    iterate_surgery,
    loss_probability,
    parameterize,
    random_instance,
)


def direct_losses(S, star):
    """Losses after pinning r_v to ``star``, computed from the original instance."""
    g = S.game
    out = {}
    eps = Fraction(0)
    for ru, wu in S.r_U:
        target = surgery._q_target(g, S.Q, S.v, S.U, tuple(S.u_answers(ru)))
        for ruv, wuv in S.r_Uv:
            if S.v_answer(ru, ruv, star) != target:
                eps += wu * wuv
    out[S.Q] = eps
    for q2, f in S.w_targets.items():
        tot = Fraction(0)
        for ru, wu in S.r_U:
            for ruv, wuv in S.r_Uv:
                ans = S.v_answer(ru, ruv, star)
                for rv, wv in S.r_v:
                    for rw, ww in S.r_W:
                        if ans != f(ru, ruv, rv, rw):
                            tot += wu * wuv * wv * ww
        out[q2] = tot
    return out


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fix_randomness_bounds(seed):
    S = random_instance(random.Random(seed))
    S2, rep = fix_randomness(S)
    eps = rep.loss_before[S.Q]
    assert rep.loss_after[S.Q] <= eps
    for q2 in S.affected_questions():
        assert rep.loss_after[q2] <= rep.loss_before[q2] + 2 * eps
        assert rep.compatible[q2]
    assert max(rep.loss_after.values()) <= 3 * max(rep.loss_before.values())
    assert rep.ok
    assert rep.loss_after == direct_losses(S, rep.r_v_star)
    # the chosen point is optimal for the anchor
    for rv, _ in S.r_v:
        assert direct_losses(S, rv)[S.Q] >= rep.loss_after[S.Q]
    # the new strategy no longer uses r_v for v
    assert len(S2.r_v) == 1


def test_anchor_loss_is_average_over_fixings():
    S = random_instance(random.Random(3))
    eps = loss_probability(S)
    avg = sum((w * direct_losses(S, rv)[S.Q] for rv, w in S.r_v), Fraction(0))
    assert eps == avg


def test_near_tight_family():
    for N in (2, 3, 5):
        S = surgery.near_tight_instance(N)
        _, rep = fix_randomness(S)
        Q, Qp = surgery._anchor_and_followup(S.game, 0)
        assert surgery.surgery_ratio(rep, Q, Qp) == 1 - Fraction(1, N)


def test_tightness_search_small():
    best, S, rep = surgery.tightness_search()
    assert best == Fraction(2, 3)
    assert best < 1


def test_preconditions():
    g = make_extended_chsh(1)
    Q, Qp = surgery._anchor_and_followup(g, 0)
    base = dict(
        r_U=((0, Fraction(1)),), r_Uv=((0, Fraction(1)),), r_v=((0, Fraction(1, 2)), (1, Fraction(1, 2))),
        r_W=((0, Fraction(1)),), u_answers=lambda ru: (0,), v_answer=lambda ru, ruv, rv: rv,
    )
    ok = ParameterizedStrategy(g, 0, Q, (2,), (1,), ("R",), frozenset({0, 1}), **base,
                               w_targets={Qp: lambda *r: 0})
    fix_randomness(ok)
    leaky = ParameterizedStrategy(g, 0, Q, (2,), (1,), ("R",), frozenset({0, 2}), **base)
    with pytest.raises(SurgeryPreconditionError):
        fix_randomness(leaky)
    other_input = next(i for i, q in enumerate(g.questions) if q.inputs[0] == 1)
    wrong = ParameterizedStrategy(g, 0, Q, (2,), (1,), ("R",), frozenset({0, 1}), **base,
                                  w_targets={other_input: lambda *r: 0})
    with pytest.raises(SurgeryPreconditionError):
        fix_randomness(wrong)


def test_non_unique_game_rejected():
    g = tabulate("or", ("A", "B"), ((0,), (0,)), ((0, 1), (0, 1)),
                 [Question((0, 0), Fraction(1), "consistency")], lambda q, x: x[0] or x[1])
    S = ParameterizedStrategy(g, 0, 0, (1,), (), ("R",), frozenset({0}),
                              ((0, Fraction(1)),), ((0, Fraction(1)),), ((0, Fraction(1)),), ((0, Fraction(1)),),
                              lambda ru: (0,), lambda ru, ruv, rv: 1)
    with pytest.raises(SurgeryPreconditionError):
        fix_randomness(S)


def test_v_compatibility():
    g = make_extended_chsh(1)
    Q, Qp = surgery._anchor_and_followup(g, 0)
    assert check_v_compatible(g, Q, Qp, 0)
    other = next(i for i, q in enumerate(g.questions) if q.inputs[0] == 1)
    assert check_v_compatible(g, Q, other, "Alice")
    # CHSH: Alice keeps input 0 while Bob's relevant input changes
    c = make_chsh()
    q00 = next(i for i, q in enumerate(c.questions) if q.inputs == (0, 0))
    q01 = next(i for i, q in enumerate(c.questions) if q.inputs == (0, 1))
    assert not check_v_compatible(c, q00, q01, 0)


def test_parameterize_agrees_with_source_losses():
    S, schedule = surgery.toy_extended_chsh_strategy(2, seed=4)
    v, R, Q = schedule[0]
    P = parameterize(S, v, R, Q)
    losses = S.losses()
    assert loss_probability(P, Q) == losses[Q]
    for q2 in P.affected_questions():
        assert loss_probability(P, q2) == losses[q2]


@pytest.mark.parametrize("k", [1, 2, 3])
def test_iteration_coefficients(k):
    S, schedule = surgery.toy_extended_chsh_strategy(k, seed=k)
    res = iterate_surgery(S, schedule)
    anchors = [step[2] for step in schedule]
    coeffs = surgery.schedule_coefficients(k)
    for q in S.game.questions_with_tag("game"):
        if S.game.questions[q].inputs[0] == 0:
            assert [res.bounds[q].get(a, 0) for a in anchors] == coeffs
            assert res.bounds[q][q] == 1
    assert res.bounds_hold
    assert all(r.ok for r in res.reports)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_iteration_bounds_hold_for_random_toys(seed):
    S, schedule = surgery.toy_extended_chsh_strategy(2, seed=seed)
    res = iterate_surgery(S, schedule)
    assert res.bounds_hold


def test_schedule_coefficients():
    assert surgery.schedule_coefficients(1) == [2]
    assert surgery.schedule_coefficients(2) == [6, 2]
    assert surgery.schedule_coefficients(3) == [18, 6, 2]


def test_serialization_round_trips():
    S, schedule = surgery.toy_extended_chsh_strategy(2, seed=9)
    d = json.loads(json.dumps(surgery.source_strategy_to_dict(S)))
    S2 = surgery.source_strategy_from_dict(S.game, d)
    assert S2.losses() == S.losses()
    P = surgery.near_tight_instance(3)
    d = json.loads(json.dumps(surgery.parameterized_to_dict(P)))
    P2 = surgery.parameterized_from_dict(P.game, d)
    assert fix_randomness(P2)[1].loss_after == fix_randomness(P)[1].loss_after


def test_unknown_source_rejected():
    S, schedule = surgery.toy_extended_chsh_strategy(1)
    with pytest.raises(ValueError):
        parameterize(S, 0, ("nope",), schedule[0][2])


def test_chsh_has_no_consistency_questions():
    assert make_chsh().questions_with_tag("consistency") == []
