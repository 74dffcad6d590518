import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nsgames import bounds
from nsgames.game import chsh_n_plus_k_probs

from test_acceptance import REFERENCE_GAPS


def test_closed_forms_small_k():
    assert bounds.ns_bound_chsh_plus_k(0) == Fraction(3, 4)
    assert bounds.ns_bound_chsh_plus_k(1) == Fraction(7, 8)
    assert abs(bounds.quantum_lb_chsh_plus_k(0) - math.cos(math.pi / 8) ** 2) <= 1e-15
    assert bounds.ns_bound_chshn(3, 1) == 1 - Fraction(1, 14)


def test_table_matches_reference():
    for row, (k, g1, n, g2) in zip(bounds.gap_table(), REFERENCE_GAPS):
        assert row.k == k
        assert bounds.sci(row.chsh_gap) == bounds.sci(g1)
        assert row.best_n == n
        assert bounds.sci(row.chshn_gap) == bounds.sci(g2)


def test_best_n_is_scan_argmax():
    # loop oracle for the vectorized scan
    for k in range(1, 8):
        gaps = {n: bounds.chshn_gap(n, k) for n in range(2, bounds.default_n_max(k) + 1)}
        best = max(gaps, key=lambda n: (gaps[n], -n))
        n, g = bounds.best_n(k)
        assert n == best
        assert abs(g - gaps[best]) <= 1e-15


def test_best_n_interior():
    # the optimum is not at the edge of the default scan range
    for k in range(1, 13):
        n, _ = bounds.best_n(k)
        assert n < bounds.default_n_max(k)


@given(st.integers(1, 12), st.integers(1, 200), st.integers(1, 200))
def test_markov_identity(k, num, den):
    p = Fraction(min(num, den), max(num, den))
    assert bounds.verify_markov_identity(k, p)


def test_markov_q_matches_game_weights():
    for n, k in ((3, 1), (5, 3), (8, 4)):
        p, q = chsh_n_plus_k_probs(n, k)
        assert bounds.markov_q(k, p) == q
        assert 1 - q == Fraction(2 * n - 1, 2 * n + 3**k - 2)


def test_gaps_positive_and_decreasing():
    rows = bounds.gap_table()
    assert all(r.chsh_gap > 0 and r.chshn_gap > 0 for r in rows)
    assert all(a.chsh_gap > b.chsh_gap for a, b in zip(rows, rows[1:]))
    # CHSH_n wins for k >= 2
    assert all(r.chshn_gap > r.chsh_gap for r in rows[1:])


def test_errors():
    with pytest.raises(ValueError):
        bounds.ns_bound_chsh_plus_k(-1)
    with pytest.raises(ValueError):
        bounds.ns_bound_chshn(1, 1)
    with pytest.raises(ValueError):
        bounds.best_n(1, 1)
    with pytest.raises(ValueError):
        bounds.verify_markov_identity(1, 0)


def test_csv_and_markdown():
    rows = bounds.gap_table(range(1, 4))
    csv_text = bounds.table_csv(rows)
    assert csv_text.splitlines()[0] == "k,chsh_gap,best_n,chshn_gap"
    assert csv_text.splitlines()[1] == "1,5.178e-02,3,4.272e-02"
    md = bounds.table_markdown(rows).splitlines()
    assert md[0].startswith("| k |")
    assert len({len(line) for line in md}) == 1
