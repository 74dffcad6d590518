"""End-to-end acceptance checks, one test per criterion.

Each test records its criterion number; conftest prints a PASS/FAIL line per
criterion at the end of the run.  ``python3 tests/test_acceptance.py`` prints
the same lines without pytest.
"""

import math
import random
import time
from fractions import Fraction

import pytest

from nsgames import bounds, boxes, classical, nonsignaling, quantum, surgery
from nsgames.game import (
    make_chsh,
    make_chsh_n,
    make_distributed_chsh,
    make_extended_chsh,
    make_extended_chsh_n,
    make_ghz_game,
)
from nsgames.nonsignaling import ConditionalTable, check_nonsignaling, output_constraint

COS2_PI_8 = math.cos(math.pi / 8) ** 2

# (k, CHSH gap, best n, CHSH_n gap) reference values, four significant figures
REFERENCE_GAPS = [
    (1, 5.178e-2, 3, 4.272e-2),
    (2, 2.071e-2, 4, 2.318e-2),
    (3, 7.397e-3, 5, 1.079e-2),
    (4, 2.526e-3, 8, 4.454e-3),
    (5, 8.488e-4, 13, 1.695e-3),
    (6, 2.837e-4, 22, 6.122e-4),
    (7, 9.466e-5, 38, 2.140e-4),
    (8, 3.156e-5, 65, 7.333e-5),
    (9, 1.052e-5, 111, 2.484e-5),
    (10, 3.507e-6, 192, 8.359e-6),
    (11, 1.169e-6, 332, 2.802e-6),
    (12, 3.897e-7, 574, 9.368e-7),
]


@pytest.fixture
def criterion(record_property):
    def mark(num, title):
        record_property("criterion", num)
        record_property("title", title)
        return lambda detail: record_property("detail", detail)
    return mark


def _sig4(x: float) -> str:
    return f"{x:.3e}"


def test_criterion_1_chsh_values(criterion):
    detail = criterion(1, "CHSH classical/NS/quantum values")
    t0 = time.perf_counter()
    g = make_chsh()
    c, _ = classical.deterministic_value(g)
    ns, table = nonsignaling.ns_value(g)
    q = quantum.evaluate_quantum(g, quantum.canonical_strategy(g)).overall
    elapsed = time.perf_counter() - t0
    detail(f"classical={c} ns={ns} quantum={q:.15f} time={elapsed:.3f}s")
    assert c == Fraction(3, 4)
    assert ns == 1
    assert check_nonsignaling(table).ok
    assert abs(q - COS2_PI_8) <= 1e-10
    assert elapsed < 1.0


def test_criterion_2_constrained_chsh_n(criterion):
    detail = criterion(2, "constrained NS value of CHSH_n is 1 - 1/(2n)")
    t0 = time.perf_counter()
    got = {}
    for n in (2, 3, 4, 5):
        g = make_chsh_n(n)
        rows = output_constraint(g, {0: 0}, {0: 0}, 1)
        sol, poly = nonsignaling.solve_ns(g, rows)
        table = poly.table(sol.x)
        got[n] = (sol.value, nonsignaling.vertex_is_deterministic(table), check_nonsignaling(table).ok)
    elapsed = time.perf_counter() - t0
    detail(f"{ {n: str(v[0]) for n, v in got.items()} } time={elapsed:.2f}s")
    for n, (value, det, ns_ok) in got.items():
        assert value == 1 - Fraction(1, 2 * n)
        assert ns_ok
        if n <= 4:
            assert det, f"optimal vertex for n={n} is fractional"
    assert elapsed < 30.0


def test_criterion_3_chsh_plus_k_quantum(criterion):
    detail = criterion(3, "CHSH+k quantum value and consistency wins")
    worst = 0.0
    for k in (1, 2, 3):
        g = make_extended_chsh(k)
        rep = quantum.evaluate_quantum(g, quantum.canonical_strategy(g))
        expected = 1 - (2 / (3**k + 1)) * math.sin(math.pi / 8) ** 2
        worst = max(worst, abs(rep.overall - expected))
        assert abs(rep.overall - expected) <= 1e-10
        for qi in g.questions_with_tag("consistency"):
            assert abs(rep.per_question[qi] - 1) <= 1e-12
        assert abs(rep.by_tag(g, "consistency") - 1) <= 1e-12
    detail(f"max deviation {worst:.1e}")


def test_criterion_4_gap_table(criterion):
    detail = criterion(4, "gap table, 36 entries plus CHSH_n+k simulations")
    t0 = time.perf_counter()
    rows = bounds.gap_table(range(1, 13))
    mismatches = []
    for row, (k, chsh_gap, n, chshn_gap) in zip(rows, REFERENCE_GAPS):
        if row.k != k or _sig4(row.chsh_gap) != _sig4(chsh_gap):
            mismatches.append((k, "chsh", row.chsh_gap))
        if row.best_n != n:
            mismatches.append((k, "n", row.best_n))
        if _sig4(row.chshn_gap) != _sig4(chshn_gap):
            mismatches.append((k, "chshn", row.chshn_gap))
    sims = {}
    for n, k in ((3, 1), (4, 2), (5, 3)):
        g = make_extended_chsh_n(n, k)
        sims[n, k] = quantum.evaluate_quantum(g, quantum.canonical_strategy(g)).overall
    elapsed = time.perf_counter() - t0
    detail(f"mismatches={len(mismatches)} time={elapsed:.2f}s")
    assert len(rows) == 12
    assert not mismatches, mismatches
    for (n, k), v in sims.items():
        assert abs(v - bounds.quantum_lb_chshn(n, k)) <= 1e-10
    assert elapsed < 10.0


def test_criterion_5_teleported_chsh(criterion):
    detail = criterion(5, "teleported CHSH success and acceptance")
    r = quantum.simulate_teleported_chsh()
    detail(f"success={r.success_probability:.15f} accept={r.accept_given_success:.15f} "
           f"corrected={r.corrected_value:.15f}")
    assert abs(r.success_probability - 0.25) <= 1e-12
    assert abs(r.accept_given_success - COS2_PI_8) <= 1e-12
    assert abs(r.corrected_value - COS2_PI_8) <= 1e-12


def _box_strategies():
    ghz = make_ghz_game()
    dist = make_distributed_chsh(2)
    return [
        ("ghz_box", ghz, boxes.ghz_box_strategy()),
        ("distributed_selection", dist, boxes.distributed_selection_strategy(2)),
        ("distributed_resource_r", dist, boxes.distributed_resource_strategy(2)),
        ("exor_ghz", ghz, boxes.exor_box_strategy(ghz)),
    ]


def test_criterion_6_box_strategies(criterion):
    detail = criterion(6, "box strategies win with probability 1, exact and sampled")
    notes = []
    for name, g, s in _box_strategies():
        exact = boxes.evaluate_network(g, s).value
        smp = boxes.sample_network(g, s, 100_000, seed=2024)
        notes.append(f"{name}={exact}/{smp.estimate}")
        assert exact == 1, name
        assert abs(smp.estimate - float(exact)) <= 4 * smp.stderr, name
    detail(" ".join(notes))


def test_criterion_7_order_invariance(criterion):
    detail = criterion(7, "values identical under every consistent interleaving")
    cases = _box_strategies() + [("opposite_order", boxes.make_double_chsh(), boxes.opposite_order_strategy())]
    notes = []
    for name, g, s in cases:
        distinct = boxes.all_interleavings(g, s)
        raw = boxes.all_interleavings(g, s, distinct=False)
        values = {boxes.evaluate_network(g, s, o).value for o in raw}
        notes.append(f"{name}:{len(distinct)}/{len(raw)}")
        assert len(values) == 1, (name, values)
        assert set(distinct) <= set(raw)
    detail("interleavings distinct/raw " + " ".join(notes))


def test_criterion_8_surgery(criterion):
    detail = criterion(8, "strategy surgery loss bounds")
    rng = random.Random(8)
    n, positive = 120, 0
    for _ in range(n):
        S = surgery.random_instance(rng)
        _, rep = surgery.fix_randomness(S)
        eps = rep.loss_before[S.Q]
        positive += eps > 0
        assert rep.loss_after[S.Q] <= eps
        for q2 in S.affected_questions():
            assert rep.loss_after[q2] <= rep.loss_before[q2] + 2 * eps
        assert max(rep.loss_after.values()) <= 3 * max(rep.loss_before.values())
    strat, schedule = surgery.toy_extended_chsh_strategy(2, seed=0)
    res = surgery.iterate_surgery(strat, schedule)
    anchors = [step[2] for step in schedule]
    g = strat.game
    pattern = [
        q for q in g.questions_with_tag("game")
        if res.bounds[q].get(anchors[0]) == 6 and res.bounds[q].get(anchors[1]) == 2
    ]
    detail(f"instances={n} with_positive_loss={positive} coefficient_pattern_questions={len(pattern)}")
    assert n >= 100
    assert pattern, res.bounds
    assert surgery.schedule_coefficients(2) == [6, 2]
    assert res.bounds_hold


def test_criterion_9_ns_validation(criterion):
    detail = criterion(9, "NS checks and planted signaling locus")
    for box in (boxes.nonlocal_box(), boxes.selection_box(), boxes.resource_r()):
        assert check_nonsignaling(box.table).ok, box.name
    assert nonsignaling.check_multiround_ns(boxes.opposite_order_table()).ok
    # Bob's output copies Alice's input
    planted = ConditionalTable.from_function(
        ("Alice", "Bob"), ((0, 1), (0, 1)), ((0, 1), (0, 1)),
        lambda a, x: Fraction(int(x == (0, a[0]))),
    )
    chk = check_nonsignaling(planted)
    loci = {(v.signaller, v.affected) for v in chk.violations}
    detail(f"planted violations={len(chk.violations)} loci={sorted(loci)}")
    assert not chk.ok
    assert loci == {("Alice", ("Bob",))}
    for v in chk.violations:
        (a0, b0), (a1, b1) = v.inputs
        assert b0 == b1 and a0 != a1
        assert v.probabilities[0] != v.probabilities[1]


if __name__ == "__main__":
    import sys

    failures = 0
    for name, fn in sorted(globals().items()):
        if not name.startswith("test_criterion_"):
            continue
        info = {}

        def fake(num, title, info=info):
            info.update(num=num, title=title)
            return lambda d: info.update(detail=d)

        try:
            fn(fake)
            status = "PASS"
        except Exception as e:  # noqa: BLE001
            status, failures = f"FAIL ({type(e).__name__}: {e})", failures + 1
        print(f"criterion {info.get('num')} {status}: {info.get('title')} {info.get('detail', '')}")
    sys.exit(1 if failures else 0)
