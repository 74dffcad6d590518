"""Fixing one player's share of a resource to a constant, with exact loss accounting.

A :class:`ParameterizedStrategy` factors the randomness seen on one anchor
question ``Q`` into four independent finite spaces:

* ``r_U``: what the players in ``U`` (the other involved players on ``Q``) read,
* ``r_Uv``: the rest of what ``v`` reads, apart from the resource ``R``,
* ``r_v``: ``v``'s share of ``R``,
* ``r_W``: everything else.

:func:`fix_randomness` replaces ``r_v`` by the single point that best agrees
with ``U`` on ``Q`` and moves the original ``r_v`` into ``r_W``, so the other
holders of ``R`` still see a fresh sample.  The loss on ``Q`` cannot go up and
the loss on any question sharing ``v``'s input grows by at most twice the loss
on ``Q``.

For several rounds of surgery a :class:`SourceStrategy` is used instead: the
players read named independent sources, and each player only sees the
sources it belongs to.  :func:`parameterize` cuts a source strategy into the
four spaces above and :func:`iterate_surgery` runs a whole schedule.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

from .game import (
    BITS,
    NOT_ASKED,
    Game,
    check_uniqueness,
    decode_symbol,
    encode_symbol,
    format_fraction,
    parse_fraction,
    unique_accepting_answer,
)

Space = tuple  # of (point, Fraction weight)


class SurgeryPreconditionError(ValueError):
    pass


def _space(points) -> Space:
    sp = tuple((p, Fraction(w)) for p, w in points)
    if sum(w for _, w in sp) != 1 or any(w < 0 for _, w in sp):
        raise ValueError("sample space weights must be nonnegative and sum to 1")
    return sp


def check_v_compatible(game: Game, q: int, q2: int, v: int | str) -> bool:
    """True when ``v``'s input differs between the questions, or every other player
    involved on ``q`` either keeps its ``q`` input on ``q2`` or is ignored on ``q2``."""
    v = game.player_index(v)
    a, b = game.questions[q].inputs, game.questions[q2].inputs
    if a[v] != b[v]:
        return True
    for u in game.involved(q):
        if u == v:
            continue
        if b[u] != a[u] and game.depends_on(q2, u):
            return False
    return True


def _q_target(game: Game, q: int, v: int, U: Sequence[int], u_ans: tuple):
    ans = [game.default_answer(i) for i in range(game.num_players)]
    for i, x in zip(U, u_ans):
        ans[i] = x
    return unique_accepting_answer(game, q, v, ans)


@dataclass
class ParameterizedStrategy:
    game: Game
    v: int
    Q: int
    U: tuple[int, ...]
    W: tuple[int, ...]
    resource: tuple[str, ...]
    resource_parties: frozenset
    r_U: Space
    r_Uv: Space
    r_v: Space
    r_W: Space
    u_answers: Callable[[Any], tuple]
    v_answer: Callable[[Any, Any, Any], Any]
    w_targets: dict = field(default_factory=dict)  # Q' -> f(r_U, r_Uv, r_v, r_W)

    def __post_init__(self):
        for name in ("r_U", "r_Uv", "r_v", "r_W"):
            setattr(self, name, _space(getattr(self, name)))

    def affected_questions(self) -> list[int]:
        return sorted(self.w_targets)


def loss_probability(S: ParameterizedStrategy, question: int | None = None) -> Fraction:
    """Exact probability that ``v``'s answer is not the unique accepting one.

    ``question=None`` or ``S.Q`` scores against ``U`` on the anchor question;
    any key of ``S.w_targets`` scores against that question's target.
    """
    g = S.game
    total = Fraction(0)
    if question is None or question == S.Q:
        for ru, wu in S.r_U:
            target = _q_target(g, S.Q, S.v, S.U, tuple(S.u_answers(ru)))
            for ruv, wuv in S.r_Uv:
                for rv, wv in S.r_v:
                    if S.v_answer(ru, ruv, rv) != target:
                        total += wu * wuv * wv
        return total
    f = S.w_targets[question]
    for ru, wu in S.r_U:
        for ruv, wuv in S.r_Uv:
            for rv, wv in S.r_v:
                ans = S.v_answer(ru, ruv, rv)
                for rw, ww in S.r_W:
                    if ans != f(ru, ruv, rv, rw):
                        total += wu * wuv * wv * ww
    return total


@dataclass(frozen=True)
class SurgeryReport:
    r_v_star: Any
    loss_before: dict  # question -> Fraction
    loss_after: dict
    compatible: dict  # Q' -> bool
    anchor_ok: bool
    others_ok: dict  # Q' -> bool
    max_ok: bool

    @property
    def ok(self) -> bool:
        return self.anchor_ok and all(self.others_ok.values()) and self.max_ok


def check_preconditions(S: ParameterizedStrategy) -> None:
    g = S.game
    qs = [S.Q] + S.affected_questions()
    rep = check_uniqueness(g, qs)
    if not rep.unique:
        raise SurgeryPreconditionError(f"game is not unique on {rep.counterexamples[0]}")
    touching = [g.players[u] for u in S.U if u in S.resource_parties]
    if touching:
        raise SurgeryPreconditionError(f"resource {S.resource} is accessible to {touching}")
    vin = g.questions[S.Q].inputs[S.v]
    for q2 in S.affected_questions():
        if g.questions[q2].inputs[S.v] != vin:
            raise SurgeryPreconditionError(f"question {q2} does not give {g.players[S.v]} its anchor input")


def fix_randomness(S: ParameterizedStrategy) -> tuple[ParameterizedStrategy, SurgeryReport]:
    check_preconditions(S)
    g = S.game
    targets = {ru: _q_target(g, S.Q, S.v, S.U, tuple(S.u_answers(ru))) for ru, _ in S.r_U}
    best, best_score = None, None
    for rv, _ in S.r_v:
        score = sum(
            (wu * wuv for ru, wu in S.r_U for ruv, wuv in S.r_Uv
             if S.v_answer(ru, ruv, rv) == targets[ru]),
            Fraction(0),
        )
        if best_score is None or score > best_score:
            best, best_score = rv, score
    star = best
    old_v, old_w = S.v_answer, dict(S.w_targets)

    def v_new(ru, ruv, _rv):
        return old_v(ru, ruv, star)

    def lift(f):
        return lambda ru, ruv, _rv, rw: f(ru, ruv, rw[0], rw[1])

    S2 = ParameterizedStrategy(
        g, S.v, S.Q, S.U, S.W, S.resource, S.resource_parties,
        S.r_U, S.r_Uv, ((star, Fraction(1)),),
        tuple(((rv, rw), wv * ww) for rv, wv in S.r_v for rw, ww in S.r_W),
        S.u_answers, v_new,
        {q2: lift(f) for q2, f in old_w.items()},
    )
    qs = [S.Q] + S.affected_questions()
    before = {q: loss_probability(S, q) for q in qs}
    after = {q: loss_probability(S2, q) for q in qs}
    eps = before[S.Q]
    others_ok = {q: after[q] <= before[q] + 2 * eps for q in S.affected_questions()}
    report = SurgeryReport(
        star, before, after,
        {q: check_v_compatible(g, S.Q, q, S.v) for q in S.affected_questions()},
        after[S.Q] <= eps,
        others_ok,
        max(after.values()) <= 3 * max(before.values()),
    )
    return S2, report


# --- source model ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Source:
    name: str
    parties: frozenset
    space: Space


@dataclass
class SourceStrategy:
    """Players answer from the independent sources they belong to.

    ``answers[i][a]`` is a function of a dict mapping the names of player
    ``i``'s sources to their sampled points.
    """

    game: Game
    sources: tuple[Source, ...]
    answers: tuple[dict, ...]

    def __post_init__(self):
        self.sources = tuple(
            Source(s.name, frozenset(s.parties), _space(s.space)) for s in self.sources
        )

    def visible(self, i: int) -> list[str]:
        return [s.name for s in self.sources if i in s.parties]

    def answer(self, i: int, a, point: Mapping) -> Any:
        if a is NOT_ASKED:
            return self.game.default_answer(i)
        view = {n: point[n] for n in self.visible(i)}
        return self.answers[i][a](view)

    def joint(self):
        names = [s.name for s in self.sources]
        for combo in itertools.product(*(s.space for s in self.sources)):
            w = Fraction(1)
            for _, wi in combo:
                w *= wi
            yield dict(zip(names, (p for p, _ in combo))), w

    def loss(self, qi: int) -> Fraction:
        g = self.game
        ins = g.questions[qi].inputs
        total = Fraction(0)
        for point, w in self.joint():
            ans = tuple(self.answer(i, a, point) for i, a in enumerate(ins))
            if not g.accepts(qi, ans):
                total += w
        return total

    def losses(self) -> dict:
        return {qi: self.loss(qi) for qi in range(len(self.game.questions))}

    def value(self) -> Fraction:
        return sum(
            (q.prob * (1 - self.loss(qi)) for qi, q in enumerate(self.game.questions)), Fraction(0)
        )


def _joint_space(sources: Sequence[Source]) -> Space:
    if not sources:
        return ((), Fraction(1)),
    out = []
    for combo in itertools.product(*(s.space for s in sources)):
        w = Fraction(1)
        for _, wi in combo:
            w *= wi
        out.append((tuple(p for p, _ in combo), w))
    return tuple(out)


def parameterize(S: SourceStrategy, v: int | str, R: Sequence[str], Q: int) -> ParameterizedStrategy:
    """Cut ``S`` into the four spaces around anchor ``Q``, player ``v`` and resource sources ``R``."""
    g = S.game
    v = g.player_index(v)
    R = tuple(R)
    by_name = {s.name: s for s in S.sources}
    missing = [r for r in R if r not in by_name]
    if missing:
        raise ValueError(f"unknown sources {missing}")
    U = tuple(u for u in g.involved(Q) if u != v)
    W = tuple(i for i in range(g.num_players) if i != v and i not in U)
    src_u = [s for s in S.sources if s.parties & set(U)]
    src_uv = [s for s in S.sources if v in s.parties and not (s.parties & set(U)) and s.name not in R]
    src_v = [by_name[r] for r in R]
    taken = {s.name for s in src_u + src_uv + src_v}
    src_w = [s for s in S.sources if s.name not in taken]
    res_parties = frozenset().union(*(s.parties for s in src_v)) if src_v else frozenset()
    # R sources touching U would land in both r_U and r_v; the precondition check reports it
    src_u = [s for s in src_u if s.name not in R]

    def point(ru=(), ruv=(), rv=(), rw=()):
        p = {}
        for group, vals in ((src_u, ru), (src_uv, ruv), (src_v, rv), (src_w, rw)):
            for s, x in zip(group, vals):
                p[s.name] = x
        return p

    qin = g.questions[Q].inputs

    def u_answers(ru):
        p = point(ru=ru)
        return tuple(S.answers[u][qin[u]]({n: p[n] for n in S.visible(u)}) for u in U)

    def v_answer(ru, ruv, rv):
        p = point(ru, ruv, rv)
        return S.answers[v][qin[v]]({n: p[n] for n in S.visible(v)})

    def w_target(q2):
        ins = g.questions[q2].inputs

        def f(ru, ruv, rv, rw):
            p = point(ru, ruv, rv, rw)
            ans = [S.answer(i, a, p) for i, a in enumerate(ins)]
            return unique_accepting_answer(g, q2, v, ans)

        return f

    affected = [
        q2 for q2, q in enumerate(g.questions)
        if q2 != Q and q.inputs[v] == qin[v] and v in g.involved(q2)
    ]
    return ParameterizedStrategy(
        g, v, Q, U, W, R, res_parties,
        _joint_space(src_u), _joint_space(src_uv), _joint_space(src_v), _joint_space(src_w),
        u_answers, v_answer, {q2: w_target(q2) for q2 in affected},
    )


def apply_fix(S: SourceStrategy, v: int | str, R: Sequence[str], Q: int) -> tuple[SourceStrategy, SurgeryReport]:
    """One surgery step on a source strategy.

    ``v`` answers its anchor input with ``R`` pinned to the chosen point; every
    other holder of ``R``, and ``v`` on other inputs, still read ``R`` itself.
    """
    g = S.game
    v = g.player_index(v)
    P = parameterize(S, v, R, Q)
    _, report = fix_randomness(P)
    star = dict(zip(R, report.r_v_star))
    a0 = g.questions[Q].inputs[v]
    old = S.answers[v][a0]
    new_answers = list(S.answers)
    table = dict(S.answers[v])
    table[a0] = lambda view, old=old: old({**view, **star})
    new_answers[v] = table
    return SourceStrategy(g, S.sources, tuple(new_answers)), report


@dataclass(frozen=True)
class ScheduleStep:
    v: int
    resource: tuple[str, ...]
    anchor: int


@dataclass
class IterationResult:
    strategy: SourceStrategy
    reports: list[SurgeryReport]
    initial_losses: dict
    final_losses: dict
    bounds: dict  # question -> {original question: integer coefficient}

    def bound_value(self, q: int) -> Fraction:
        return sum(
            (c * self.initial_losses[b] for b, c in self.bounds[q].items()), Fraction(0)
        )

    @property
    def bounds_hold(self) -> bool:
        return all(self.final_losses[q] <= self.bound_value(q) for q in self.final_losses)


def iterate_surgery(S: SourceStrategy, schedule: Sequence[tuple]) -> IterationResult:
    """Apply the surgeries in order while tracking a symbolic loss bound per question.

    Each step keeps the anchor's bound and adds twice the anchor's current
    bound to every question that gives ``v`` the anchor input.
    """
    g = S.game
    initial = S.losses()
    bounds = {q: {q: 1} for q in initial}
    reports = []
    cur = S
    for step in schedule:
        v, R, Q = step if not isinstance(step, ScheduleStep) else (step.v, step.resource, step.anchor)
        v = g.player_index(v)
        cur, rep = apply_fix(cur, v, R, Q)
        reports.append(rep)
        a0 = g.questions[Q].inputs[v]
        anchor_bound = dict(bounds[Q])
        for q2, q in enumerate(g.questions):
            if q2 != Q and q.inputs[v] == a0:
                b = dict(bounds[q2])
                for k, c in anchor_bound.items():
                    b[k] = b.get(k, 0) + 2 * c
                bounds[q2] = b
    return IterationResult(cur, reports, initial, cur.losses(), bounds)


def schedule_coefficients(k: int) -> list[int]:
    """Coefficient of the j-th anchor's loss after ``k`` chained steps: 2 * 3^(k-j)."""
    return [2 * 3 ** (k - j) for j in range(1, k + 1)]


# --- serialization ------------------------------------------------------------------------


def _enc_space(sp: Space) -> list:
    return [[encode_symbol(p), format_fraction(w)] for p, w in sp]


def _dec_space(d) -> Space:
    return tuple((decode_symbol(p), parse_fraction(w)) for p, w in d)


def parameterized_to_dict(S: ParameterizedStrategy) -> dict:
    """Tabulate every response function over its full domain."""
    return {
        "v": S.v,
        "Q": S.Q,
        "U": list(S.U),
        "W": list(S.W),
        "resource": list(S.resource),
        "resource_parties": sorted(S.resource_parties),
        "r_U": _enc_space(S.r_U),
        "r_Uv": _enc_space(S.r_Uv),
        "r_v": _enc_space(S.r_v),
        "r_W": _enc_space(S.r_W),
        "u_answers": [[encode_symbol(ru), encode_symbol(tuple(S.u_answers(ru)))] for ru, _ in S.r_U],
        "v_answer": [
            [encode_symbol((ru, ruv, rv)), encode_symbol(S.v_answer(ru, ruv, rv))]
            for ru, _ in S.r_U for ruv, _ in S.r_Uv for rv, _ in S.r_v
        ],
        "w_targets": {
            str(q): [
                [encode_symbol((ru, ruv, rv, rw)), encode_symbol(f(ru, ruv, rv, rw))]
                for ru, _ in S.r_U for ruv, _ in S.r_Uv for rv, _ in S.r_v for rw, _ in S.r_W
            ]
            for q, f in sorted(S.w_targets.items())
        },
    }


def parameterized_from_dict(game: Game, d: dict) -> ParameterizedStrategy:
    def lookup(rows, unpack):
        table = {decode_symbol(k): decode_symbol(v) for k, v in rows}
        return lambda *args: table[unpack(args)]

    return ParameterizedStrategy(
        game, d["v"], d["Q"], tuple(d["U"]), tuple(d["W"]), tuple(d["resource"]),
        frozenset(d["resource_parties"]),
        _dec_space(d["r_U"]), _dec_space(d["r_Uv"]), _dec_space(d["r_v"]), _dec_space(d["r_W"]),
        lookup(d["u_answers"], lambda a: a[0]),
        lookup(d["v_answer"], tuple),
        {int(q): lookup(rows, tuple) for q, rows in d["w_targets"].items()},
    )


def source_strategy_to_dict(S: SourceStrategy) -> dict:
    g = S.game
    players = {}
    for i, p in enumerate(g.players):
        names = S.visible(i)
        spaces = [next(s for s in S.sources if s.name == n).space for n in names]
        rows = {}
        for a in S.answers[i]:
            rows[json.dumps(encode_symbol(a))] = [
                [encode_symbol(tuple(pt for pt, _ in combo)),
                 encode_symbol(S.answers[i][a](dict(zip(names, (pt for pt, _ in combo)))))]
                for combo in itertools.product(*spaces)
            ]
        players[p] = {"sources": names, "answers": rows}
    return {
        "sources": [
            {"name": s.name, "parties": sorted(g.players[i] for i in s.parties), "space": _enc_space(s.space)}
            for s in S.sources
        ],
        "players": players,
    }


def source_strategy_from_dict(game: Game, d: dict) -> SourceStrategy:
    sources = tuple(
        Source(s["name"], frozenset(game.player_index(p) for p in s["parties"]), _dec_space(s["space"]))
        for s in d["sources"]
    )
    answers = []
    for p in game.players:
        pd = d["players"][p]
        names = pd["sources"]
        table = {}
        for a_enc, rows in pd["answers"].items():
            lut = {decode_symbol(k): decode_symbol(v) for k, v in rows}
            table[decode_symbol(json.loads(a_enc))] = (
                lambda view, lut=lut, names=names: lut[tuple(view[n] for n in names)]
            )
        answers.append(table)
    return SourceStrategy(game, sources, tuple(answers))


# --- toy instances ----------------------------------------------------------------------------


def _random_space(rng, size: int) -> Space:
    raw = [rng.randint(1, 6) for _ in range(size)]
    tot = sum(raw)
    return tuple((j, Fraction(r, tot)) for j, r in enumerate(raw))


def toy_extended_chsh_strategy(k: int, seed: int = 0, space_size: int = 2) -> tuple[SourceStrategy, list[tuple]]:
    """A random finite strategy for CHSH + k built from pairwise sources, plus the
    schedule that pins Alice's resources one consistency question at a time.

    Sources: ``AB`` shared by Alice and Bob, ``AC<j>`` shared by Alice and
    Charlie_j, and a local source per player.  Step ``j`` anchors on the
    consistency question with Charlie_j and pins every Alice source not shared
    with Charlie_j.
    """
    import random

    from .game import make_extended_chsh

    rng = random.Random(seed)
    g = make_extended_chsh(k)
    n = g.num_players
    sources = [Source("AB", frozenset({0, 1}), _random_space(rng, space_size))]
    for j in range(k):
        sources.append(Source(f"AC{j + 1}", frozenset({0, 2 + j}), _random_space(rng, space_size)))
    for i in range(n):
        sources.append(Source(f"L{i}", frozenset({i}), _random_space(rng, space_size)))
    answers = []
    for i in range(n):
        names = [s.name for s in sources if i in s.parties]
        spaces = [next(s for s in sources if s.name == nm).space for nm in names]
        table = {}
        for a in (x for x in g.input_alphabet[i] if x is not NOT_ASKED):
            lut = {
                tuple(p for p, _ in combo): rng.randint(0, 1)
                for combo in itertools.product(*spaces)
            }
            table[a] = lambda view, lut=lut, names=tuple(names): lut[tuple(view[nm] for nm in names)]
        answers.append(table)
    strat = SourceStrategy(g, tuple(sources), tuple(answers))
    consistency = [qi for qi, q in enumerate(g.questions) if q.tag == "consistency"]
    alice = [s.name for s in sources if 0 in s.parties]
    schedule = []
    for j, qi in enumerate(consistency):
        keep = {f"AC{j + 1}"}
        schedule.append((0, tuple(nm for nm in alice if nm not in keep and not nm.startswith("L")), qi))
    return strat, schedule


def _anchor_and_followup(game: Game, v: int):
    Q = next(i for i, q in enumerate(game.questions) if q.tag == "consistency")
    a0 = game.questions[Q].inputs[v]
    Qp = next(
        i for i, q in enumerate(game.questions)
        if i != Q and q.tag == "game" and q.inputs[v] == a0
    )
    return Q, Qp


def surgery_ratio(report: SurgeryReport, Q: int, Qp: int) -> Fraction | None:
    """(eps'_{Q'} - eps_{Q'}) / (2 eps_Q), or None when eps_Q = 0."""
    e = report.loss_before[Q]
    if e == 0:
        return None
    return (report.loss_after[Qp] - report.loss_before[Qp]) / (2 * e)


def near_tight_instance(N: int) -> ParameterizedStrategy:
    """A CHSH + 1 instance whose surgery ratio is exactly 1 - 1/N.

    Charlie always answers 0.  Alice's extra randomness and her share of the
    Alice-Bob resource are uniform on N points, and she answers 1 exactly when
    they coincide, so every fixed point is equally good.  Bob's target copies
    Alice's original answer.
    """
    from .game import make_extended_chsh

    g = make_extended_chsh(1)
    Q, Qp = _anchor_and_followup(g, 0)
    unif = tuple((j, Fraction(1, N)) for j in range(N))
    return ParameterizedStrategy(
        g, 0, Q, (2,), (1,), ("AB",), frozenset({0, 1}),
        ((0, Fraction(1)),), unif, unif, ((0, Fraction(1)),),
        lambda ru: (0,),
        lambda ru, ruv, rv: int(ruv == rv),
        {Qp: lambda ru, ruv, rv, rw: int(ruv == rv)},
    )


def tightness_search(n_uv: int = 2, n_v: int = 2, weights=(Fraction(1, 2), Fraction(1, 3))):
    """Brute force over all 0/1 response tables on small spaces for the largest surgery ratio.

    Charlie answers 0 (by symmetry this loses nothing).  Returns
    ``(best ratio, instance, report)``.
    """
    from .game import make_extended_chsh

    g = make_extended_chsh(1)
    Q, Qp = _anchor_and_followup(g, 0)
    best = (Fraction(-1), None, None)

    def space(n, w):
        if n == 1:
            return ((0, Fraction(1)),)
        rest = (1 - w) / (n - 1)
        return ((0, w),) + tuple((j, rest) for j in range(1, n))

    cells = n_uv * n_v
    for w_uv, w_v in itertools.product(weights, repeat=2):
        for vt in itertools.product(BITS, repeat=cells):
            for wt in itertools.product(BITS, repeat=cells):
                S = ParameterizedStrategy(
                    g, 0, Q, (2,), (1,), ("AB",), frozenset({0, 1}),
                    ((0, Fraction(1)),), space(n_uv, w_uv), space(n_v, w_v), ((0, Fraction(1)),),
                    lambda ru: (0,),
                    lambda ru, ruv, rv, vt=vt: vt[ruv * n_v + rv],
                    {Qp: lambda ru, ruv, rv, rw, wt=wt: wt[ruv * n_v + rv]},
                )
                _, rep = fix_randomness(S)
                r = surgery_ratio(rep, Q, Qp)
                if r is not None and r > best[0]:
                    best = (r, S, rep)
    return best



def random_instance(rng, games: Sequence[Game] | None = None, max_space: int = 3) -> ParameterizedStrategy:
    """A random parameterized strategy satisfying the surgery preconditions.

    ``v`` is Alice and ``Q`` a random consistency question, so ``U`` is the
    Charlie it involves.  The other asked players on each follow-up question
    answer by random tables of ``(r_U, r_v, r_W)``; their unique accepting
    reply for Alice becomes that question's target.  ``rng`` is a
    ``random.Random``.
    """
    from .game import make_extended_chsh, make_extended_chsh_n

    if games is None:
        games = (make_extended_chsh(1), make_extended_chsh(2), make_extended_chsh_n(3, 1))
    g = rng.choice(list(games))
    v = 0
    Q = rng.choice(g.questions_with_tag("consistency"))
    U = tuple(i for i in g.questions[Q].asked() if i != v)
    a0 = g.questions[Q].inputs[v]
    follow = [i for i, q in enumerate(g.questions) if i != Q and q.inputs[v] == a0]
    W = tuple(sorted({i for q2 in follow for i in g.questions[q2].asked()} - {v} - set(U)))
    spaces = [_random_space(rng, rng.randint(1, max_space)) for _ in range(4)]
    r_U, r_Uv, r_v, r_W = spaces

    u_table = {ru: tuple(rng.choice(g.output_alphabet[u]) for u in U) for ru, _ in r_U}
    v_table = {
        (ru, ruv, rv): rng.choice(g.output_alphabet[v])
        for ru, _ in r_U for ruv, _ in r_Uv for rv, _ in r_v
    }
    w_targets = {}
    for q2 in follow:
        others = [i for i in g.questions[q2].asked() if i != v]
        table = {}
        for ru, _ in r_U:
            for rv, _ in r_v:
                for rw, _ in r_W:
                    ans = [g.default_answer(i) for i in range(g.num_players)]
                    for i in others:
                        ans[i] = u_table[ru][U.index(i)] if i in U else rng.choice(g.output_alphabet[i])
                    table[ru, rv, rw] = unique_accepting_answer(g, q2, v, ans)
        w_targets[q2] = lambda ru, ruv, rv, rw, table=table: table[ru, rv, rw]
    return ParameterizedStrategy(
        g, v, Q, U, W, ("R",), frozenset({v} | set(W)),
        r_U, r_Uv, r_v, r_W,
        lambda ru: u_table[ru],
        lambda ru, ruv, rv: v_table[ru, ruv, rv],
        w_targets,
    )
