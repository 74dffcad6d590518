"""Non-signaling conditional tables, their validity checks and the NS polytope of a game."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .classical import DeterministicStrategy
from .game import Game
from .simplex import LinearProgram, LPSolution, solve_lp

DEFAULT_VARIABLE_CAP = 400


class UnnormalizedTableError(ValueError):
    pass


class LPTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class NSViolation:
    """One failed marginal comparison.

    ``signaller`` changed its input from ``inputs[0]`` to ``inputs[1]`` (full
    input tuples) and the marginal of ``affected`` on ``outputs`` moved from
    ``probabilities[0]`` to ``probabilities[1]``.
    """

    signaller: str
    affected: tuple[str, ...]
    inputs: tuple[tuple, tuple]
    outputs: tuple
    probabilities: tuple[Fraction, Fraction]


@dataclass(frozen=True)
class NSCheck:
    violations: tuple[NSViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass
class ConditionalTable:
    """p(outputs | inputs) over a set of parties.

    ``entries`` maps ``(inputs, outputs)`` (one symbol per party each) to a
    Fraction; missing entries are zero.  ``support`` lists the input tuples the
    table is defined on and defaults to the full product of input alphabets.
    """

    parties: tuple[str, ...]
    inputs: tuple[tuple, ...]
    outputs: tuple[tuple, ...]
    entries: dict
    support: tuple[tuple, ...] | None = None

    def __post_init__(self):
        self.parties = tuple(self.parties)
        self.inputs = tuple(tuple(a) for a in self.inputs)
        self.outputs = tuple(tuple(a) for a in self.outputs)
        self.entries = {k: Fraction(v) for k, v in self.entries.items() if v != 0}
        if self.support is None:
            self.support = tuple(itertools.product(*self.inputs))
        else:
            self.support = tuple(tuple(s) for s in self.support)

    @classmethod
    def from_function(
        cls,
        parties: Sequence[str],
        inputs: Sequence[Sequence],
        outputs: Sequence[Sequence],
        prob: Callable[[tuple, tuple], Fraction],
        support: Iterable[tuple] | None = None,
    ) -> "ConditionalTable":
        ins = tuple(tuple(a) for a in inputs)
        outs = tuple(tuple(a) for a in outputs)
        sup = tuple(support) if support is not None else tuple(itertools.product(*ins))
        entries = {}
        for a in sup:
            for x in itertools.product(*outs):
                p = Fraction(prob(a, x))
                if p:
                    entries[(a, x)] = p
        return cls(tuple(parties), ins, outs, entries, sup)

    def p(self, inputs: Sequence, outputs: Sequence) -> Fraction:
        return self.entries.get((tuple(inputs), tuple(outputs)), Fraction(0))

    def output_space(self) -> list[tuple]:
        return list(itertools.product(*self.outputs))

    def normalization_errors(self) -> list[tuple]:
        bad = []
        for a in self.support:
            s = sum((self.p(a, x) for x in self.output_space()), Fraction(0))
            if s != 1:
                bad.append((a, s))
        for (a, x), v in self.entries.items():
            if v < 0:
                bad.append((a, x, v))
        return bad

    def check_normalized(self) -> None:
        bad = self.normalization_errors()
        if bad:
            raise UnnormalizedTableError(f"table is not a conditional distribution: {bad[:3]}")

    def marginal_on(self, keep: Sequence[int], inputs: tuple) -> dict:
        """Marginal distribution of the ``keep`` coordinates at the full input tuple ``inputs``."""
        out: dict = {}
        for x in self.output_space():
            v = self.p(inputs, x)
            if v:
                key = tuple(x[i] for i in keep)
                out[key] = out.get(key, Fraction(0)) + v
        return out

    def marginal(self, keep: Sequence[int | str]) -> "ConditionalTable":
        """Table of the ``keep`` parties alone.

        The dropped parties' inputs are fixed to the first support point
        compatible with each kept input; for a non-signaling table the choice
        does not matter.
        """
        idx = [self.parties.index(k) if isinstance(k, str) else k for k in keep]
        seen: dict = {}
        for a in self.support:
            key = tuple(a[i] for i in idx)
            seen.setdefault(key, a)
        entries = {}
        for key, a in seen.items():
            for x, v in self.marginal_on(idx, a).items():
                entries[(key, x)] = v
        return ConditionalTable(
            tuple(self.parties[i] for i in idx),
            tuple(self.inputs[i] for i in idx),
            tuple(self.outputs[i] for i in idx),
            entries,
            tuple(seen),
        )

    def entry_set(self) -> set:
        return {v for v in self.entries.values()}


def check_nonsignaling(table: ConditionalTable) -> NSCheck:
    """Per-coordinate check: changing one party's input never moves the joint
    marginal of all the other parties.  Implies the subset-based definition."""
    table.check_normalized()
    n = len(table.parties)
    violations = []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        groups: dict = {}
        for a in table.support:
            groups.setdefault(a[:i] + a[i + 1:], []).append(a)
        for group in groups.values():
            ref = group[0]
            ref_m = table.marginal_on(others, ref)
            for a in group[1:]:
                m = table.marginal_on(others, a)
                for y in sorted(set(ref_m) | set(m), key=repr):
                    p0, p1 = ref_m.get(y, Fraction(0)), m.get(y, Fraction(0))
                    if p0 != p1:
                        violations.append(NSViolation(
                            table.parties[i],
                            tuple(table.parties[j] for j in others),
                            (ref, a), y, (p0, p1),
                        ))
    return NSCheck(tuple(violations))


# --- multi-round tables ----------------------------------------------------------------


@dataclass(frozen=True)
class MultiRoundViolation:
    cut: tuple[int, ...]
    inputs: tuple[tuple, tuple]
    outputs: tuple
    probabilities: tuple[Fraction, Fraction]


@dataclass(frozen=True)
class MultiRoundCheck:
    violations: tuple[MultiRoundViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass
class MultiRoundTable:
    """p(output sequences | input sequences) for parties queried over several rounds.

    ``round_inputs[i][t]`` and ``round_outputs[i][t]`` are party ``i``'s
    alphabets in round ``t``.  Keys of ``entries`` are ``(ins, outs)`` where
    ``ins[i]`` is the tuple of party ``i``'s round inputs.
    """

    parties: tuple[str, ...]
    round_inputs: tuple[tuple[tuple, ...], ...]
    round_outputs: tuple[tuple[tuple, ...], ...]
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        self.round_inputs = tuple(tuple(tuple(r) for r in rs) for rs in self.round_inputs)
        self.round_outputs = tuple(tuple(tuple(r) for r in rs) for rs in self.round_outputs)
        self.entries = {k: Fraction(v) for k, v in self.entries.items() if v != 0}

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(len(r) for r in self.round_inputs)

    def input_space(self) -> list[tuple]:
        per = [list(itertools.product(*rs)) for rs in self.round_inputs]
        return list(itertools.product(*per))

    def output_space(self) -> list[tuple]:
        per = [list(itertools.product(*rs)) for rs in self.round_outputs]
        return list(itertools.product(*per))

    def p(self, ins, outs) -> Fraction:
        return self.entries.get((ins, outs), Fraction(0))

    def check_normalized(self) -> None:
        outs = self.output_space()
        for a in self.input_space():
            s = sum((self.p(a, x) for x in outs), Fraction(0))
            if s != 1:
                raise UnnormalizedTableError(f"inputs {a!r} sum to {s}")
        if any(v < 0 for v in self.entries.values()):
            raise UnnormalizedTableError("negative entry")

    def prefix_marginal(self, ins: tuple, cut: Sequence[int]) -> dict:
        out: dict = {}
        for x in self.output_space():
            v = self.p(ins, x)
            if v:
                key = tuple(xi[:j] for xi, j in zip(x, cut))
                out[key] = out.get(key, Fraction(0)) + v
        return out

    @classmethod
    def from_conditional(cls, table: ConditionalTable) -> "MultiRoundTable":
        """View a single-round table as a one-round multi-round table."""
        entries = {
            (tuple((s,) for s in a), tuple((s,) for s in x)): v
            for (a, x), v in table.entries.items()
        }
        return cls(
            table.parties,
            tuple((alph,) for alph in table.inputs),
            tuple((alph,) for alph in table.outputs),
            entries,
        )


def check_multiround_ns(table: MultiRoundTable) -> MultiRoundCheck:
    """For every cut vector, output prefixes may depend only on input prefixes."""
    table.check_normalized()
    violations = []
    space = table.input_space()
    for cut in itertools.product(*(range(n + 1) for n in table.lengths)):
        groups: dict = {}
        for a in space:
            key = tuple(ai[:j] for ai, j in zip(a, cut))
            groups.setdefault(key, []).append(a)
        for group in groups.values():
            ref = group[0]
            ref_m = table.prefix_marginal(ref, cut)
            for a in group[1:]:
                m = table.prefix_marginal(a, cut)
                for y in sorted(set(ref_m) | set(m), key=repr):
                    p0, p1 = ref_m.get(y, Fraction(0)), m.get(y, Fraction(0))
                    if p0 != p1:
                        violations.append(MultiRoundViolation(cut, (ref, a), y, (p0, p1)))
    return MultiRoundCheck(tuple(violations))


# --- the NS polytope of a game ---------------------------------------------------------


@dataclass
class NSPolytope:
    game: Game
    lp: LinearProgram
    support: tuple[tuple, ...]
    num_normalizations: int
    num_ns_equalities: int

    def table(self, x: Mapping) -> ConditionalTable:
        entries = {v: x[v] for v in self.lp.variables if x.get(v)}
        g = self.game
        return ConditionalTable(g.players, g.input_alphabet, g.output_alphabet, entries, self.support)


def support_points(game: Game, support: str) -> tuple[tuple, ...]:
    if support == "full":
        return tuple(game.input_space())
    if support == "questions":
        seen = []
        for q in game.questions:
            if q.inputs not in seen:
                seen.append(q.inputs)
        return tuple(seen)
    raise ValueError(f"support must be 'full' or 'questions', not {support!r}")


def build_ns_polytope(
    game: Game, support: str = "full", cap: int = DEFAULT_VARIABLE_CAP
) -> NSPolytope:
    """LP whose feasible set is the NS tables of ``game`` and whose objective is the win probability.

    With ``support="full"`` variables cover every input combination; with
    ``support="questions"`` only the input tuples the verifier can send, and
    NS equalities link only those.
    """
    sup = support_points(game, support)
    answers = list(game.answer_space())
    nvars = len(sup) * len(answers)
    if nvars > cap:
        raise LPTooLarge(f"{nvars} LP variables exceed the cap {cap}")
    variables = [(a, x) for a in sup for x in answers]
    objective: dict = {}
    for qi, q in enumerate(game.questions):
        for x in game.accept[qi]:
            key = (q.inputs, x)
            objective[key] = objective.get(key, Fraction(0)) + q.prob
    lp = LinearProgram(variables, {k: v for k, v in objective.items() if v})
    for a in sup:
        lp.add_equality({(a, x): 1 for x in answers}, 1)
    n = game.num_players
    n_ns = 0
    for i in range(n):
        groups: dict = {}
        for a in sup:
            groups.setdefault(a[:i] + a[i + 1:], []).append(a)
        others_space = list(itertools.product(*(game.output_alphabet[j] for j in range(n) if j != i)))
        for group in groups.values():
            ref = group[0]
            for a in group[1:]:
                for y in others_space:
                    row: dict = {}
                    for xi in game.output_alphabet[i]:
                        full = y[:i] + (xi,) + y[i:]
                        row[(ref, full)] = row.get((ref, full), 0) + 1
                        row[(a, full)] = row.get((a, full), 0) - 1
                    lp.add_equality(row, 0)
                    n_ns += 1
    return NSPolytope(game, lp, sup, len(sup), n_ns)


def output_constraint(
    game: Game,
    outputs: Mapping[int | str, object],
    inputs: Mapping[int | str, object],
    value,
    support: Sequence[tuple] | None = None,
) -> list[tuple[dict, Fraction]]:
    """Rows encoding P(outputs pattern | inputs pattern) = value.

    One row is emitted for every assignment of the remaining parties' inputs,
    so for CHSH, ``P(X=0|A=0)=1`` becomes sum_y p(0,y|0,b) = 1 for each b.
    """
    outs = {game.player_index(k): v for k, v in outputs.items()}
    ins = {game.player_index(k): v for k, v in inputs.items()}
    sup = tuple(support) if support is not None else tuple(game.input_space())
    rows = []
    for a in sup:
        if any(a[i] != v for i, v in ins.items()):
            continue
        row = {
            (a, x): 1
            for x in game.answer_space()
            if all(x[i] == v for i, v in outs.items())
        }
        rows.append((row, Fraction(value)))
    if not rows:
        raise ValueError("constraint matches no input combination")
    return rows


def solve_ns(
    game: Game,
    extra: Sequence[tuple[Mapping, object]] = (),
    support: str = "full",
    cap: int = DEFAULT_VARIABLE_CAP,
) -> tuple[LPSolution, NSPolytope]:
    poly = build_ns_polytope(game, support, cap)
    allowed = set(poly.lp.variables)
    for row, rhs in extra:
        missing = [k for k in row if k not in allowed]
        if missing:
            raise ValueError(f"constraint uses variables outside the polytope: {missing[:3]}")
        poly.lp.add_equality(row, rhs)
    return solve_lp(poly.lp), poly


def ns_value(game: Game, support: str = "full", cap: int = DEFAULT_VARIABLE_CAP) -> tuple[Fraction, ConditionalTable]:
    sol, poly = solve_ns(game, (), support, cap)
    return sol.value, poly.table(sol.x)


def constrained_ns_value(
    game: Game,
    extra: Sequence[tuple[Mapping, object]],
    support: str = "full",
    cap: int = DEFAULT_VARIABLE_CAP,
) -> Fraction:
    sol, _ = solve_ns(game, extra, support, cap)
    return sol.value


def vertex_is_deterministic(table: ConditionalTable) -> bool:
    return all(v in (0, 1) for v in table.entries.values())


def table_from_deterministic(game: Game, strategy: DeterministicStrategy) -> ConditionalTable:
    """The 0/1 table induced by a deterministic strategy (unasked players answer by default)."""
    def prob(a, x):
        return Fraction(int(strategy.answer(game, a) == x))

    return ConditionalTable.from_function(
        game.players, game.input_alphabet, game.output_alphabet, prob
    )
