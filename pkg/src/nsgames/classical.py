"""Classical values by exhaustive enumeration of deterministic strategies."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .game import NOT_ASKED, Game

DEFAULT_STRATEGY_CAP = 10**8


class StrategySpaceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class DeterministicStrategy:
    """One map input -> output per player.  Unasked players answer their first output symbol."""

    maps: tuple[dict, ...]

    def answer(self, game: Game, inputs: tuple) -> tuple:
        return tuple(
            game.default_answer(i) if a is NOT_ASKED else self.maps[i][a]
            for i, a in enumerate(inputs)
        )

    def as_lists(self, game: Game) -> dict:
        return {
            game.players[i]: {repr(a): o for a, o in m.items()}
            for i, m in enumerate(self.maps)
        }


def _asked_inputs(game: Game) -> list[tuple]:
    return [tuple(a for a in alph if a is not NOT_ASKED) for alph in game.input_alphabet]


def strategy_space_size(game: Game) -> int:
    return math.prod(
        len(out) ** len(ins) for ins, out in zip(_asked_inputs(game), game.output_alphabet)
    )


def evaluate_deterministic(game: Game, strategy: DeterministicStrategy) -> Fraction:
    for i, ins in enumerate(_asked_inputs(game)):
        missing = [a for a in ins if a not in strategy.maps[i]]
        if missing:
            raise ValueError(f"strategy for {game.players[i]} is not total: missing {missing}")
    total = Fraction(0)
    for qi, q in enumerate(game.questions):
        if game.accepts(qi, strategy.answer(game, q.inputs)):
            total += q.prob
    return total


def iter_strategies(game: Game):
    """All deterministic strategies, lexicographic in (player, input, output) order."""
    ins = _asked_inputs(game)
    per_player = [
        list(itertools.product(out, repeat=len(alph)))
        for alph, out in zip(ins, game.output_alphabet)
    ]
    for choice in itertools.product(*per_player):
        yield DeterministicStrategy(
            tuple(dict(zip(alph, outs)) for alph, outs in zip(ins, choice))
        )


def deterministic_value(
    game: Game, cap: int = DEFAULT_STRATEGY_CAP
) -> tuple[Fraction, DeterministicStrategy]:
    """Exact classical value and the lexicographically first optimal strategy.

    Probabilities are scaled to integers over a common denominator so the inner
    loop is integer arithmetic only.
    """
    size = strategy_space_size(game)
    if size > cap:
        raise StrategySpaceTooLarge(f"{size} deterministic strategies exceed the cap {cap}")
    denom = math.lcm(*(q.prob.denominator for q in game.questions))
    weights = [int(q.prob * denom) for q in game.questions]
    ins = _asked_inputs(game)
    # positions of each question's inputs inside each player's flattened choice tuple
    index = [{a: j for j, a in enumerate(alph)} for alph in ins]
    plan = [
        (w, game.accept[qi], [None if a is NOT_ASKED else index[i][a] for i, a in enumerate(q.inputs)])
        for qi, (q, w) in enumerate(zip(game.questions, weights))
        if w
    ]
    defaults = [game.default_answer(i) for i in range(game.num_players)]
    per_player = [
        list(itertools.product(out, repeat=len(alph)))
        for alph, out in zip(ins, game.output_alphabet)
    ]
    best, best_choice = -1, None
    for choice in itertools.product(*per_player):
        score = 0
        for w, table, pos in plan:
            ans = tuple(
                defaults[i] if p is None else choice[i][p] for i, p in enumerate(pos)
            )
            if ans in table:
                score += w
        if score > best:
            best, best_choice = score, choice
    witness = DeterministicStrategy(
        tuple(dict(zip(alph, outs)) for alph, outs in zip(ins, best_choice))
    )
    return Fraction(best, denom), witness


def mixture_value(game: Game, mixture: list[tuple[Fraction, DeterministicStrategy]]) -> Fraction:
    """Value of shared randomness over deterministic strategies."""
    return sum((w * evaluate_deterministic(game, s) for w, s in mixture), Fraction(0))
