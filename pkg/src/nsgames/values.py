"""All three values of a game in one report."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from . import classical, nonsignaling, quantum
from .game import Game, validate_game
from .report import plain


@dataclass
class GameValueReport:
    game: str
    classical: Fraction | None
    ns: Fraction | None
    quantum: float | None
    classical_witness: dict | None = None
    ns_witness: dict | None = None  # "inputs|outputs" -> probability
    skipped: dict = field(default_factory=dict)
    valid: bool = True

    def consistent(self, tol: float = quantum.VALUE_TOL) -> bool:
        """classical <= ns, classical <= quantum + tol and quantum <= ns + tol, where present."""
        ok = self.valid
        if self.classical is not None and self.ns is not None:
            ok &= self.classical <= self.ns
        if self.quantum is not None:
            ok &= self.quantum <= 1 + tol
            if self.classical is not None:
                ok &= float(self.classical) <= self.quantum + tol
            if self.ns is not None:
                ok &= self.quantum <= float(self.ns) + tol
        return ok

    def to_json(self) -> str:
        return json.dumps(plain(self), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "GameValueReport":
        d = json.loads(text)
        for key in ("classical", "ns"):
            if d[key] is not None:
                d[key] = Fraction(d[key])
        if d["ns_witness"] is not None:
            d["ns_witness"] = {k: Fraction(v) for k, v in d["ns_witness"].items()}
        return cls(**d)


def game_values(game: Game, lp_cap: int = nonsignaling.DEFAULT_VARIABLE_CAP,
                strategy_cap: int = classical.DEFAULT_STRATEGY_CAP) -> GameValueReport:
    """Whatever values are computable within the caps; the rest are recorded as skipped."""
    rep = GameValueReport(game.name, None, None, None, valid=validate_game(game).valid)
    try:
        rep.classical, w = classical.deterministic_value(game, strategy_cap)
        rep.classical_witness = w.as_lists(game)
    except classical.StrategySpaceTooLarge as e:
        rep.skipped["classical"] = str(e)
    try:
        rep.ns, table = nonsignaling.ns_value(game, cap=lp_cap)
        rep.ns_witness = {f"{a!r}|{x!r}": v for (a, x), v in sorted(table.entries.items(), key=repr)}
    except nonsignaling.LPTooLarge as e:
        rep.skipped["ns"] = str(e)
    try:
        rep.quantum = quantum.evaluate_quantum(game, quantum.canonical_strategy(game)).overall
    except ValueError as e:
        rep.skipped["quantum"] = str(e)
    return rep
