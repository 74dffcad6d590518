"""Command-line front end: ``nsgames <command> ...``.

Exit status is 0 when every internal check passed, 1 when one failed and 2
on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import bounds, boxes, nonsignaling, quantum, surgery, values
from .game import (
    BUILTIN_FAMILIES,
    Game,
    builtin_game,
    check_uniqueness,
    game_from_dict,
    load_game,
    validate_game,
)
from .report import FORMATS, emit_report, write_report
from .simplex import InfeasibleError, to_cplex_lp

DEFAULT_SEED = 0
WORKERS_ENV = "NSGAMES_WORKERS"


class AssertionFailed(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    game: str | None = None
    game_file: str | None = None
    params: dict = field(default_factory=dict)
    strategy: str | None = None
    strategy_file: str | None = None
    fmt: str = "json"
    seed: int = DEFAULT_SEED
    tolerance: float = quantum.VALUE_TOL
    output: str | None = None


def workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _int_range(text: str) -> list[int]:
    """'3' -> [3], '1..12' -> [1..12], '2,3,5' -> [2, 3, 5]."""
    out = []
    for part in text.split(","):
        m = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*", part)
        if m:
            out.extend(range(int(m.group(1)), int(m.group(2)) + 1))
        else:
            out.append(int(part))
    return out


def _load_game(cfg: RunConfig, **override) -> Game:
    if cfg.game_file:
        return load_game(cfg.game_file)
    if not cfg.game:
        raise AssertionFailed("a game is required (--game or --game-file)")
    params = dict(cfg.params)
    params.update(override)
    return builtin_game(cfg.game, **params)


# --- constraint mini-language ---------------------------------------------------------------

_TERM = re.compile(r"\s*([A-Za-z_]+\d*)\s*=\s*([^,|)]+?)\s*$")


def _player_for(symbol: str, game: Game, output: bool) -> int:
    """X/A -> first player, Y/B -> second, Zj/Cj -> j-th Charlie, O<i>/I<i> -> player i."""
    s = symbol.strip()
    if s in game.players:
        return game.player_index(s)
    m = re.fullmatch(r"([A-Za-z]+)(\d*)", s)
    if not m:
        raise ValueError(f"bad symbol {symbol!r}")
    letter, num = m.group(1), m.group(2)
    if letter in ("X", "A"):
        i = 0
    elif letter in ("Y", "B"):
        i = 1
    elif letter in ("Z", "C"):
        i = 1 + int(num or 1)
    elif letter in ("O", "I"):
        i = int(num)
    else:
        raise ValueError(f"unknown symbol {symbol!r}")
    if (letter in ("X", "Y", "Z", "O")) != output:
        raise ValueError(f"{symbol!r} is on the wrong side of '|'")
    if i >= game.num_players:
        raise ValueError(f"{symbol!r} names player {i}, but the game has {game.num_players}")
    return i


def _value(text: str):
    t = text.strip()
    if re.fullmatch(r"-?\d+", t):
        return int(t)
    return t


def parse_constraint(text: str, game: Game, support=None) -> list:
    """``P(X=0,Y=1|A=0)=1/2`` -> LP rows (one per assignment of the unmentioned inputs)."""
    m = re.fullmatch(r"\s*P\((.*)\|(.*)\)\s*=\s*([-\d/ ]+)\s*", text)
    if not m:
        raise ValueError(f"cannot parse constraint {text!r}; expected P(outputs|inputs)=value")
    outs, ins = {}, {}
    for side, target, is_out in ((m.group(1), outs, True), (m.group(2), ins, False)):
        for term in filter(None, (t.strip() for t in side.split(","))):
            tm = _TERM.fullmatch(term)
            if not tm:
                raise ValueError(f"bad term {term!r}")
            target[_player_for(tm.group(1), game, is_out)] = _value(tm.group(2))
    value = Fraction(m.group(3).replace(" ", ""))
    return nonsignaling.output_constraint(game, outs, ins, value, support)


# --- commands --------------------------------------------------------------------------------


def cmd_value(cfg: RunConfig, args) -> tuple[dict, bool]:
    rep = values.game_values(_load_game(cfg), lp_cap=args.lp_cap)
    return rep, rep.consistent(cfg.tolerance)


def _lp_one(payload) -> dict:
    family, params, n, constraints, support, export = payload
    g = builtin_game(family, **dict(params, **({"n": n} if n is not None else {})))
    sup = nonsignaling.support_points(g, support)
    rows = [r for text in constraints for r in parse_constraint(text, g, sup)]
    try:
        sol, poly = nonsignaling.solve_ns(g, rows, support)
    except InfeasibleError as e:
        return {"game": g.name, "infeasible": str(e)}
    table = poly.table(sol.x)
    res = {
        "game": g.name,
        "value": sol.value,
        "constraints": list(constraints),
        "deterministic_vertex": nonsignaling.vertex_is_deterministic(table),
        "nonsignaling": nonsignaling.check_nonsignaling(table).ok,
        "variables": len(poly.lp.variables),
        "pivots": sol.pivots,
    }
    if export:
        path = Path(export)
        if n is not None and "{n}" in export:
            path = Path(export.format(n=n))
        path.write_text(to_cplex_lp(poly.lp))
        res["exported"] = str(path)
    return res


def cmd_lp(cfg: RunConfig, args) -> tuple[dict, bool]:
    if cfg.game_file:
        g = load_game(cfg.game_file)
        sup = nonsignaling.support_points(g, args.support)
        rows = [r for t in args.constrain for r in parse_constraint(t, g, sup)]
        sol, poly = nonsignaling.solve_ns(g, rows, args.support)
        if args.export:
            Path(args.export).write_text(to_cplex_lp(poly.lp))
        return {"game": g.name, "value": sol.value}, True
    params = {k: v for k, v in cfg.params.items() if k != "n"}
    ns = _int_range(args.n) if args.n else [None]
    payloads = [(cfg.game, params, n, tuple(args.constrain), args.support, args.export) for n in ns]
    if workers() > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(workers()) as ex:
            results = list(ex.map(_lp_one, payloads))
    else:
        results = [_lp_one(p) for p in payloads]
    ok = all("infeasible" not in r and r["nonsignaling"] for r in results)
    return (results[0] if len(results) == 1 else {"rows": results}), ok


def _strategy(cfg: RunConfig, g: Game):
    if cfg.strategy_file:
        return boxes.strategy_from_dict(json.loads(Path(cfg.strategy_file).read_text()))
    name = cfg.strategy
    if name == "exor":
        return boxes.exor_box_strategy(g)
    if name in boxes.BUILTIN_STRATEGIES:
        return boxes.BUILTIN_STRATEGIES[name][1]()
    raise AssertionFailed(
        f"unknown strategy {name!r}; known: {sorted(boxes.BUILTIN_STRATEGIES) + ['exor']}"
    )


def cmd_simulate(cfg: RunConfig, args) -> tuple[dict, bool]:
    if args.teleported:
        r = quantum.simulate_teleported_chsh()
        target = math.cos(math.pi / 8) ** 2
        ok = (abs(r.success_probability - 0.25) <= cfg.tolerance
              and abs(r.accept_given_success - target) <= cfg.tolerance
              and abs(r.corrected_value - target) <= cfg.tolerance)
        return {"teleported_chsh": r, "expected_accept": target}, ok
    if cfg.strategy in boxes.BUILTIN_STRATEGIES and not cfg.game and not cfg.game_file:
        fam = boxes.BUILTIN_STRATEGIES[cfg.strategy][0]
        g = boxes.make_double_chsh() if fam == "double_chsh" else builtin_game(fam)
    else:
        g = _load_game(cfg)
    s = _strategy(cfg, g)
    out: dict = {"game": g.name, "strategy": s.name}
    ok = True
    if not args.no_exact:
        ev = boxes.evaluate_network(g, s)
        out["exact"] = ev.value
        out["interleaving"] = [list(x) for x in ev.interleaving]
        if args.all_interleavings:
            vals = sorted({boxes.evaluate_network(g, s, il).value for il in boxes.all_interleavings(g, s)})
            out["interleaving_values"] = vals
            ok &= len(vals) == 1
    if args.trials:
        smp = boxes.sample_network(g, s, args.trials, cfg.seed, method=args.sample_method)
        out["sample"] = smp
        if "exact" in out:
            ok &= abs(smp.estimate - float(out["exact"])) <= 4 * smp.stderr + 1e-12
    return out, ok


def cmd_surgery(cfg: RunConfig, args) -> tuple[dict, bool]:
    if args.file:
        d = json.loads(Path(args.file).read_text())
        g = game_from_dict(d["game"]) if "game" in d else _load_game(cfg)
        S = surgery.source_strategy_from_dict(g, d["strategy"])
        schedule = [(step["v"], tuple(step["resource"]), step["anchor"]) for step in d["schedule"]]
    else:
        S, schedule = surgery.toy_extended_chsh_strategy(args.k, cfg.seed)
    res = surgery.iterate_surgery(S, schedule)
    q = S.game.questions
    out = {
        "game": S.game.name,
        "schedule": [list(s) for s in schedule],
        "steps": [
            {"r_v_star": r.r_v_star, "loss_before": r.loss_before, "loss_after": r.loss_after, "ok": r.ok}
            for r in res.reports
        ],
        "initial_losses": res.initial_losses,
        "final_losses": res.final_losses,
        "bounds": {str(k): {str(b): c for b, c in v.items()} for k, v in res.bounds.items()},
        "bounds_hold": res.bounds_hold,
        "questions": [list(x.inputs) for x in q],
    }
    return out, res.bounds_hold and all(r.ok for r in res.reports)


def cmd_table(cfg: RunConfig, args) -> tuple[object, bool]:
    ks = _int_range(args.k)
    if workers() > 1 and len(ks) > 1:
        with ProcessPoolExecutor(workers()) as ex:
            rows = list(ex.map(bounds.gap_row, ks, [args.n_max] * len(ks)))
    else:
        rows = [bounds.gap_row(k, args.n_max) for k in ks]
    ok = all(r.chsh_gap > 0 and r.chshn_gap > 0 for r in rows)
    if cfg.fmt == "csv":
        return bounds.table_csv(rows), ok
    if cfg.fmt == "markdown":
        return bounds.table_markdown(rows), ok
    return {"rows": rows}, ok


def cmd_check(cfg: RunConfig, args) -> tuple[dict, bool]:
    out: dict = {}
    ok = True
    if args.box:
        makers = {
            "nonlocal": boxes.nonlocal_box,
            "selection": boxes.selection_box,
            "resource_r": boxes.resource_r,
            "broadcast": boxes.broadcast_box,
        }
        for name in args.box:
            if name not in makers:
                raise AssertionFailed(f"unknown box {name!r}; known: {sorted(makers)}")
            chk = nonsignaling.check_nonsignaling(makers[name]().table)
            out[f"box:{name}"] = {"nonsignaling": chk.ok, "violations": len(chk.violations)}
            ok &= chk.ok
    for path in args.box_file or []:
        table = boxes.table_from_dict(json.loads(Path(path).read_text()))
        chk = nonsignaling.check_nonsignaling(table)
        out[f"file:{path}"] = {
            "nonsignaling": chk.ok,
            "violations": [
                {"signaller": v.signaller, "affected": v.affected, "inputs": v.inputs,
                 "outputs": v.outputs, "probabilities": v.probabilities}
                for v in chk.violations
            ],
        }
        ok &= chk.ok
    if args.multiround:
        chk = nonsignaling.check_multiround_ns(boxes.opposite_order_table())
        out["multiround:opposite_order"] = {"nonsignaling": chk.ok, "violations": len(chk.violations)}
        ok &= chk.ok
    if cfg.game or cfg.game_file:
        g = _load_game(cfg)
        rep = validate_game(g)
        uq = check_uniqueness(g)
        out["game"] = {
            "name": g.name,
            "valid": rep.valid,
            "violations": rep.violations,
            "unique": uq.unique,
            "non_unique_cases": len(uq.counterexamples),
        }
        ok &= rep.valid
    if not out:
        raise AssertionFailed("nothing to check; pass --game, --box, --box-file or --multiround")
    return out, ok


COMMANDS = {
    "value": cmd_value,
    "lp": cmd_lp,
    "simulate": cmd_simulate,
    "surgery": cmd_surgery,
    "table": cmd_table,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--game", help=f"builtin family: {', '.join(sorted(BUILTIN_FAMILIES))}")
    common.add_argument("--game-file", help="game JSON file")
    common.add_argument("--n", help="CHSH_n parameter (lp accepts ranges like 2..5)")
    common.add_argument("--k", help="number of Charlies (table accepts ranges like 1..12)")
    common.add_argument("--m", type=int, help="number of Bobs for distributed CHSH")
    common.add_argument("--postselected", action="store_true", help="postselected teleported CHSH")
    common.add_argument("--format", dest="fmt", choices=FORMATS, default="json")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--tolerance", type=float, default=quantum.VALUE_TOL)
    common.add_argument("--output", help="write the report here instead of stdout")

    p = argparse.ArgumentParser(prog="nsgames", description="Nonlocal game values and bounds.")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("value", parents=[common], help="classical, NS and quantum values of a game")
    v.add_argument("--lp-cap", type=int, default=nonsignaling.DEFAULT_VARIABLE_CAP)
    lp = sub.add_parser("lp", parents=[common], help="(constrained) NS value by exact LP")
    lp.add_argument("--constrain", action="append", default=[], help='e.g. "P(X=0|A=0)=1"')
    lp.add_argument("--support", choices=("full", "questions"), default="full")
    lp.add_argument("--export", help="write the LP in CPLEX LP format ({n} expands in sweeps)")
    s = sub.add_parser("simulate", parents=[common], help="box networks and teleported CHSH")
    s.add_argument("--strategy", help="builtin strategy name or 'exor'")
    s.add_argument("--strategy-file", help="strategy JSON file")
    s.add_argument("--trials", type=int, default=0, help="Monte Carlo trials (0: exact only)")
    s.add_argument("--sample-method", choices=("walk", "leaves"), default="walk",
                   help="walk: query boxes one response at a time; leaves: draw whole transcripts")
    s.add_argument("--no-exact", action="store_true")
    s.add_argument("--all-interleavings", action="store_true")
    s.add_argument("--teleported", action="store_true", help="quantum teleported CHSH simulation")
    su = sub.add_parser("surgery", parents=[common], help="run a surgery schedule")
    su.add_argument("--file", help="JSON with game, strategy and schedule")
    t = sub.add_parser("table", parents=[common], help="gap table")
    t.add_argument("--n-max", type=int, default=None)
    c = sub.add_parser("check", parents=[common], help="NS, multi-round and game validation")
    c.add_argument("--box", action="append", help="nonlocal, selection, resource_r, broadcast")
    c.add_argument("--box-file", action="append", help="box JSON file to check")
    c.add_argument("--multiround", action="store_true", help="check the opposite-order two-round table")
    return p


def _config(args) -> RunConfig:
    params = {}
    if args.n is not None and args.command != "lp":
        params["n"] = int(args.n)
    if args.k is not None and args.command not in ("table", "surgery"):
        params["k"] = int(args.k)
    if args.m is not None:
        params["m"] = args.m
    if args.postselected:
        params["postselected"] = True
    if args.command == "lp" and args.n is not None:
        params["n"] = args.n
    return RunConfig(
        command=args.command,
        game=args.game,
        game_file=args.game_file,
        params=params,
        strategy=getattr(args, "strategy", None),
        strategy_file=getattr(args, "strategy_file", None),
        fmt=args.fmt,
        seed=args.seed,
        tolerance=args.tolerance,
        output=args.output,
    )


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = _config(args)
    if args.command == "table" and args.k is None:
        args.k = "1..12"
    if args.command == "surgery":
        args.k = int(args.k or 2)
    try:
        result, ok = COMMANDS[args.command](cfg, args)
    except (AssertionFailed, ValueError) as e:
        print(f"nsgames: {e}", file=sys.stderr)
        return 1
    text = result if isinstance(result, str) else emit_report(result, cfg.fmt)
    try:
        write_report(text, cfg.output)
    except OSError as e:
        print(f"nsgames: {e}", file=sys.stderr)
        return 1
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
