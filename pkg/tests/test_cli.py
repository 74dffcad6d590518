import json
from fractions import Fraction

import pytest

from nsgames import bounds
from nsgames.cli import parse_constraint, run
from nsgames.game import make_chsh, make_chsh_n, save_game
from nsgames.report import emit_report, plain


def run_json(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip().startswith(("{", "[")) else out


def test_value_chsh(capsys):
    code, d = run_json(capsys, "value", "--game", "chsh")
    assert code == 0
    assert d["classical"] == "3/4"
    assert d["ns"] == "1"
    assert abs(d["quantum"] - 0.853553390593274) <= 1e-12


def test_value_skips_large_lp(capsys):
    code, d = run_json(capsys, "value", "--game", "distributed_chsh")
    assert code == 0
    assert d["ns"] is None and "ns" in d["skipped"]


def test_lp_constrained(capsys, tmp_path):
    code, d = run_json(capsys, "lp", "--game", "chsh_n", "--n", "3", "--constrain", "P(X=0|A=0)=1")
    assert code == 0
    assert d["value"] == "5/6"
    assert d["deterministic_vertex"]
    export = tmp_path / "chsh_{n}.lp"
    code, d = run_json(capsys, "lp", "--game", "chsh_n", "--n", "2..4", "--constrain", "P(X=0|A=0)=1",
                       "--export", str(export))
    assert code == 0
    assert [r["value"] for r in d["rows"]] == ["3/4", "5/6", "7/8"]
    assert (tmp_path / "chsh_3.lp").read_text().startswith("\\")


def test_lp_infeasible_is_failure(capsys):
    code, d = run_json(capsys, "lp", "--game", "chsh", "--constrain", "P(X=0|A=0)=1",
                       "--constrain", "P(X=1|A=0)=1")
    assert code == 1
    assert "infeasible" in d


def test_lp_game_file(capsys, tmp_path):
    path = tmp_path / "g.json"
    save_game(make_chsh(), path)
    code, d = run_json(capsys, "lp", "--game-file", str(path))
    assert code == 0 and d["value"] == "1"


def test_table(capsys):
    assert run(["table", "--k", "1..12", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "k,chsh_gap,best_n,chshn_gap"
    assert len(lines) == 13
    assert lines[12] == "12,3.897e-07,574,9.368e-07"
    assert run(["table", "--format", "markdown"]) == 0
    assert capsys.readouterr().out.count("\n") == 14


def test_table_is_byte_identical(capsys):
    run(["table", "--k", "1..5"])
    a = capsys.readouterr().out
    run(["table", "--k", "1..5"])
    assert capsys.readouterr().out == a


def test_simulate(capsys):
    code, d = run_json(capsys, "simulate", "--teleported")
    assert code == 0
    assert abs(d["teleported_chsh"]["success_probability"] - 0.25) <= 1e-12
    code, d = run_json(capsys, "simulate", "--strategy", "ghz_box", "--trials", "2000", "--all-interleavings")
    assert code == 0
    assert d["exact"] == "1" and d["interleaving_values"] == ["1"]
    assert d["sample"]["estimate"] == 1.0
    code, d = run_json(capsys, "simulate", "--game", "ghz", "--strategy", "exor")
    assert code == 0 and d["exact"] == "1"


def test_simulate_seed_reproducible(capsys):
    argv = ["simulate", "--strategy", "opposite_order", "--trials", "500", "--seed", "4"]
    run(argv)
    a = capsys.readouterr().out
    run(argv)
    assert capsys.readouterr().out == a


def test_surgery(capsys, tmp_path):
    code, d = run_json(capsys, "surgery", "--k", "2")
    assert code == 0
    assert d["bounds_hold"]
    from nsgames import surgery
    S, schedule = surgery.toy_extended_chsh_strategy(1, seed=3)
    payload = {
        "strategy": surgery.source_strategy_to_dict(S),
        "schedule": [{"v": v, "resource": list(R), "anchor": Q} for v, R, Q in schedule],
    }
    path = tmp_path / "s.json"
    path.write_text(json.dumps(payload))
    code, d = run_json(capsys, "surgery", "--game", "chsh_plus_k", "--k", "1", "--file", str(path))
    assert code == 0 and d["bounds_hold"]


def test_check(capsys, tmp_path):
    code, d = run_json(capsys, "check", "--box", "nonlocal", "--box", "selection", "--box", "resource_r",
                       "--multiround", "--game", "chsh_plus_k", "--k", "2")
    assert code == 0
    assert all(v["nonsignaling"] for k, v in d.items() if k != "game")
    assert d["game"]["unique"]
    bad = {
        "name": "planted", "ports": ["A", "B"], "inputs": [[0, 1], [0, 1]], "outputs": [[0, 1], [0, 1]],
        "entries": [[[a, b], [0, a], "1"] for a in (0, 1) for b in (0, 1)],
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, d = run_json(capsys, "check", "--box-file", str(path))
    assert code == 1
    viol = d[f"file:{path}"]["violations"]
    assert {v["signaller"] for v in viol} == {"A"}
    assert {tuple(v["affected"]) for v in viol} == {("B",)}


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        run(["bogus"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        run(["value", "--no-such-flag"])
    assert e.value.code == 2
    assert run(["value"]) == 1
    assert run(["check"]) == 1


def test_output_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run(["value", "--game", "chsh", "--output", str(out)]) == 0
    assert json.loads(out.read_text())["classical"] == "3/4"
    assert run(["value", "--game", "chsh", "--output", str(tmp_path / "missing" / "r.json")]) == 1


def test_parse_constraint():
    g = make_chsh_n(3)
    rows = parse_constraint("P(X=0|A=0)=1", g)
    assert len(rows) == 3
    rows = parse_constraint("P(X=0,Y=1|A=0,B=1)=1/2", g)
    assert len(rows) == 1 and rows[0][1] == Fraction(1, 2)
    for bad in ("X=0", "P(Q=0|A=0)=1", "P(A=0|X=0)=1", "P(Z3=0|A=0)=1"):
        with pytest.raises(ValueError):
            parse_constraint(bad, g)


def test_report_formats():
    assert plain(Fraction(3, 4)) == "3/4"
    assert plain(Fraction(2)) == "2"
    assert plain(0.1 + 0.2) == 0.3
    rows = bounds.gap_table(range(1, 3))
    text = emit_report(rows, "json")
    assert json.loads(text)[0]["chsh_ns_bound"] == "7/8"
    assert emit_report({"b": 1, "a": Fraction(1, 3)}, "json") == '{\n  "a": "1/3",\n  "b": 1\n}\n'
    csv_text = emit_report({"rows": [{"k": 1, "v": Fraction(1, 2)}]}, "csv")
    assert csv_text == "k,v\n1,1/2\n"
    md = emit_report([{"k": 1, "value": "x"}], "markdown").splitlines()
    assert md[1] == "|--:|------:|"
    with pytest.raises(ValueError):
        emit_report({}, "xml")


def test_game_value_report_round_trip():
    from nsgames.game import make_ghz_game
    from nsgames.values import GameValueReport, game_values

    for g in (make_chsh(), make_ghz_game()):
        rep = game_values(g)
        assert rep.consistent()
        back = GameValueReport.from_json(rep.to_json())
        # floats are written at 15 significant digits; everything else is exact
        assert abs(back.quantum - rep.quantum) <= 1e-14
        back.quantum = rep.quantum
        assert back == rep
        assert GameValueReport.from_json(back.to_json()).to_json() == rep.to_json()
    bad = GameValueReport("x", Fraction(1), Fraction(3, 4), None)
    assert not bad.consistent()
