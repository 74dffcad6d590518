"""Exact rational linear programming.

Two-phase primal simplex over :class:`fractions.Fraction` with Bland's
least-index rule, so degenerate polytopes (non-signaling polytopes are very
degenerate) cannot make it cycle.  Tableau rows are sparse dicts because the
constraint matrices built from non-signaling conditions are mostly zeros.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping

Row = dict  # column -> Fraction


class LPError(ArithmeticError):
    pass


class InfeasibleError(LPError):
    pass


class UnboundedError(LPError):
    pass


@dataclass
class LinearProgram:
    """maximize objective . x  subject to equalities, ``<=`` inequalities and x >= 0."""

    variables: list[Hashable]
    objective: dict = field(default_factory=dict)
    equalities: list[tuple[dict, Fraction]] = field(default_factory=list)
    inequalities: list[tuple[dict, Fraction]] = field(default_factory=list)

    def add_equality(self, coeffs: Mapping, rhs) -> None:
        self.equalities.append((_clean(coeffs), Fraction(rhs)))

    def add_inequality(self, coeffs: Mapping, rhs) -> None:
        self.inequalities.append((_clean(coeffs), Fraction(rhs)))

    def objective_value(self, x: Mapping) -> Fraction:
        return sum((c * x.get(v, 0) for v, c in self.objective.items()), Fraction(0))

    def residuals(self, x: Mapping) -> tuple[list[Fraction], list[Fraction]]:
        """Equality residuals (should be 0) and inequality slacks (should be >= 0)."""
        eq = [sum((c * x.get(v, 0) for v, c in row.items()), Fraction(0)) - rhs
              for row, rhs in self.equalities]
        ineq = [rhs - sum((c * x.get(v, 0) for v, c in row.items()), Fraction(0))
                for row, rhs in self.inequalities]
        return eq, ineq

    def is_feasible_point(self, x: Mapping) -> bool:
        eq, ineq = self.residuals(x)
        return (all(r == 0 for r in eq) and all(s >= 0 for s in ineq)
                and all(x.get(v, 0) >= 0 for v in self.variables))


def _clean(coeffs: Mapping) -> dict:
    return {k: Fraction(v) for k, v in coeffs.items() if v != 0}


@dataclass
class LPSolution:
    value: Fraction
    x: dict
    pivots: int


def drop_redundant_equalities(rows: list[tuple[dict, Fraction]]) -> list[tuple[dict, Fraction]]:
    """Keep a maximal linearly independent subset of equality rows (in order).

    Raises :class:`InfeasibleError` when a dependent row has an inconsistent
    right-hand side.
    """
    kept = []
    basis: list[tuple[Hashable, dict, Fraction]] = []  # (pivot column, reduced row, rhs)
    for row, rhs in rows:
        r = dict(row)
        b = Fraction(rhs)
        for col, brow, brhs in basis:
            f = r.get(col)
            if f:
                for c, v in brow.items():
                    nv = r.get(c, 0) - f * v
                    if nv:
                        r[c] = nv
                    else:
                        r.pop(c, None)
                b -= f * brhs
        if not r:
            if b != 0:
                raise InfeasibleError("inconsistent equality constraints")
            continue
        col = next(iter(r))
        piv = r[col]
        r = {c: v / piv for c, v in r.items()}
        b /= piv
        for i, (c0, brow, brhs) in enumerate(basis):
            f = brow.get(col)
            if f:
                for c, v in r.items():
                    nv = brow.get(c, 0) - f * v
                    if nv:
                        brow[c] = nv
                    else:
                        brow.pop(c, None)
                basis[i] = (c0, brow, brhs - f * b)
        basis.append((col, r, b))
        kept.append((row, rhs))
    return kept


def solve_lp(lp: LinearProgram, *, reduce: bool = True) -> LPSolution:
    """Exact optimum at a vertex of the feasible polytope."""
    index = {v: j for j, v in enumerate(lp.variables)}
    n = len(lp.variables)
    eqs = drop_redundant_equalities(lp.equalities) if reduce else list(lp.equalities)

    rows: list[Row] = []
    rhs: list[Fraction] = []
    for coeffs, b in eqs:
        rows.append({index[v]: c for v, c in coeffs.items()})
        rhs.append(Fraction(b))
    for s, (coeffs, b) in enumerate(lp.inequalities):
        r = {index[v]: c for v, c in coeffs.items()}
        r[n + s] = Fraction(1)
        rows.append(r)
        rhs.append(Fraction(b))
    width = n + len(lp.inequalities)
    for i in range(len(rows)):
        if rhs[i] < 0:
            rows[i] = {c: -v for c, v in rows[i].items()}
            rhs[i] = -rhs[i]
    m = len(rows)
    # phase 1: one artificial per row
    art0 = width
    for i in range(m):
        rows[i][art0 + i] = Fraction(1)
    basis = [art0 + i for i in range(m)]
    tab = _Tableau(rows, rhs, basis)
    cost1 = {art0 + i: Fraction(-1) for i in range(m)}
    tab.set_objective(cost1)
    tab.run(allowed=lambda j: True)
    if tab.value() < 0:
        raise InfeasibleError("linear program is infeasible")
    # drive remaining artificials out of the basis
    for i in range(len(tab.rows)):
        if tab.basis[i] >= art0:
            col = next((c for c in sorted(tab.rows[i]) if c < art0), None)
            if col is not None:
                tab.pivot(i, col)
    keep = [i for i in range(len(tab.rows)) if tab.basis[i] < art0]
    tab.rows = [{c: v for c, v in tab.rows[i].items() if c < art0} for i in keep]
    tab.rhs = [tab.rhs[i] for i in keep]
    tab.basis = [tab.basis[i] for i in keep]
    # phase 2
    cost2 = {index[v]: Fraction(c) for v, c in lp.objective.items() if c}
    tab.set_objective(cost2)
    tab.run(allowed=lambda j: j < art0)
    xs = [Fraction(0)] * width
    for i, bcol in enumerate(tab.basis):
        xs[bcol] = tab.rhs[i]
    x = {v: xs[j] for v, j in index.items()}
    value = lp.objective_value(x)
    return LPSolution(value, x, tab.pivots)


class _Tableau:
    def __init__(self, rows, rhs, basis):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.pivots = 0

    def set_objective(self, cost: dict) -> None:
        self.cost = cost
        d = {c: v for c, v in cost.items()}
        for i, bcol in enumerate(self.basis):
            cb = cost.get(bcol, 0)
            if cb:
                for c, v in self.rows[i].items():
                    nv = d.get(c, 0) - cb * v
                    if nv:
                        d[c] = nv
                    else:
                        d.pop(c, None)
        for bcol in self.basis:
            d.pop(bcol, None)
        self.reduced = d

    def value(self) -> Fraction:
        return sum((self.cost.get(b, 0) * self.rhs[i] for i, b in enumerate(self.basis)), Fraction(0))

    def pivot(self, r: int, e: int) -> None:
        self.pivots += 1
        prow = self.rows[r]
        piv = prow[e]
        if piv != 1:
            prow = {c: v / piv for c, v in prow.items()}
            self.rows[r] = prow
            self.rhs[r] /= piv
        pb = self.rhs[r]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row.get(e)
            if not f:
                continue
            for c, v in prow.items():
                nv = row.get(c, 0) - f * v
                if nv:
                    row[c] = nv
                else:
                    row.pop(c, None)
            self.rhs[i] -= f * pb
        f = self.reduced.get(e)
        if f:
            d = self.reduced
            for c, v in prow.items():
                nv = d.get(c, 0) - f * v
                if nv:
                    d[c] = nv
                else:
                    d.pop(c, None)
        self.basis[r] = e

    def run(self, allowed) -> None:
        while True:
            entering = min((c for c, v in self.reduced.items() if v > 0 and allowed(c)), default=None)
            if entering is None:
                return
            best = None
            for i, row in enumerate(self.rows):
                a = row.get(entering)
                if a is not None and a > 0:
                    ratio = self.rhs[i] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                raise UnboundedError("linear program is unbounded")
            self.pivot(best[1], entering)


def _fmt(c: Fraction) -> str:
    return repr(float(c))


def to_cplex_lp(lp: LinearProgram) -> str:
    """CPLEX-LP text for cross-checking in external solvers.

    Coefficients are written as decimals, which loses exactness; the header says so.
    """
    names = {v: f"x{j}" for j, v in enumerate(lp.variables)}

    def expr(coeffs: Mapping) -> str:
        if not coeffs:
            return "0 " + names[lp.variables[0]] if lp.variables else "0"
        parts = []
        for v, c in coeffs.items():
            sign = "-" if c < 0 else "+"
            parts.append(f"{sign} {_fmt(abs(c))} {names[v]}")
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else s

    lines = [
        "\\ nsgames export (lossy: exact rational coefficients rendered as decimals)",
    ]
    for v, name in names.items():
        lines.append(f"\\ {name} = {v!r}")
    lines += ["Maximize", f" obj: {expr(lp.objective)}", "Subject To"]
    for i, (row, b) in enumerate(lp.equalities):
        lines.append(f" e{i}: {expr(row)} = {_fmt(b)}")
    for i, (row, b) in enumerate(lp.inequalities):
        lines.append(f" u{i}: {expr(row)} <= {_fmt(b)}")
    lines.append("Bounds")
    for name in names.values():
        lines.append(f" {name} >= 0")
    lines.append("End")
    return "\n".join(lines) + "\n"
