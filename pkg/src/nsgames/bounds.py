"""Closed-form quantum lower bounds, k-local non-signaling upper bounds and their gaps."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

SIN2_PI_8 = math.sin(math.pi / 8) ** 2


def ns_bound_chsh_plus_k(k: int) -> Fraction:
    """Upper bound on CHSH + k for players with k-local non-signaling resources."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return 1 - Fraction(1, 2 * (3**k + 1))


def quantum_lb_chsh_plus_k(k: int) -> float:
    if k < 0:
        raise ValueError("k must be >= 0")
    return 1 - (2 / (3**k + 1)) * SIN2_PI_8


def chsh_gap(k: int) -> float:
    return quantum_lb_chsh_plus_k(k) - float(ns_bound_chsh_plus_k(k))


def ns_bound_chshn(n: int, k: int) -> Fraction:
    _check_nk(n, k)
    return 1 - Fraction(1, 2 * (2 * n + 3**k - 2))


def quantum_lb_chshn(n: int, k: int) -> float:
    """Win probability of the canonical strategy: 1 - (1-q) n sin^2(pi/4n) / (2n-1)."""
    _check_nk(n, k)
    one_minus_q = (2 * n - 1) / (2 * n + 3**k - 2)
    return 1 - one_minus_q * (n / (2 * n - 1)) * math.sin(math.pi / (4 * n)) ** 2


def chshn_gap(n: int, k: int) -> float:
    return quantum_lb_chshn(n, k) - float(ns_bound_chshn(n, k))


def _check_nk(n: int, k: int) -> None:
    if n < 2:
        raise ValueError("n must be >= 2")
    if k < 1:
        raise ValueError("k must be >= 1")


def default_n_max(k: int) -> int:
    return 2 * 3**k + 16


def best_n(k: int, n_max: int | None = None) -> tuple[int, float]:
    """The n in [2, n_max] maximizing the CHSH_n + k gap; the smallest such n on ties."""
    if n_max is None:
        n_max = default_n_max(k)
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    n = np.arange(2, n_max + 1, dtype=float)
    denom = 2 * n + 3**k - 2
    q_val = 1 - ((2 * n - 1) / denom) * (n / (2 * n - 1)) * np.sin(np.pi / (4 * n)) ** 2
    gaps = q_val - (1 - 1 / (2 * denom))
    i = int(np.argmax(gaps))  # first maximum
    return int(n[i]), float(gaps[i])


def markov_q(k: int, p: Fraction) -> Fraction:
    """Consistency weight q balancing the Markov-chain coefficients for game weight p."""
    return 1 / (1 + 1 / ((3**k - 1) * Fraction(p)))


def verify_markov_identity(k: int, p) -> bool:
    """1/(1-q) = (3^k - 1) p / q = 1 + (3^k - 1) p, exactly."""
    p = Fraction(p)
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    q = markov_q(k, p)
    c = 3**k - 1
    return 1 / (1 - q) == c * p / q == 1 + c * p


@dataclass(frozen=True)
class GapRow:
    k: int
    chsh_gap: float
    best_n: int
    chshn_gap: float
    chsh_quantum: float
    chsh_ns_bound: Fraction
    chshn_quantum: float
    chshn_ns_bound: Fraction


def gap_row(k: int, n_max: int | None = None) -> GapRow:
    n, _ = best_n(k, n_max)
    return GapRow(
        k, chsh_gap(k), n, chshn_gap(n, k),
        quantum_lb_chsh_plus_k(k), ns_bound_chsh_plus_k(k),
        quantum_lb_chshn(n, k), ns_bound_chshn(n, k),
    )


def gap_table(ks=range(1, 13)) -> list[GapRow]:
    return [gap_row(k) for k in ks]


def sci(x: float) -> str:
    """Four significant figures in scientific notation, e.g. 5.178e-02."""
    return f"{x:.3e}"


CSV_HEADER = ("k", "chsh_gap", "best_n", "chshn_gap")


def table_csv(rows: list[GapRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([r.k, sci(r.chsh_gap), r.best_n, sci(r.chshn_gap)])
    return buf.getvalue()


def table_markdown(rows: list[GapRow]) -> str:
    head = ["k", "CHSH gap", "best n", "CHSH_n gap"]
    body = [[str(r.k), sci(r.chsh_gap), str(r.best_n), sci(r.chshn_gap)] for r in rows]
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h) for i, h in enumerate(head)]
    line = lambda cells: "| " + " | ".join(c.rjust(w) for c, w in zip(cells, widths)) + " |"
    sep = "|" + "|".join("-" * (w + 1) + ":" for w in widths) + "|"
    return "\n".join([line(head), sep] + [line(b) for b in body]) + "\n"
