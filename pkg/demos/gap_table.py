"""Quantum vs k-local non-signaling gaps for k = 1..12, plus a spot check by simulation.

Run: python3 demos/gap_table.py
"""

from nsgames import bounds, quantum
from nsgames.game import make_extended_chsh_n

rows = bounds.gap_table()
print(bounds.table_markdown(rows))

for n, k in ((3, 1), (4, 2), (5, 3)):
    g = make_extended_chsh_n(n, k)
    sim = quantum.evaluate_quantum(g, quantum.canonical_strategy(g)).overall
    closed = bounds.quantum_lb_chshn(n, k)
    print(f"CHSH_{n}+{k}: simulated {sim:.12f}  closed form {closed:.12f}  "
          f"NS bound {float(bounds.ns_bound_chshn(n, k)):.12f}")
