"""Classical, non-signaling and quantum values of CHSH and the chained games.

Run: python3 demos/chsh_values.py
"""

from nsgames import classical, nonsignaling, quantum
from nsgames.game import make_chsh, make_chsh_n
from nsgames.nonsignaling import output_constraint, solve_ns, vertex_is_deterministic

g = make_chsh()
c, witness = classical.deterministic_value(g)
ns, table = nonsignaling.ns_value(g)
q = quantum.evaluate_quantum(g, quantum.canonical_strategy(g)).overall
print(f"CHSH: classical {c}, non-signaling {ns}, quantum {q:.12f}")
print("  optimal NS table entries:", sorted(str(v) for v in set(table.entries.values())))

print("\nchained games, with and without pinning Alice's answer on input 0")
print(" n  classical  NS  NS(pinned)  deterministic  quantum")
for n in range(2, 6):
    g = make_chsh_n(n)
    c, _ = classical.deterministic_value(g)
    ns, _ = nonsignaling.ns_value(g)
    sol, poly = solve_ns(g, output_constraint(g, {0: 0}, {0: 0}, 1))
    det = vertex_is_deterministic(poly.table(sol.x))
    q = quantum.evaluate_quantum(g, quantum.canonical_strategy(g)).overall
    print(f"{n:2d}  {str(c):>9}  {str(ns):>2}  {str(sol.value):>10}  {str(det):>13}  {q:.6f}")
