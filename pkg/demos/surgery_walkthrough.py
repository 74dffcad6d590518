"""Pinning a player's resource to a fixed value and tracking how losses grow.

Run: python3 demos/surgery_walkthrough.py
"""

import random

from nsgames import surgery

rng = random.Random(1)
worst = 0
for _ in range(200):
    S = surgery.random_instance(rng)
    _, rep = surgery.fix_randomness(S)
    eps = rep.loss_before[S.Q]
    for q2 in S.affected_questions():
        if eps:
            worst = max(worst, (rep.loss_after[q2] - rep.loss_before[q2]) / (2 * eps))
    assert rep.ok
print(f"200 random instances: all bounds hold; largest (eps'_Q' - eps_Q') / (2 eps_Q) = {worst}")

for N in (2, 4, 8):
    inst = surgery.near_tight_instance(N)
    _, rep = surgery.fix_randomness(inst)
    Q, Qp = surgery._anchor_and_followup(inst.game, 0)
    print(f"near-tight family N={N}: ratio {surgery.surgery_ratio(rep, Q, Qp)}")

S, schedule = surgery.toy_extended_chsh_strategy(2, seed=0)
res = surgery.iterate_surgery(S, schedule)
g = S.game
print("\nCHSH+2, pinning Alice's resources one consistency question at a time")
for q, b in sorted(res.bounds.items()):
    terms = " + ".join(f"{c}*eps{j}" for j, c in sorted(b.items()))
    print(f"  question {g.questions[q].inputs} ({g.questions[q].tag}): "
          f"{res.final_losses[q]} <= {terms} = {res.bound_value(q)}")
print("all bounds hold:", res.bounds_hold)
