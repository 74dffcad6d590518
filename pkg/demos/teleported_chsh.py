"""Entanglement swapping followed by CHSH.

Run: python3 demos/teleported_chsh.py
"""

from nsgames.quantum import simulate_teleported_chsh

r = simulate_teleported_chsh()
for name, o in r.bell_outcomes.items():
    print(f"{name}: probability {o['probability']:.4f}, correction {o['correction']}, win {o['win']:.6f}")
print(f"postselected: Pr[success] = {r.success_probability:.6f}, "
      f"Pr[accept | success] = {r.accept_given_success:.6f}")
print(f"with reported corrections: {r.corrected_value:.6f}")
print(f"if Charlie skips the Bell measurement: {r.no_swap_value:.6f}")
