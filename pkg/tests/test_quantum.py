import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsgames import bounds
from nsgames.game import (
    make_chsh,
    make_chsh_n,
    make_extended_chsh,
    make_extended_chsh_n,
    make_ghz_game,
    make_teleported_chsh,
)
from nsgames.quantum import (
    SIGMA_X,
    SIGMA_Z,
    StateVector,
    angle_observable,
    canonical_strategy,
    check_observable,
    epr_state,
    evaluate_quantum,
    ghz_state,
    outcome_distribution,
    residual_correction,
    simulate_teleported_chsh,
)

I2 = np.eye(2)


def projector_oracle(state, measurements):
    """p(bits) = <psi| (x) P_b |psi> with P_b = (I + (-1)^b M)/2 and identities elsewhere."""
    m = state.num_qubits
    qubits = [q for q, _ in measurements]
    out = np.zeros((2,) * len(measurements))
    for bits in np.ndindex(*out.shape):
        ops = [I2] * m
        for (q, M), b in zip(measurements, bits):
            ops[q] = (I2 + (-1) ** b * M) / 2
        full = ops[0]
        for op in ops[1:]:
            full = np.kron(full, op)
        out[bits] = np.vdot(state.amplitudes, full @ state.amplitudes).real
    return out


def test_chsh_quantum_value():
    g = make_chsh()
    assert abs(evaluate_quantum(g, canonical_strategy(g)).overall - math.cos(math.pi / 8) ** 2) <= 1e-12


@pytest.mark.parametrize("n", [2, 3, 4, 5, 8])
def test_chsh_n_quantum_value(n):
    g = make_chsh_n(n)
    rep = evaluate_quantum(g, canonical_strategy(g))
    assert abs(rep.overall - math.cos(math.pi / (4 * n)) ** 2) <= 1e-12
    # every question is won with the same probability
    assert max(rep.per_question) - min(rep.per_question) <= 1e-12


def test_ghz_perfect():
    g = make_ghz_game()
    assert abs(evaluate_quantum(g, canonical_strategy(g)).overall - 1) <= 1e-12


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_extended_chsh_value(k):
    g = make_extended_chsh(k)
    rep = evaluate_quantum(g, canonical_strategy(g))
    assert abs(rep.overall - bounds.quantum_lb_chsh_plus_k(k)) <= 1e-12
    assert abs(rep.by_tag(g, "game") - math.cos(math.pi / 8) ** 2) <= 1e-12


@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (4, 2), (5, 3), (6, 2)])
def test_extended_chsh_n_value(n, k):
    g = make_extended_chsh_n(n, k)
    rep = evaluate_quantum(g, canonical_strategy(g))
    assert abs(rep.overall - bounds.quantum_lb_chshn(n, k)) <= 1e-10
    assert abs(rep.by_tag(g, "consistency") - 1) <= 1e-12


def test_unsupported_family():
    with pytest.raises(ValueError):
        canonical_strategy(make_teleported_chsh())


def test_observable_checks():
    check_observable(angle_observable(0.3))
    with pytest.raises(ValueError):
        check_observable(np.array([[1, 1], [0, 1]]))
    with pytest.raises(ValueError):
        check_observable(2 * SIGMA_Z)
    with pytest.raises(ValueError):
        StateVector([1, 1])
    with pytest.raises(ValueError):
        outcome_distribution(epr_state(), [(0, SIGMA_Z), (0, SIGMA_X)])


@settings(max_examples=40, deadline=None)
@given(
    st.integers(2, 4),
    st.lists(st.floats(-1, 1, allow_nan=False), min_size=32, max_size=32),
    st.lists(st.floats(0, 2 * math.pi, allow_nan=False), min_size=4, max_size=4),
)
def test_distribution_matches_projector_oracle(m, raw, angles):
    amps = np.array(raw[: 2**m]) + 1j * np.array(raw[16: 16 + 2**m])
    if np.linalg.norm(amps) < 1e-3:
        amps[0] = 1
    amps = amps / np.linalg.norm(amps)
    state = StateVector(amps)
    meas = [(q, angle_observable(angles[q])) for q in range(m - 1)]
    got = outcome_distribution(state, meas)
    assert np.allclose(got, projector_oracle(state, meas), atol=1e-12)
    assert abs(got.sum() - 1) <= 1e-12


def test_ghz_state_correlations():
    st3 = ghz_state(3)
    d = outcome_distribution(st3, [(i, SIGMA_Z) for i in range(3)])
    assert abs(d[0, 0, 0] - 0.5) <= 1e-12 and abs(d[1, 1, 1] - 0.5) <= 1e-12


def test_teleportation():
    r = simulate_teleported_chsh()
    target = math.cos(math.pi / 8) ** 2
    assert abs(r.success_probability - 0.25) <= 1e-12
    assert abs(r.accept_given_success - target) <= 1e-12
    assert abs(r.corrected_value - target) <= 1e-12
    for which, o in r.bell_outcomes.items():
        assert abs(o["probability"] - 0.25) <= 1e-12
        assert abs(o["win"] - target) <= 1e-12
    # without the swap Alice and Bob are uncorrelated
    assert abs(r.no_swap_value - 0.5) <= 1e-12


def test_residual_corrections_are_paulis():
    for which in ("phi+", "phi-", "psi+", "psi-"):
        P = residual_correction(which)
        assert np.allclose(P @ P.conj().T, I2)
