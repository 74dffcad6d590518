"""Dense state-vector evaluation of explicit quantum strategies.

Qubit 0 is the most significant bit of the amplitude index.  Every measurement
is a two-outcome observable; the +1 eigenspace reports bit 0 and the -1
eigenspace bit 1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .game import NOT_ASKED, PAIRS, Game, make_teleported_chsh

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

IDENTITY_TOL = 1e-12
VALUE_TOL = 1e-10


class StateVector:
    def __init__(self, amplitudes, *, tol: float = IDENTITY_TOL):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        m = int(round(math.log2(amps.size)))
        if 2**m != amps.size:
            raise ValueError("state length must be a power of two")
        if abs(np.vdot(amps, amps).real - 1) > tol:
            raise ValueError("state is not normalized")
        self.amplitudes = amps
        self.amplitudes.setflags(write=False)
        self.num_qubits = m

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def permute(self, order) -> "StateVector":
        """New state whose qubit ``i`` is this state's qubit ``order[i]``."""
        return StateVector(np.transpose(self.tensor(), order).reshape(-1))

    def __matmul__(self, other: "StateVector") -> "StateVector":
        return StateVector(np.kron(self.amplitudes, other.amplitudes))


def ghz_state(m: int) -> StateVector:
    if m < 1:
        raise ValueError("need at least one qubit")
    amps = np.zeros(2**m, dtype=complex)
    amps[0] = amps[-1] = 1 / math.sqrt(2)
    return StateVector(amps)


def epr_state() -> StateVector:
    return ghz_state(2)


def angle_observable(theta: float) -> np.ndarray:
    """cos(theta) Z + sin(theta) X."""
    return math.cos(theta) * SIGMA_Z + math.sin(theta) * SIGMA_X


def check_observable(M: np.ndarray, tol: float = IDENTITY_TOL) -> None:
    M = np.asarray(M)
    if M.shape != (2, 2):
        raise ValueError("observables act on a single qubit")
    if not np.allclose(M, M.conj().T, atol=tol, rtol=0):
        raise ValueError("observable is not Hermitian")
    if not np.allclose(M @ M, IDENTITY, atol=tol, rtol=0):
        raise ValueError("observable does not square to the identity")


def _eigenbasis(M: np.ndarray) -> np.ndarray:
    """Unitary whose first column spans the +1 eigenspace and second the -1 eigenspace."""
    vals, vecs = np.linalg.eigh(M)
    order = np.argsort(-vals)
    return vecs[:, order]


def outcome_distribution(state: StateVector, measurements) -> np.ndarray:
    """Joint outcome probabilities for ``[(qubit, observable), ...]`` on distinct qubits.

    Result has shape ``(2,) * len(measurements)``; unmeasured qubits are traced out.
    """
    psi = state.tensor()
    qubits = [q for q, _ in measurements]
    if len(set(qubits)) != len(qubits):
        raise ValueError("each qubit can be measured once")
    for q, M in measurements:
        V = _eigenbasis(M)
        psi = np.moveaxis(np.tensordot(V.conj().T, psi, axes=([1], [q])), 0, q)
    probs = np.abs(psi) ** 2
    rest = tuple(i for i in range(state.num_qubits) if i not in qubits)
    probs = probs.sum(axis=rest) if rest else probs
    kept = [i for i in range(state.num_qubits) if i in qubits]
    return np.transpose(probs, [kept.index(q) for q in qubits])


@dataclass
class QuantumStrategy:
    state: StateVector
    qubits: dict  # player -> qubit index
    observables: dict  # (player, input) -> 2x2 observable
    corrections: dict = field(default_factory=dict)  # (player, input) -> unitary applied first

    def effective_observable(self, player: str, inp) -> np.ndarray:
        try:
            M = self.observables[(player, inp)]
        except KeyError:
            raise ValueError(f"missing observable for {player} on input {inp!r}") from None
        U = self.corrections.get((player, inp))
        if U is not None:
            M = U.conj().T @ M @ U
        return M

    def permuted(self, order) -> "QuantumStrategy":
        """Same strategy on ``state.permute(order)`` with qubit labels moved along."""
        inverse = {old: new for new, old in enumerate(order)}
        return QuantumStrategy(
            self.state.permute(order),
            {p: inverse[q] for p, q in self.qubits.items()},
            dict(self.observables),
            dict(self.corrections),
        )


@dataclass
class QuantumReport:
    per_question: list[float]
    distributions: list[dict]
    overall: float

    def by_tag(self, game: Game, tag: str, where=None) -> float:
        """Conditional win probability over questions carrying ``tag`` (optionally filtered)."""
        num = den = 0.0
        for qi, q in enumerate(game.questions):
            if q.tag == tag and (where is None or where(q)):
                num += float(q.prob) * self.per_question[qi]
                den += float(q.prob)
        return num / den


def question_distribution(game: Game, strategy: QuantumStrategy, qi: int) -> dict:
    """Answer-tuple distribution on question ``qi``; unasked players answer their first symbol."""
    q = game.questions[qi]
    asked = q.asked()
    meas = []
    for i in asked:
        M = strategy.effective_observable(game.players[i], q.inputs[i])
        check_observable(M)
        meas.append((strategy.qubits[game.players[i]], M))
    probs = outcome_distribution(strategy.state, meas)
    dist = {}
    for bits in itertools.product((0, 1), repeat=len(asked)):
        ans = [game.default_answer(i) for i in range(game.num_players)]
        for i, b in zip(asked, bits):
            ans[i] = game.output_alphabet[i][b]
        dist[tuple(ans)] = dist.get(tuple(ans), 0.0) + float(probs[bits])
    return dist


def evaluate_quantum(game: Game, strategy: QuantumStrategy) -> QuantumReport:
    per_q, dists = [], []
    for qi in range(len(game.questions)):
        dist = question_distribution(game, strategy, qi)
        if abs(sum(dist.values()) - 1) > IDENTITY_TOL:
            raise ArithmeticError(f"question {qi}: outcome distribution does not sum to one")
        dists.append(dist)
        per_q.append(float(sum(p for ans, p in dist.items() if game.accepts(qi, ans))))
    overall = sum(float(q.prob) * w for q, w in zip(game.questions, per_q))
    return QuantumReport(per_q, dists, overall)


# --- the explicit strategies ---------------------------------------------------------


def chsh_observables(player_alice: str = "Alice", player_bob: str = "Bob") -> dict:
    s = 1 / math.sqrt(2)
    return {
        (player_alice, 0): SIGMA_Z,
        (player_alice, 1): SIGMA_X,
        (player_bob, 0): s * (SIGMA_Z + SIGMA_X),
        (player_bob, 1): s * (SIGMA_Z - SIGMA_X),
    }


def chsh_n_alice_angle(a: int, n: int) -> float:
    return -math.pi / n if a == n - 1 else a * math.pi / n


def chsh_n_bob_angle(b: int, n: int) -> float:
    return (b - 0.5) * math.pi / n


def canonical_strategy(game: Game) -> QuantumStrategy:
    """The explicit optimal-or-near-optimal strategy for each supported family."""
    fam = game.family
    md = game.metadata
    players = game.players
    qubits = {p: i for i, p in enumerate(players)}
    if fam == "chsh":
        return QuantumStrategy(epr_state(), qubits, chsh_observables())
    if fam == "chsh_n":
        n = int(md["n"])
        obs = {("Alice", a): angle_observable(chsh_n_alice_angle(a, n)) for a in range(n)}
        obs.update({("Bob", b): angle_observable(chsh_n_bob_angle(b, n)) for b in range(n)})
        return QuantumStrategy(epr_state(), qubits, obs)
    if fam == "chsh_plus_k":
        k = int(md["k"])
        obs = chsh_observables()
        for c in players[2:]:
            obs[(c, 0)] = SIGMA_Z
            obs[(c, 1)] = SIGMA_X
        return QuantumStrategy(ghz_state(k + 2), qubits, obs)
    if fam == "chsh_n_plus_k":
        n, k = int(md["n"]), int(md["k"])
        obs, corr = {}, {}
        for a in range(-n + 1, n):
            obs[("Alice", a)] = angle_observable(chsh_n_alice_angle(abs(a), n))
            if a < 0:
                corr[("Alice", a)] = SIGMA_Z
        obs.update({("Bob", b): angle_observable(chsh_n_bob_angle(b, n)) for b in range(n)})
        for c in players[2:]:
            obs[(c, 0)] = SIGMA_Z
            obs[(c, 1)] = SIGMA_X
        return QuantumStrategy(ghz_state(k + 2), qubits, obs, corr)
    if fam == "ghz":
        obs = {}
        for p in players:
            obs[(p, 0)] = SIGMA_Y
            obs[(p, 1)] = -SIGMA_X
        return QuantumStrategy(ghz_state(3), qubits, obs)
    raise ValueError(f"no canonical quantum strategy for family {fam!r}")


# --- entanglement swapping ------------------------------------------------------------

_S = 1 / math.sqrt(2)
BELL_STATES = {
    "phi+": np.array([_S, 0, 0, _S], dtype=complex),
    "phi-": np.array([_S, 0, 0, -_S], dtype=complex),
    "psi+": np.array([0, _S, _S, 0], dtype=complex),
    "psi-": np.array([0, _S, -_S, 0], dtype=complex),
}
# Bell outcome -> (Z1, Z2) = (phase flip, bit flip) on Alice's side of the swapped pair
BELL_CORRECTIONS = {"phi+": (0, 0), "phi-": (1, 0), "psi+": (0, 1), "psi-": (1, 1)}


def bell_project(state: StateVector, q1: int, q2: int, which: str):
    """Project qubits ``q1, q2`` onto a Bell state.

    Returns ``(probability, post_state)`` where the post-measurement state lives
    on the remaining qubits in their original order.
    """
    psi = np.moveaxis(state.tensor(), (q1, q2), (0, 1))
    bell = BELL_STATES[which].reshape(2, 2)
    rest = np.tensordot(bell.conj(), psi, axes=([0, 1], [0, 1]))
    prob = float(np.vdot(rest, rest).real)
    if prob == 0:
        return 0.0, None
    return prob, StateVector(rest.reshape(-1) / math.sqrt(prob))


def _chsh_win(dist: np.ndarray, a: int, b: int) -> float:
    return sum(dist[x, y] for x in (0, 1) for y in (0, 1) if x ^ y == a * b)


@dataclass
class TeleportedReport:
    success_probability: float
    accept_given_success: float
    corrected_value: float
    no_swap_value: float
    bell_outcomes: dict


def simulate_teleported_chsh() -> TeleportedReport:
    """Entanglement swapping followed by the CHSH strategy on the swapped pair.

    Qubits are ordered (Alice, Charlie_A, Charlie_B, Bob); Alice-Charlie and
    Charlie-Bob each start in an EPR pair.  Alice and Bob use the CHSH
    observables.  Three numbers come out: the postselected pair
    (Pr[success], Pr[accept | success]) with success on the trivial Bell
    outcome, the corrected value over all four Bell outcomes scored by the
    teleported-CHSH predicate, and the value when Charlie skips the Bell
    measurement and always reports (0, 0).
    """
    state = epr_state() @ epr_state()
    obs = chsh_observables()
    game = make_teleported_chsh(postselected=False)
    outcomes = {}
    corrected = 0.0
    for which, z in BELL_CORRECTIONS.items():
        prob, post = bell_project(state, 1, 2, which)
        win = 0.0
        for qi, q in enumerate(game.questions):
            a, b, _ = q.inputs
            dist = outcome_distribution(post, [(0, obs[("Alice", a)]), (1, obs[("Bob", b)])])
            win += float(q.prob) * float(sum(
                dist[x, y] for x in (0, 1) for y in (0, 1) if game.accepts(qi, (x, y, z))
            ))
        outcomes[which] = {"probability": prob, "correction": z, "win": win}
        corrected += prob * win
    success = outcomes["phi+"]["probability"]
    _, post = bell_project(state, 1, 2, "phi+")
    accept = float(sum(
        0.25 * _chsh_win(outcome_distribution(post, [(0, obs[("Alice", a)]), (1, obs[("Bob", b)])]), a, b)
        for a in (0, 1)
        for b in (0, 1)
    ))
    no_swap = 0.0
    for qi, q in enumerate(game.questions):
        a, b, _ = q.inputs
        dist = outcome_distribution(state, [(0, obs[("Alice", a)]), (3, obs[("Bob", b)])])
        no_swap += float(q.prob) * float(sum(
            dist[x, y] for x in (0, 1) for y in (0, 1) if game.accepts(qi, (x, y, PAIRS[0]))
        ))
    return TeleportedReport(success, accept, corrected, no_swap, outcomes)


def residual_correction(which: str) -> np.ndarray:
    """Pauli P with post-swap state equal to (P x I)|phi+> up to phase."""
    z1, z2 = BELL_CORRECTIONS[which]
    return np.linalg.matrix_power(SIGMA_X, z2) @ np.linalg.matrix_power(SIGMA_Z, z1)
