"""Non-signaling boxes, wirings of boxes into player strategies, and their exact evaluation.

A box is a validated non-signaling :class:`ConditionalTable` whose parties are
*ports*.  A :class:`NetworkStrategy` assigns every port to a game player and
gives each player a :class:`WiringProgram`: a list of queries (box, port,
input function) followed by an answer function.  Input functions see the
player's game input and every output received so far, so wirings can be
adaptive.

When only some ports of a box have been queried, the box answers from the
marginal on those ports, which is well defined because the table is
non-signaling.  Exact evaluation walks every transcript under a chosen global
order of queries.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .game import (
    BITS,
    NOT_ASKED,
    PAIRS,
    Game,
    Question,
    _xor,
    decode_symbol,
    encode_symbol,
    format_fraction,
    parse_fraction,
    tabulate,
)
from .nonsignaling import ConditionalTable, MultiRoundTable, check_nonsignaling

DEFAULT_BRANCH_CAP = 10**6
DEFAULT_BLOCK_SIZE = 10_000


class NotNonSignalingError(ValueError):
    pass


class InterleavingError(ValueError):
    pass


class BranchLimitExceeded(RuntimeError):
    pass


class NotExorError(ValueError):
    pass


# --- boxes ---------------------------------------------------------------------------


@dataclass
class NSBox:
    name: str
    table: ConditionalTable
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        check = check_nonsignaling(self.table)
        if not check.ok:
            v = check.violations[0]
            raise NotNonSignalingError(
                f"box {self.name!r} signals from {v.signaller} to {v.affected}"
            )

    @property
    def ports(self) -> tuple[str, ...]:
        return self.table.parties

    def marginal(self, assigned: Mapping[int, tuple]) -> Fraction:
        """Probability that the ports in ``assigned`` (port -> (input, output)) see those outputs."""
        key = tuple(sorted(assigned.items(), key=lambda kv: kv[0]))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        t = self.table
        full = next(
            (a for a in t.support if all(a[i] == inp for i, (inp, _) in assigned.items())),
            None,
        )
        if full is None:
            raise ValueError(f"box {self.name!r} has no input row matching {assigned!r}")
        total = Fraction(0)
        for x in t.output_space():
            if all(x[i] == out for i, (_, out) in assigned.items()):
                total += t.p(full, x)
        self._cache[key] = total
        return total

    def response(self, history: Mapping[int, tuple], port: int, inp) -> list[tuple[Any, Fraction]]:
        """Output distribution for ``port`` queried with ``inp`` after ``history``."""
        key = ("response", tuple(sorted(history.items(), key=lambda kv: kv[0])), port, inp)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        self._cache[key] = out = self._response(history, port, inp)
        return out

    def _response(self, history, port, inp):
        base = self.marginal(history)
        alph = self.table.outputs[port]
        if base == 0:
            return [(x, Fraction(1, len(alph))) for x in alph]
        out = []
        for x in alph:
            h = dict(history)
            h[port] = (inp, x)
            p = self.marginal(h) / base
            if p:
                out.append((x, p))
        return out


def nonlocal_box(ports: tuple[str, str] = ("A", "B"), name: str = "nonlocal") -> NSBox:
    """X xor Y = A B, each consistent pair with probability 1/2."""
    t = ConditionalTable.from_function(
        ports, (BITS, BITS), (BITS, BITS),
        lambda a, x: Fraction(1, 2) if x[0] ^ x[1] == a[0] * a[1] else 0,
    )
    return NSBox(name, t)


def selection_box(num_inputs: int = 2, ports: tuple[str, str] = ("A", "C"), name: str = "selection") -> NSBox:
    """Alice inputs bits (X_1..X_m), Charlie inputs J; Alice gets a uniform X and
    Charlie gets the pair (Z1, Z2) with Z1 = Z2 = X xor X_J."""
    m = num_inputs
    alice_in = tuple(itertools.product(BITS, repeat=m))
    charlie_in = tuple(range(1, m + 1))
    charlie_out = PAIRS

    def prob(a, x):
        bits, j = a
        xa, zs = x
        want = xa ^ bits[j - 1]
        return Fraction(1, 2) if all(z == want for z in zs) else 0

    t = ConditionalTable.from_function(ports, (alice_in, charlie_in), (BITS, charlie_out), prob)
    return NSBox(name, t)


YES, NO = "yes", "no"


def resource_r(ports: tuple[str, str, str] = ("A", "C", "B"), name: str = "R") -> NSBox:
    """Three-port box (Alice, Charlie, Bob).

    On ``yes`` it behaves like teleported CHSH: X and (Z1, Z2) uniform and
    Y = X xor A Z1 xor (1-A) Z2 xor A B.  On ``no`` Alice and Charlie get one
    shared uniform bit X = Z1 = Z2 and Bob an independent uniform bit.
    """
    def prob(a, x):
        aa, c, b = a
        xa, (z1, z2), y = x
        if c == YES:
            return Fraction(1, 8) if y == xa ^ (aa * z1) ^ ((1 - aa) * z2) ^ (aa * b) else 0
        return Fraction(1, 4) if xa == z1 == z2 else 0

    t = ConditionalTable.from_function(ports, (BITS, (YES, NO), BITS), (BITS, PAIRS, BITS), prob)
    return NSBox(name, t)


def broadcast_box(ports: tuple[str, str] = ("A", "B"), name: str = "broadcast") -> NSBox:
    """No inputs; both ports receive the same uniform bit."""
    t = ConditionalTable.from_function(
        ports, ((0,), (0,)), (BITS, BITS),
        lambda a, x: Fraction(1, 2) if x[0] == x[1] else 0,
    )
    return NSBox(name, t)


def product_box(p_a: Callable, p_b: Callable, ports=("A", "B"), inputs=(BITS, BITS),
                outputs=(BITS, BITS), name: str = "product") -> NSBox:
    t = ConditionalTable.from_function(
        ports, inputs, outputs, lambda a, x: Fraction(p_a(a[0], x[0])) * Fraction(p_b(a[1], x[1]))
    )
    return NSBox(name, t)


# --- factorizations --------------------------------------------------------------------


@dataclass(frozen=True)
class Factorization:
    """p(x, y | a, b) = first(x | a) * second(y | a, b, x) for ``left``; mirrored for ``right``.

    ``first`` maps (own input, own output) and ``second`` maps
    ((a, b), first output, second output) to probabilities.
    """

    direction: str
    first: dict
    second: dict
    table: ConditionalTable

    def reconstruct(self) -> dict:
        out = {}
        for a in self.table.support:
            for x in self.table.output_space():
                if self.direction == "left":
                    p = self.first.get((a[0], x[0]), 0) * self.second.get((a, x[0], x[1]), 0)
                else:
                    p = self.first.get((a[1], x[1]), 0) * self.second.get((a, x[1], x[0]), 0)
                if p:
                    out[(a, x)] = p
        return out

    def reconstructs(self) -> bool:
        return self.reconstruct() == self.table.entries


def factorize(box: NSBox | ConditionalTable, direction: str = "left") -> Factorization:
    t = box.table if isinstance(box, NSBox) else box
    if len(t.parties) != 2:
        raise ValueError("factorize needs a two-party box")
    if direction not in ("left", "right"):
        raise ValueError("direction must be 'left' or 'right'")
    lead = 0 if direction == "left" else 1
    other = 1 - lead
    marg = t.marginal([lead])
    first = {(k[0][0], k[1][0]): v for k, v in marg.entries.items()}
    second = {}
    for a in t.support:
        for own in t.outputs[lead]:
            pf = first.get((a[lead], own), Fraction(0))
            for rest in t.outputs[other]:
                x = (own, rest) if lead == 0 else (rest, own)
                if pf == 0:
                    p = Fraction(1, len(t.outputs[other]))
                else:
                    p = t.p(a, x) / pf
                if p:
                    second[(a, own, rest)] = p
    return Factorization(direction, first, second, t)


# --- wirings ------------------------------------------------------------------------------


@dataclass(frozen=True)
class QueryStep:
    """Query port ``port`` of box ``box`` with ``query(game_input, outputs_so_far)``."""

    box: int
    port: int
    query: Callable[[Any, tuple], Any]


@dataclass(frozen=True)
class WiringProgram:
    steps: tuple[QueryStep, ...]
    answer: Callable[[Any, tuple], Any]


def constant(value) -> Callable:
    return lambda inp, outs: value


def own_input(inp, outs):
    return inp


@dataclass
class NetworkStrategy:
    """Boxes, the game player owning each port, one program per player, optional shared randomness.

    When ``shared_randomness`` (a list of ``(value, weight)``) is given, its
    value is the first entry of every player's ``outs`` tuple.
    """

    boxes: list[NSBox]
    owners: list[tuple[str, ...]]
    programs: dict[str, WiringProgram]
    shared_randomness: list[tuple[Any, Fraction]] | None = None
    name: str = "network"

    def validate(self, game: Game) -> None:
        if len(self.owners) != len(self.boxes):
            raise ValueError("one owner tuple per box is required")
        for b, (box, own) in enumerate(zip(self.boxes, self.owners)):
            if len(own) != len(box.ports):
                raise ValueError(f"box {b} has {len(box.ports)} ports but {len(own)} owners")
        used = set()
        for player in game.players:
            prog = self.programs.get(player)
            if prog is None:
                raise ValueError(f"no program for player {player}")
            for st in prog.steps:
                if self.owners[st.box][st.port] != player:
                    raise ValueError(f"{player} queries port {st.port} of box {st.box} it does not own")
                if (st.box, st.port) in used:
                    raise ValueError(f"port {st.port} of box {st.box} is queried twice")
                used.add((st.box, st.port))
        if self.shared_randomness is not None:
            if sum(Fraction(w) for _, w in self.shared_randomness) != 1:
                raise ValueError("shared randomness weights must sum to 1")

    def randomness(self) -> list[tuple[Any, Fraction]]:
        if self.shared_randomness is None:
            return [(None, Fraction(1))]
        return [(v, Fraction(w)) for v, w in self.shared_randomness]


Interleaving = tuple  # of (player index, step index)


def default_interleaving(game: Game, strategy: NetworkStrategy) -> Interleaving:
    """Round-major: every player's first query in declaration order, then every second query, ..."""
    lengths = [len(strategy.programs[p].steps) for p in game.players]
    order = []
    for t in range(max(lengths, default=0)):
        for i, n in enumerate(lengths):
            if t < n:
                order.append((i, t))
    return tuple(order)


def check_interleaving(game: Game, strategy: NetworkStrategy, order: Interleaving) -> None:
    lengths = [len(strategy.programs[p].steps) for p in game.players]
    nxt = [0] * len(lengths)
    for i, t in order:
        if not 0 <= i < len(lengths) or t != nxt[i]:
            raise InterleavingError(f"step {(i, t)} breaks player {i}'s local order")
        nxt[i] += 1
    if nxt != lengths:
        raise InterleavingError("interleaving does not contain every query exactly once")


def _merges(lengths: list[int]):
    total = sum(lengths)
    pos = [0] * len(lengths)
    out: list = []

    def rec():
        if len(out) == total:
            yield tuple(out)
            return
        for i, n in enumerate(lengths):
            if pos[i] < n:
                out.append((i, pos[i]))
                pos[i] += 1
                yield from rec()
                pos[i] -= 1
                out.pop()

    yield from rec()


def all_interleavings(game: Game, strategy: NetworkStrategy, distinct: bool = True) -> list[Interleaving]:
    """Every consistent global query order.

    With ``distinct`` only one representative is kept per assignment of
    per-box query orders, since two global orders that agree on each box's
    query order cannot produce different transcripts.
    """
    lengths = [len(strategy.programs[p].steps) for p in game.players]
    result = []
    seen = set()
    for order in _merges(lengths):
        if distinct:
            key = []
            for b in range(len(strategy.boxes)):
                key.append(tuple(
                    (i, t) for i, t in order
                    if strategy.programs[game.players[i]].steps[t].box == b
                ))
            key = tuple(key)
            if key in seen:
                continue
            seen.add(key)
        result.append(order)
    return result


@dataclass(frozen=True)
class Leaf:
    prob: Fraction
    answers: tuple


def transcript_distribution(
    game: Game,
    strategy: NetworkStrategy,
    inputs: tuple,
    order: Interleaving,
    cap: int = DEFAULT_BRANCH_CAP,
) -> list[Leaf]:
    """All final answer tuples with their exact probabilities for one input tuple."""
    players = game.players
    asked = [a is not NOT_ASKED for a in inputs]
    steps = [(i, t) for i, t in order if asked[i]]
    leaves: list[Leaf] = []
    for r, w in strategy.randomness():
        start = () if strategy.shared_randomness is None else (r,)
        outs0 = tuple(start for _ in players)
        hist0 = tuple({} for _ in strategy.boxes)
        stack = [(0, w, outs0, hist0)]
        while stack:
            k, p, outs, hist = stack.pop()
            if k == len(steps):
                ans = tuple(
                    strategy.programs[pl].answer(inputs[i], outs[i]) if asked[i] else game.default_answer(i)
                    for i, pl in enumerate(players)
                )
                leaves.append(Leaf(p, ans))
                if len(leaves) > cap:
                    raise BranchLimitExceeded(f"more than {cap} transcripts; use sample_network")
                continue
            i, t = steps[k]
            st = strategy.programs[players[i]].steps[t]
            q = st.query(inputs[i], outs[i])
            box = strategy.boxes[st.box]
            if q not in box.table.inputs[st.port]:
                raise ValueError(f"{players[i]} sends {q!r} to port {st.port} of box {st.box}")
            for x, px in box.response(hist[st.box], st.port, q):
                nh = list(hist)
                h = dict(hist[st.box])
                h[st.port] = (q, x)
                nh[st.box] = h
                no = list(outs)
                no[i] = outs[i] + (x,)
                stack.append((k + 1, p * px, tuple(no), tuple(nh)))
    return leaves


@dataclass(frozen=True)
class NetworkValue:
    value: Fraction
    interleaving: Interleaving
    per_question: tuple[Fraction, ...]
    branches: int


def evaluate_network(
    game: Game,
    strategy: NetworkStrategy,
    interleaving: Interleaving | None = None,
    cap: int = DEFAULT_BRANCH_CAP,
) -> NetworkValue:
    """Exact winning probability under one global query order (default: round-major)."""
    strategy.validate(game)
    order = default_interleaving(game, strategy) if interleaving is None else tuple(interleaving)
    check_interleaving(game, strategy, order)
    total = Fraction(0)
    per_q = []
    branches = 0
    for qi, q in enumerate(game.questions):
        leaves = transcript_distribution(game, strategy, q.inputs, order, cap - branches)
        branches += len(leaves)
        win = sum((lf.prob for lf in leaves if game.accepts(qi, lf.answers)), Fraction(0))
        per_q.append(win)
        total += q.prob * win
    return NetworkValue(total, order, tuple(per_q), branches)


@dataclass(frozen=True)
class SampleResult:
    estimate: float
    stderr: float
    trials: int
    seed: int


def sample_network(
    game: Game,
    strategy: NetworkStrategy,
    trials: int,
    seed: int = 0,
    interleaving: Interleaving | None = None,
    block_size: int = DEFAULT_BLOCK_SIZE,
    method: str = "walk",
) -> SampleResult:
    """Monte Carlo win rate.

    ``method="walk"`` plays each trial query by query, drawing every box
    response from its conditional given the box's history so far.
    ``method="leaves"`` draws whole transcripts from the enumerated leaf
    distribution instead (faster, but shares code with the exact evaluator).
    Trials are split into blocks, each with its own generator spawned from
    ``seed``, so the estimate depends only on ``(seed, trials, block_size)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if method not in ("walk", "leaves"):
        raise ValueError(f"unknown sampling method {method!r}")
    strategy.validate(game)
    order = default_interleaving(game, strategy) if interleaving is None else tuple(interleaving)
    check_interleaving(game, strategy, order)
    qprobs = np.array([float(q.prob) for q in game.questions])
    qprobs /= qprobs.sum()
    tables = []
    if method == "leaves":
        for qi, q in enumerate(game.questions):
            leaves = transcript_distribution(game, strategy, q.inputs, order)
            probs = np.array([float(lf.prob) for lf in leaves])
            wins = np.array([game.accepts(qi, lf.answers) for lf in leaves], dtype=bool)
            tables.append((probs / probs.sum(), wins))
    nblocks = math.ceil(trials / block_size)
    seeds = np.random.SeedSequence(seed).spawn(nblocks)
    won = 0
    for b, ss in enumerate(seeds):
        n = min(block_size, trials - b * block_size)
        rng = np.random.default_rng(ss)
        qs = rng.choice(len(qprobs), size=n, p=qprobs)
        if method == "walk":
            for qi in qs:
                won += _play_once(game, strategy, int(qi), order, rng)
            continue
        counts = np.bincount(qs, minlength=len(qprobs))
        for qi, c in enumerate(counts):
            if c:
                probs, wins = tables[qi]
                picks = rng.choice(len(probs), size=int(c), p=probs)
                won += int(wins[picks].sum())
    p = won / trials
    return SampleResult(p, math.sqrt(p * (1 - p) / trials), trials, seed)


def _draw(rng, dist):
    u = rng.random()
    acc = 0.0
    for x, px in dist:
        acc += float(px)
        if u < acc:
            return x
    return dist[-1][0]


def _play_once(game: Game, strategy: NetworkStrategy, qi: int, order, rng) -> bool:
    inputs = game.questions[qi].inputs
    players = game.players
    asked = [a is not NOT_ASKED for a in inputs]
    r = _draw(rng, strategy.randomness())
    start = () if strategy.shared_randomness is None else (r,)
    outs = [start for _ in players]
    hist = [{} for _ in strategy.boxes]
    for i, t in order:
        if not asked[i]:
            continue
        st = strategy.programs[players[i]].steps[t]
        q = st.query(inputs[i], outs[i])
        x = _draw(rng, strategy.boxes[st.box].response(hist[st.box], st.port, q))
        hist[st.box][st.port] = (q, x)
        outs[i] = outs[i] + (x,)
    ans = tuple(
        strategy.programs[pl].answer(inputs[i], outs[i]) if asked[i] else game.default_answer(i)
        for i, pl in enumerate(players)
    )
    return game.accepts(qi, ans)


# --- named strategies ----------------------------------------------------------------------


def _xor_outs(inp, outs):
    return _xor(outs)


def ghz_box_strategy() -> NetworkStrategy:
    """Alice and Bob feed their inputs to one nonlocal box and return its outputs; Charlie answers 0."""
    return NetworkStrategy(
        [nonlocal_box()],
        [("Alice", "Bob")],
        {
            "Alice": WiringProgram((QueryStep(0, 0, own_input),), lambda inp, outs: outs[0]),
            "Bob": WiringProgram((QueryStep(0, 1, own_input),), lambda inp, outs: outs[0]),
            "Charlie": WiringProgram((), constant(0)),
        },
        name="ghz_one_box",
    )


def distributed_selection_strategy(num_bobs: int = 2) -> NetworkStrategy:
    """Alice plays CHSH with every Bob through a nonlocal box and routes the outputs
    into a selection box shared with Charlie, who inputs J."""
    m = num_bobs
    boxes = [nonlocal_box() for _ in range(m)] + [selection_box(m)]
    owners = [("Alice", f"Bob_{j}") for j in range(1, m + 1)] + [("Alice", "Charlie")]
    alice_steps = tuple(QueryStep(j, 0, own_input) for j in range(m)) + (
        QueryStep(m, 0, lambda inp, outs: tuple(outs[:m])),
    )
    programs = {
        "Alice": WiringProgram(alice_steps, lambda inp, outs: outs[m]),
        "Charlie": WiringProgram((QueryStep(m, 1, own_input),), lambda inp, outs: outs[0]),
    }
    for j in range(1, m + 1):
        programs[f"Bob_{j}"] = WiringProgram((QueryStep(j - 1, 1, own_input),), lambda inp, outs: outs[0])
    return NetworkStrategy(boxes, owners, programs, name="distributed_selection")


def distributed_resource_strategy(num_bobs: int = 2) -> NetworkStrategy:
    """One copy of R per Bob; Charlie says yes to copy J only.  All inputs are chosen before any output arrives."""
    m = num_bobs
    boxes = [resource_r(name=f"R{j}") for j in range(1, m + 1)]
    owners = [("Alice", "Charlie", f"Bob_{j}") for j in range(1, m + 1)]

    def charlie_query(j):
        return lambda inp, outs: YES if inp == j else NO

    def charlie_answer(inp, outs):
        return (_xor(z[0] for z in outs), _xor(z[1] for z in outs))

    programs = {
        "Alice": WiringProgram(tuple(QueryStep(j, 0, own_input) for j in range(m)), _xor_outs),
        "Charlie": WiringProgram(
            tuple(QueryStep(j - 1, 1, charlie_query(j)) for j in range(1, m + 1)), charlie_answer
        ),
    }
    for j in range(1, m + 1):
        programs[f"Bob_{j}"] = WiringProgram((QueryStep(j - 1, 2, own_input),), lambda inp, outs: outs[0])
    return NetworkStrategy(boxes, owners, programs, name="distributed_resource_r")


def teleported_with_ab_box() -> NetworkStrategy:
    """Alice and Bob share a nonlocal box; Charlie always reports (0, 0)."""
    return NetworkStrategy(
        [nonlocal_box()],
        [("Alice", "Bob")],
        {
            "Alice": WiringProgram((QueryStep(0, 0, own_input),), lambda inp, outs: outs[0]),
            "Bob": WiringProgram((QueryStep(0, 1, own_input),), lambda inp, outs: outs[0]),
            "Charlie": WiringProgram((), constant((0, 0))),
        },
        name="teleported_ab_box",
    )


def make_double_chsh() -> Game:
    """Alice gets (a1, a2), Bob gets (b1, b2); accept iff x1 xor y2 = a1 b2 and x2 xor y1 = a2 b1."""
    pairs = PAIRS
    qs = [Question((a, b), Fraction(1, 16)) for a in pairs for b in pairs]

    def pred(ins, ans):
        (a1, a2), (b1, b2) = ins
        (x1, x2), (y1, y2) = ans
        return x1 ^ y2 == a1 * b2 and x2 ^ y1 == a2 * b1

    return tabulate("double_chsh", ("Alice", "Bob"), (pairs, pairs), (pairs, pairs), qs, pred,
                    family="double_chsh")


def opposite_order_strategy() -> NetworkStrategy:
    """Two nonlocal boxes; Alice queries box 1 then box 2, Bob queries box 2 then box 1."""
    return NetworkStrategy(
        [nonlocal_box(name="box1"), nonlocal_box(name="box2")],
        [("Alice", "Bob"), ("Alice", "Bob")],
        {
            "Alice": WiringProgram(
                (QueryStep(0, 0, lambda inp, outs: inp[0]), QueryStep(1, 0, lambda inp, outs: inp[1])),
                lambda inp, outs: (outs[0], outs[1]),
            ),
            "Bob": WiringProgram(
                (QueryStep(1, 1, lambda inp, outs: inp[0]), QueryStep(0, 1, lambda inp, outs: inp[1])),
                lambda inp, outs: (outs[0], outs[1]),
            ),
        },
        name="opposite_order",
    )


def opposite_order_table() -> MultiRoundTable:
    """The two-round table of :func:`opposite_order_strategy`.

    Alice's rounds are (box 1, box 2) and Bob's are (box 2, box 1), so
    x1 xor y2 = a1 b2 and x2 xor y1 = a2 b1, uniformly.
    """
    entries = {}
    for a in PAIRS:
        for b in PAIRS:
            for x in PAIRS:
                for y in PAIRS:
                    if x[0] ^ y[1] == a[0] * b[1] and x[1] ^ y[0] == a[1] * b[0]:
                        entries[(a, b), (x, y)] = Fraction(1, 4)
    return MultiRoundTable(("Alice", "Bob"), ((BITS, BITS), (BITS, BITS)), ((BITS, BITS), (BITS, BITS)), entries)


def network_multiround_table(game: Game, strategy: NetworkStrategy,
                             order: Interleaving | None = None) -> MultiRoundTable:
    """Tabulate the per-round behaviour of a two-player non-adaptive network over every input sequence.

    Each player's round-``t`` input is what its ``t``-th query sends; the
    query functions are called with the round input as the player's input.
    """
    players = game.players
    lens = [len(strategy.programs[p].steps) for p in players]
    round_in = []
    round_out = []
    for p in players:
        steps = strategy.programs[p].steps
        round_in.append(tuple(strategy.boxes[s.box].table.inputs[s.port] for s in steps))
        round_out.append(tuple(strategy.boxes[s.box].table.outputs[s.port] for s in steps))
    order = default_interleaving(game, strategy) if order is None else order
    entries = {}
    for ins in itertools.product(*(itertools.product(*r) for r in round_in)):
        dist = {tuple(() for _ in players): Fraction(1)}
        for i, t in order:
            st = strategy.programs[players[i]].steps[t]
            box = strategy.boxes[st.box]
            q = ins[i][t]
            new = {}
            for outs, p in dist.items():
                h = _history_for(strategy, players, order, ins, outs, st.box, (i, t))
                for x, px in box.response(h, st.port, q):
                    no = list(outs)
                    no[i] = outs[i] + (x,)
                    new[tuple(no)] = new.get(tuple(no), Fraction(0)) + p * px
            dist = new
        for outs, p in dist.items():
            entries[(ins, outs)] = p
    return MultiRoundTable(players, tuple(round_in), tuple(round_out), entries)


def _history_for(strategy, players, order, ins, outs, box_idx, upto):
    """Queries already made to ``box_idx`` before step ``upto``."""
    h = {}
    for i, t in order:
        if (i, t) == upto:
            break
        st = strategy.programs[players[i]].steps[t]
        if st.box == box_idx:
            h[st.port] = (ins[i][t], outs[i][t])
    return h


# --- exor games ------------------------------------------------------------------------------


@dataclass(frozen=True)
class ExorPolynomial:
    """target(a) = const xor (xor of linear[i] a_i) xor (xor of a_i a_j over cross)."""

    const: int
    linear: tuple[int, ...]
    cross: tuple[tuple[int, int], ...]

    def __call__(self, a: Sequence[int]) -> int:
        v = self.const
        for i, c in enumerate(self.linear):
            v ^= c & a[i]
        for i, j in self.cross:
            v ^= a[i] & a[j]
        return v


def _exor_target(game: Game) -> dict:
    """Map each question's inputs to the required exor of all answers."""
    if any(set(o) != set(BITS) for o in game.output_alphabet):
        raise NotExorError("exor games need binary outputs")
    if any(set(a) - set(BITS) for a in game.input_alphabet):
        raise NotExorError("exor games need binary inputs for the box construction")
    targets = {}
    for qi, q in enumerate(game.questions):
        acc = game.accept[qi]
        t = None
        for ans in game.answer_space():
            want = _xor(ans)
            if ans in acc:
                if t is None:
                    t = want
                elif t != want:
                    raise NotExorError("predicate accepts answers with different exors")
        if t is None:
            raise NotExorError(f"question {qi} has no accepting answer")
        for ans in game.answer_space():
            if (ans in acc) != (_xor(ans) == t):
                raise NotExorError("predicate is not a function of the answers' exor")
        targets[q.inputs] = t
    return targets


def fit_exor_polynomial(game: Game) -> ExorPolynomial:
    """Degree-2 GF(2) polynomial matching the exor target on every question, with the fewest cross terms."""
    targets = _exor_target(game)
    m = game.num_players
    pairs = list(itertools.combinations(range(m), 2))
    for size in range(len(pairs) + 1):
        for cross in itertools.combinations(pairs, size):
            for bits in itertools.product(BITS, repeat=m + 1):
                poly = ExorPolynomial(bits[0], tuple(bits[1:]), cross)
                if all(poly(a) == t for a, t in targets.items()):
                    return poly
    raise NotExorError("target is not a degree-2 polynomial of the inputs")


def exor_box_strategy(game: Game) -> NetworkStrategy:
    """One nonlocal box per cross term a_i a_j; every player answers the exor of its box
    outputs plus its linear term, and the first player adds the constant."""
    poly = fit_exor_polynomial(game)
    players = game.players
    boxes = []
    owners = []
    steps: dict[int, list[QueryStep]] = {i: [] for i in range(len(players))}
    for b, (i, j) in enumerate(poly.cross):
        boxes.append(nonlocal_box(name=f"nl_{i}{j}"))
        owners.append((players[i], players[j]))
        steps[i].append(QueryStep(b, 0, own_input))
        steps[j].append(QueryStep(b, 1, own_input))

    def answer_for(i):
        lin = poly.linear[i]
        c = poly.const if i == 0 else 0
        return lambda inp, outs: _xor(outs) ^ (lin & inp) ^ c

    programs = {
        players[i]: WiringProgram(tuple(steps[i]), answer_for(i)) for i in range(len(players))
    }
    return NetworkStrategy(boxes, owners, programs, name=f"exor_{game.name}")


def shared_randomness_strategy(game: Game, mixture) -> NetworkStrategy:
    """Deterministic strategies mixed by shared randomness; no boxes."""
    values = list(range(len(mixture)))
    maps = [s.maps for _, s in mixture]

    def answer_for(i):
        return lambda inp, outs: maps[outs[0]][i][inp]

    programs = {p: WiringProgram((), answer_for(i)) for i, p in enumerate(game.players)}
    return NetworkStrategy([], [], programs, [(v, Fraction(w)) for v, (w, _) in zip(values, mixture)],
                           name="shared_randomness")


# --- teleported CHSH without an Alice-Bob box ----------------------------------------------

_BIT_FUNCS = {
    "0": lambda a: 0,
    "1": lambda a: 1,
    "a": lambda a: a,
    "not_a": lambda a: 1 - a,
}


def teleported_side_box_strategies() -> list[NetworkStrategy]:
    """A family of strategies for teleported CHSH using an Alice-Charlie and a Bob-Charlie
    nonlocal box and no Alice-Bob box.

    Alice and Bob each send a function of their input to their box and answer
    its output xor another function of the input.  Charlie queries both boxes,
    the second adaptively on the first output, and reports a function of both
    outputs.
    """
    out = []
    names = list(_BIT_FUNCS)
    charlie_reports = [
        lambda o: (o[0], o[1]),
        lambda o: (o[0] ^ o[1], 0),
        lambda o: (0, o[0] ^ o[1]),
        lambda o: (o[0] ^ o[1], o[0] ^ o[1]),
        lambda o: (o[0], o[0]),
    ]
    for fa, ga, fb, gb in itertools.product(names, repeat=4):
        for c1 in BITS:
            for adaptive in (False, True):
                for rep in charlie_reports:
                    def aq(inp, outs, f=_BIT_FUNCS[fa]): return f(inp)
                    def aa(inp, outs, g=_BIT_FUNCS[ga]): return outs[0] ^ g(inp)
                    def bq(inp, outs, f=_BIT_FUNCS[fb]): return f(inp)
                    def ba(inp, outs, g=_BIT_FUNCS[gb]): return outs[0] ^ g(inp)
                    def cq2(inp, outs, ad=adaptive, c=c1): return outs[0] if ad else c
                    def ca(inp, outs, r=rep): return r(outs)
                    out.append(NetworkStrategy(
                        [nonlocal_box(("A", "C"), "AC"), nonlocal_box(("B", "C"), "BC")],
                        [("Alice", "Charlie"), ("Bob", "Charlie")],
                        {
                            "Alice": WiringProgram((QueryStep(0, 0, aq),), aa),
                            "Bob": WiringProgram((QueryStep(1, 0, bq),), ba),
                            "Charlie": WiringProgram(
                                (QueryStep(0, 1, constant(c1)), QueryStep(1, 1, cq2)), ca
                            ),
                        },
                        name=f"side_{fa}_{ga}_{fb}_{gb}_{c1}_{int(adaptive)}",
                    ))
    return out


# --- serialization ------------------------------------------------------------------------------


def box_to_dict(box: NSBox) -> dict:
    t = box.table
    return {
        "name": box.name,
        "ports": list(t.parties),
        "inputs": [[encode_symbol(s) for s in a] for a in t.inputs],
        "outputs": [[encode_symbol(s) for s in a] for a in t.outputs],
        "entries": sorted(
            ([encode_symbol(a), encode_symbol(x), format_fraction(v)] for (a, x), v in t.entries.items()),
            key=repr,
        ),
    }


def table_from_dict(d: dict) -> ConditionalTable:
    """The table of a serialized box, without the non-signaling check."""
    ins = [tuple(decode_symbol(s) for s in a) for a in d["inputs"]]
    outs = [tuple(decode_symbol(s) for s in a) for a in d["outputs"]]
    entries = {(decode_symbol(a), decode_symbol(x)): parse_fraction(v) for a, x, v in d["entries"]}
    return ConditionalTable(tuple(d["ports"]), ins, outs, entries)


def box_from_dict(d: dict) -> NSBox:
    return NSBox(d["name"], table_from_dict(d))


class TableFunction:
    """A query or answer function stored as an explicit table ``(input, outs) -> value``."""

    def __init__(self, table: dict):
        self.table = table

    def __call__(self, inp, outs):
        try:
            return self.table[(inp, tuple(outs))]
        except KeyError:
            raise ValueError(f"wiring table has no entry for input {inp!r} and outputs {outs!r}")


def _prefix_outputs(game: Game, strategy: NetworkStrategy, player: str, t: int) -> list[tuple]:
    steps = strategy.programs[player].steps[:t]
    alphs = [strategy.boxes[s.box].table.outputs[s.port] for s in steps]
    rs = [()] if strategy.shared_randomness is None else [(v,) for v, _ in strategy.shared_randomness]
    return [r + o for r in rs for o in itertools.product(*alphs)]


def strategy_to_dict(game: Game, strategy: NetworkStrategy) -> dict:
    """Tabulate every query and answer function over its full domain."""
    progs = {}
    for i, player in enumerate(game.players):
        prog = strategy.programs[player]
        domain = [a for a in game.input_alphabet[i] if a is not NOT_ASKED]
        steps = []
        for t, st in enumerate(prog.steps):
            rows = [
                [encode_symbol(a), encode_symbol(o), encode_symbol(st.query(a, o))]
                for a in domain for o in _prefix_outputs(game, strategy, player, t)
            ]
            steps.append({"box": st.box, "port": st.port, "table": rows})
        ans = [
            [encode_symbol(a), encode_symbol(o), encode_symbol(prog.answer(a, o))]
            for a in domain for o in _prefix_outputs(game, strategy, player, len(prog.steps))
        ]
        progs[player] = {"steps": steps, "answer": ans}
    d = {
        "name": strategy.name,
        "boxes": [box_to_dict(b) for b in strategy.boxes],
        "owners": [list(o) for o in strategy.owners],
        "programs": progs,
    }
    if strategy.shared_randomness is not None:
        d["shared_randomness"] = [[encode_symbol(v), format_fraction(Fraction(w))]
                                  for v, w in strategy.shared_randomness]
    return d


def strategy_from_dict(d: dict) -> NetworkStrategy:
    def table(rows):
        return TableFunction({(decode_symbol(a), decode_symbol(o)): decode_symbol(v) for a, o, v in rows})

    programs = {}
    for player, p in d["programs"].items():
        steps = tuple(QueryStep(s["box"], s["port"], table(s["table"])) for s in p["steps"])
        programs[player] = WiringProgram(steps, table(p["answer"]))
    sr = None
    if "shared_randomness" in d:
        sr = [(decode_symbol(v), parse_fraction(w)) for v, w in d["shared_randomness"]]
    return NetworkStrategy(
        [box_from_dict(b) for b in d["boxes"]],
        [tuple(o) for o in d["owners"]],
        programs,
        sr,
        d.get("name", "network"),
    )


BUILTIN_STRATEGIES = {
    "ghz_box": ("ghz", ghz_box_strategy),
    "distributed_selection": ("distributed_chsh", distributed_selection_strategy),
    "distributed_resource_r": ("distributed_chsh", distributed_resource_strategy),
    "teleported_ab_box": ("teleported_chsh", teleported_with_ab_box),
    "opposite_order": ("double_chsh", opposite_order_strategy),
}
