"""Nonlocal games: definition, validation, serialization and the standard families.

A game is stored fully tabulated.  Every player has an input alphabet (which
contains ``None`` when the player is sometimes not asked) and an output
alphabet; the acceptance predicate is an explicit set of accepting answer
tuples per question.  Answer tuples always carry one entry per player, so a
predicate that peeks at an unasked player is representable and detectable.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

NOT_ASKED = None

TAGS = ("consistency", "game", "plain")


@dataclass(frozen=True)
class Question:
    inputs: tuple
    prob: Fraction
    tag: str = "plain"

    def asked(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.inputs) if a is not NOT_ASKED)


@dataclass(frozen=True)
class Game:
    name: str
    players: tuple[str, ...]
    input_alphabet: tuple[tuple, ...]
    output_alphabet: tuple[tuple, ...]
    questions: tuple[Question, ...]
    accept: tuple[frozenset, ...]
    nonevents: tuple[frozenset, ...] = ()
    family: str = "custom"
    metadata: dict = field(default_factory=dict, compare=True, hash=False)

    @property
    def num_players(self) -> int:
        return len(self.players)

    def player_index(self, player: str | int) -> int:
        if isinstance(player, int):
            return player
        return self.players.index(player)

    def answer_space(self) -> Iterable[tuple]:
        return itertools.product(*self.output_alphabet)

    def input_space(self) -> Iterable[tuple]:
        return itertools.product(*self.input_alphabet)

    def accepts(self, qi: int, answers: Sequence) -> bool:
        return tuple(answers) in self.accept[qi]

    def is_nonevent(self, qi: int, answers: Sequence) -> bool:
        return bool(self.nonevents) and tuple(answers) in self.nonevents[qi]

    def probability(self, inputs: Sequence) -> Fraction:
        """Total probability that the verifier sends exactly ``inputs``."""
        inputs = tuple(inputs)
        return sum((q.prob for q in self.questions if q.inputs == inputs), Fraction(0))

    def depends_on(self, qi: int, player: str | int) -> bool:
        """Whether the acceptance decision on question ``qi`` can change with ``player``'s answer."""
        i = self.player_index(player)
        table = self.accept[qi]
        for ans in self.answer_space():
            verdict = ans in table
            for alt in self.output_alphabet[i]:
                if alt != ans[i]:
                    other = ans[:i] + (alt,) + ans[i + 1:]
                    if (other in table) != verdict:
                        return True
        return False

    def involved(self, qi: int) -> tuple[int, ...]:
        return tuple(i for i in range(self.num_players) if self.depends_on(qi, i))

    def questions_with_tag(self, tag: str) -> list[int]:
        return [i for i, q in enumerate(self.questions) if q.tag == tag]

    def default_answer(self, i: int):
        return self.output_alphabet[i][0]


Predicate = Callable[[tuple, tuple], bool]


def tabulate(
    name: str,
    players: Sequence[str],
    input_alphabet: Sequence[Sequence],
    output_alphabet: Sequence[Sequence],
    questions: Sequence[Question],
    predicate: Predicate,
    *,
    nonevent: Predicate | None = None,
    family: str = "custom",
    metadata: dict | None = None,
) -> Game:
    """Build a :class:`Game` by evaluating ``predicate(inputs, answers)`` on every answer tuple."""
    out = tuple(tuple(a) for a in output_alphabet)
    answers = list(itertools.product(*out))
    accept = tuple(
        frozenset(ans for ans in answers if predicate(q.inputs, ans)) for q in questions
    )
    nonevents: tuple[frozenset, ...] = ()
    if nonevent is not None:
        nonevents = tuple(
            frozenset(ans for ans in answers if nonevent(q.inputs, ans)) for q in questions
        )
    return Game(
        name=name,
        players=tuple(players),
        input_alphabet=tuple(tuple(a) for a in input_alphabet),
        output_alphabet=out,
        questions=tuple(questions),
        accept=accept,
        nonevents=nonevents,
        family=family,
        metadata=dict(metadata or {}),
    )


# --- validation -------------------------------------------------------------------


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid


def validate_game(game: Game) -> ValidationReport:
    """Check the structural invariants of ``game`` and collect every violation found."""
    report = ValidationReport()
    v = report.violations
    n = game.num_players
    if len(game.input_alphabet) != n or len(game.output_alphabet) != n:
        v.append("alphabet count does not match player count")
        return report
    if len(game.accept) != len(game.questions):
        v.append("predicate table count does not match question count")
        return report
    total = Fraction(0)
    space = set(game.answer_space())
    for qi, q in enumerate(game.questions):
        if not isinstance(q.prob, Fraction):
            v.append(f"question {qi}: probability is not an exact rational")
        elif q.prob < 0:
            v.append(f"question {qi}: negative probability {q.prob}")
        total += Fraction(q.prob)
        if q.tag not in TAGS:
            v.append(f"question {qi}: unknown tag {q.tag!r}")
        if len(q.inputs) != n:
            v.append(f"question {qi}: wrong number of inputs")
            continue
        for i, a in enumerate(q.inputs):
            if a not in game.input_alphabet[i]:
                v.append(f"question {qi}: input {a!r} not in alphabet of {game.players[i]}")
        if not game.accept[qi] <= space:
            v.append(f"question {qi}: predicate table has answers outside the output alphabets")
        for i, a in enumerate(q.inputs):
            if a is NOT_ASKED and game.depends_on(qi, i):
                v.append(f"question {qi}: predicate reads unasked player {game.players[i]}")
    if total != 1:
        v.append(f"distribution not normalized (total {total})")
    for i, alph in enumerate(game.input_alphabet):
        if NOT_ASKED in alph and all(q.inputs[i] is not NOT_ASKED for q in game.questions):
            v.append(f"{game.players[i]}: alphabet lists ⊥ but the player is always asked")
    return report


@dataclass
class UniquenessReport:
    unique: bool
    counterexamples: list[dict]

    def __bool__(self) -> bool:
        return self.unique


def check_uniqueness(game: Game, question_subset: Iterable[int] | None = None) -> UniquenessReport:
    """Check that every involved player has exactly one accepting reply to any fixing of the others.

    Players that the predicate ignores on a question are not involved; their
    answers are pinned to the first output symbol while enumerating.
    """
    qs = range(len(game.questions)) if question_subset is None else question_subset
    bad = []
    for qi in qs:
        inv = game.involved(qi)
        for v in inv:
            others = [i for i in inv if i != v]
            for fixing in itertools.product(*(game.output_alphabet[i] for i in others)):
                ans = [game.default_answer(i) for i in range(game.num_players)]
                for i, a in zip(others, fixing):
                    ans[i] = a
                count = 0
                for reply in game.output_alphabet[v]:
                    ans[v] = reply
                    count += game.accepts(qi, ans)
                if count != 1:
                    bad.append({
                        "question": qi,
                        "player": game.players[v],
                        "others": {game.players[i]: a for i, a in zip(others, fixing)},
                        "accepting_replies": count,
                    })
    return UniquenessReport(not bad, bad)


def unique_accepting_answer(game: Game, qi: int, v: int, answers: Sequence):
    """The single reply of player ``v`` that makes ``answers`` accepted on question ``qi``."""
    ans = list(answers)
    hits = []
    for reply in game.output_alphabet[v]:
        ans[v] = reply
        if game.accepts(qi, ans):
            hits.append(reply)
    if len(hits) != 1:
        raise ValueError(
            f"question {qi} is not unique for {game.players[v]}: {len(hits)} accepting replies"
        )
    return hits[0]


# --- families ----------------------------------------------------------------------

BITS = (0, 1)
PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))


def _xor(bits: Iterable[int]) -> int:
    r = 0
    for b in bits:
        r ^= b
    return r


def make_chsh() -> Game:
    qs = [Question((a, b), Fraction(1, 4)) for a in BITS for b in BITS]
    return tabulate(
        "chsh", ("Alice", "Bob"), (BITS, BITS), (BITS, BITS), qs,
        lambda q, ans: ans[0] ^ ans[1] == q[0] * q[1],
        family="chsh",
    )


def make_chsh_n(n: int) -> Game:
    """Chained Bell game on ``n`` settings; ``make_chsh_n(2)`` is CHSH."""
    if n < 2:
        raise ValueError("CHSH_n needs n >= 2")
    qs = [
        Question((a, b), Fraction(1, 2 * n))
        for a in range(n)
        for b in (a, (a + 1) % n)
    ]

    def pred(q, ans):
        a, b = q
        if a == b == n - 1:
            return ans[0] != ans[1]
        return ans[0] == ans[1]

    return tabulate(
        f"chsh_{n}", ("Alice", "Bob"), (tuple(range(n)), tuple(range(n))), (BITS, BITS),
        qs, pred, family="chsh_n", metadata={"n": Fraction(n)},
    )


def chsh_plus_k_consistency_prob(k: int) -> Fraction:
    return 1 - Fraction(2, 3**k + 1)


def make_extended_chsh(k: int) -> Game:
    """CHSH + k: Alice, Bob and k Charlies; ``k = 0`` is plain CHSH."""
    if k < 0:
        raise ValueError("k must be >= 0")
    q = chsh_plus_k_consistency_prob(k)
    players = ("Alice", "Bob") + tuple(f"Charlie_{j}" for j in range(1, k + 1))
    opt = (NOT_ASKED,) if k else ()
    inputs = (BITS, BITS + opt) + tuple((0, 1, NOT_ASKED) for _ in range(k))
    qs = []
    for j in range(k):
        ins = [0, NOT_ASKED] + [NOT_ASKED] * k
        ins[2 + j] = 0
        qs.append(Question(tuple(ins), q / k, "consistency"))
    for a in BITS:
        for b in BITS:
            cs = [1 if a == 1 else NOT_ASKED] * k
            qs.append(Question((a, b, *cs), (1 - q) / 4, "game"))

    def pred(ins, ans):
        if ins[1] is NOT_ASKED:
            j = next(i for i in range(2, 2 + k) if ins[i] is not NOT_ASKED)
            return ans[0] == ans[j]
        if ins[0] == 0:
            return ans[0] == ans[1]
        return _xor(ans[2:]) ^ ans[0] ^ ans[1] == ins[1]

    return tabulate(
        f"chsh+{k}", players, inputs, (BITS,) * (k + 2), qs, pred,
        family="chsh_plus_k",
        metadata={"k": Fraction(k), "q": q, "p": Fraction(1, 2)},
    )


def chsh_n_plus_k_probs(n: int, k: int) -> tuple[Fraction, Fraction]:
    """(p, q): game-question weight on A = 0 and the consistency-question weight."""
    p = Fraction(1, 2 * n - 1)
    q = 1 / (1 + 1 / ((3**k - 1) * p))
    return p, q


def make_extended_chsh_n(n: int, k: int) -> Game:
    if n < 2:
        raise ValueError("CHSH_n + k needs n >= 2")
    if k < 1:
        raise ValueError("CHSH_n + k needs k >= 1")
    p, q = chsh_n_plus_k_probs(n, k)
    players = ("Alice", "Bob") + tuple(f"Charlie_{j}" for j in range(1, k + 1))
    inputs = (
        tuple(range(-n + 1, n)),
        tuple(range(n)) + (NOT_ASKED,),
    ) + tuple((0, 1, NOT_ASKED) for _ in range(k))
    qs = []
    for j in range(k):
        ins = [0, NOT_ASKED] + [NOT_ASKED] * k
        ins[2 + j] = 0
        qs.append(Question(tuple(ins), q / k, "consistency"))
    for b in (0, 1):
        qs.append(Question((0, b) + (NOT_ASKED,) * k, (1 - q) * p / 2, "game"))
    w = (1 - q) * (1 - p) / (2 * n - 2) / 2
    for a in range(-n + 1, n):
        if a == 0:
            continue
        for b in (abs(a), (abs(a) + 1) % n):
            qs.append(Question((a, b) + (1,) * k, w, "game"))

    def pred(ins, ans):
        a, b = ins[0], ins[1]
        x, y = ans[0], ans[1]
        if b is NOT_ASKED:
            j = next(i for i in range(2, 2 + k) if ins[i] is not NOT_ASKED)
            return x == ans[j]
        if a == 0:
            return x == y
        s = int(a < 0)
        if _xor(ans[2:]) != s:
            return True
        if abs(a) == b == n - 1:
            return x != y
        return x == y

    return tabulate(
        f"chsh_{n}+{k}", players, inputs, (BITS,) * (k + 2), qs, pred,
        family="chsh_n_plus_k",
        metadata={"n": Fraction(n), "k": Fraction(k), "p": p, "q": q},
    )


def make_teleported_chsh(postselected: bool = False) -> Game:
    """Teleported CHSH.  Charlie has a single dummy input and reports either
    the correction bits ``(Z1, Z2)`` or, when postselected, success/failure."""
    qs = [Question((a, b, 0), Fraction(1, 4)) for a in BITS for b in BITS]
    if not postselected:
        def pred(ins, ans):
            a, b, _ = ins
            x, y, (z1, z2) = ans
            return x ^ y ^ (a * z1) ^ ((1 - a) * z2) == a * b

        return tabulate(
            "teleported_chsh", ("Alice", "Bob", "Charlie"), (BITS, BITS, (0,)),
            (BITS, BITS, PAIRS), qs, pred, family="teleported_chsh",
        )

    def pred_ps(ins, ans):
        return ans[2] == "success" and ans[0] ^ ans[1] == ins[0] * ins[1]

    return tabulate(
        "teleported_chsh_postselected", ("Alice", "Bob", "Charlie"), (BITS, BITS, (0,)),
        (BITS, BITS, ("success", "failure")), qs, pred_ps,
        nonevent=lambda ins, ans: ans[2] == "failure",
        family="teleported_chsh_postselected",
    )


GHZ_QUESTIONS = ((0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 1, 1))


def make_ghz_game() -> Game:
    qs = [Question(t, Fraction(1, 4)) for t in GHZ_QUESTIONS]
    return tabulate(
        "ghz", ("Alice", "Bob", "Charlie"), (BITS,) * 3, (BITS,) * 3, qs,
        lambda ins, ans: _xor(ans) == int(all(ins)),
        family="ghz",
    )


def make_exor_game(
    name: str,
    players: Sequence[str],
    questions: Sequence[tuple[tuple, Fraction]],
    target: Callable[[tuple], int],
) -> Game:
    """Binary game accepting iff the exor of all answers equals ``target(inputs)``."""
    m = len(players)
    qs = [Question(tuple(ins), Fraction(p)) for ins, p in questions]
    return tabulate(
        name, players, (BITS,) * m, (BITS,) * m, qs,
        lambda ins, ans: _xor(ans) == target(ins),
        family="exor",
    )


def make_distributed_chsh(num_bobs: int = 2) -> Game:
    """Alice plays CHSH with Bob_J; Charlie learns J and reports Pauli-correction bits."""
    if num_bobs < 2:
        raise ValueError("distributed CHSH needs at least two Bobs")
    m = num_bobs
    players = ("Alice",) + tuple(f"Bob_{j}" for j in range(1, m + 1)) + ("Charlie",)
    js = tuple(range(1, m + 1))
    weight = Fraction(1, 2 ** (m + 1) * m)
    qs = [
        Question((a, *bs, j), weight)
        for a in BITS
        for bs in itertools.product(BITS, repeat=m)
        for j in js
    ]

    def pred(ins, ans):
        a, j = ins[0], ins[-1]
        b = ins[j]
        x, y = ans[0], ans[j]
        z1, z2 = ans[-1]
        return x ^ y ^ (a * z1) ^ ((1 - a) * z2) == a * b

    return tabulate(
        f"distributed_chsh_{m}", players, (BITS,) + (BITS,) * m + (js,),
        (BITS,) + (BITS,) * m + (PAIRS,), qs, pred,
        family="distributed_chsh", metadata={"num_bobs": Fraction(m)},
    )


BUILTIN_FAMILIES = {
    "chsh": lambda **kw: make_chsh(),
    "chsh_n": lambda n=3, **kw: make_chsh_n(n),
    "chsh_plus_k": lambda k=1, **kw: make_extended_chsh(k),
    "chsh_n_plus_k": lambda n=3, k=1, **kw: make_extended_chsh_n(n, k),
    "teleported_chsh": lambda postselected=False, **kw: make_teleported_chsh(postselected),
    "ghz": lambda **kw: make_ghz_game(),
    "distributed_chsh": lambda m=2, **kw: make_distributed_chsh(m),
}


def builtin_game(family: str, **params) -> Game:
    try:
        factory = BUILTIN_FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown game family {family!r}; known: {sorted(BUILTIN_FAMILIES)}")
    return factory(**{k: v for k, v in params.items() if v is not None})


# --- serialization ------------------------------------------------------------------


def encode_symbol(s) -> Any:
    if isinstance(s, tuple):
        return [encode_symbol(t) for t in s]
    return s


def decode_symbol(s) -> Any:
    if isinstance(s, list):
        return tuple(decode_symbol(t) for t in s)
    return s


def format_fraction(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(s: str | int) -> Fraction:
    return Fraction(s)


def game_to_dict(game: Game) -> dict:
    def pairs(tables):
        return [
            [qi, encode_symbol(ans)]
            for qi, table in enumerate(tables)
            for ans in sorted(table, key=repr)
        ]

    d = {
        "name": game.name,
        "family": game.family,
        "players": list(game.players),
        "input_alphabet": [encode_symbol(a) for a in game.input_alphabet],
        "output_alphabet": [encode_symbol(a) for a in game.output_alphabet],
        "questions": [
            {"inputs": encode_symbol(q.inputs), "prob": format_fraction(q.prob), "tag": q.tag}
            for q in game.questions
        ],
        "predicate": pairs(game.accept),
        "metadata": {k: format_fraction(v) for k, v in sorted(game.metadata.items())},
    }
    if game.nonevents:
        d["nonevents"] = pairs(game.nonevents)
    return d


def game_from_dict(d: dict) -> Game:
    questions = tuple(
        Question(decode_symbol(q["inputs"]), parse_fraction(q["prob"]), q.get("tag", "plain"))
        for q in d["questions"]
    )

    def tables(pairs):
        out = [set() for _ in questions]
        for qi, ans in pairs:
            out[qi].add(decode_symbol(ans))
        return tuple(frozenset(t) for t in out)

    return Game(
        name=d["name"],
        players=tuple(d["players"]),
        input_alphabet=tuple(decode_symbol(a) for a in d["input_alphabet"]),
        output_alphabet=tuple(decode_symbol(a) for a in d["output_alphabet"]),
        questions=questions,
        accept=tables(d["predicate"]),
        nonevents=tables(d["nonevents"]) if "nonevents" in d else (),
        family=d.get("family", "custom"),
        metadata={k: parse_fraction(v) for k, v in d.get("metadata", {}).items()},
    )


def dumps_game(game: Game) -> str:
    return json.dumps(game_to_dict(game), indent=1, ensure_ascii=False)


def loads_game(text: str) -> Game:
    return game_from_dict(json.loads(text))


def save_game(game: Game, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_game(game))


def load_game(path) -> Game:
    with open(path, encoding="utf-8") as fh:
        return loads_game(fh.read())
