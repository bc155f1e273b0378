"""Two-party coin flipping: a small protocol interface, toy protocols, and an
exhaustive search for the single-aborting-round fail-stop attacker.

A two-party protocol is driven round by round through ``step``.  Backup values
come from ``solo(state, party, k)``: the output ``party`` reaches when the
other side's last message is the one from round ``k`` and ``party`` finishes on
its own.  Everything is a pure function of a keyed coin source, so expectations
can be computed exactly with ``enumerate_outcomes``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from ..errors import SpecError
from ..randomness import SeededSource, derive_seed, enumerate_outcomes

HALF = Fraction(1, 2)
MAX_LEAVES = 1 << 22


@dataclass(frozen=True)
class AttackSpec:
    """Party ``attacker`` aborts from round ``i_star`` on when its backup
    value b_{j_star} equals ``b``; otherwise it plays honestly."""

    attacker: int
    i_star: int
    j_star: int
    b: int

    def __post_init__(self):
        if self.attacker not in (0, 1):
            raise SpecError("the attacker is party 0 or party 1")
        if self.b not in (0, 1):
            raise SpecError("b is a bit")
        if self.j_star not in (self.i_star, self.i_star - 1) or self.j_star < 1:
            raise SpecError("need j* in {i*, i* - 1} and j* >= 1")

    def check(self, rounds: int) -> None:
        if not 1 <= self.i_star <= rounds:
            raise SpecError(f"i* = {self.i_star} lies outside rounds 1..{rounds}")

    def as_dict(self) -> Dict[str, int]:
        return {"attacker": self.attacker, "i_star": self.i_star, "j_star": self.j_star, "b": self.b}


@dataclass(frozen=True)
class BiasReport:
    mean: Union[Fraction, float]
    trials: int
    stderr: float
    exact: bool

    @property
    def bias(self) -> Union[Fraction, float]:
        return abs(self.mean - HALF) if self.exact else abs(self.mean - 0.5)

    @property
    def signed(self) -> Union[Fraction, float]:
        return self.mean - HALF if self.exact else self.mean - 0.5

    def as_dict(self) -> Dict[str, Any]:
        out = {"mean": float(self.mean), "bias": float(self.bias), "trials": self.trials,
               "stderr": self.stderr, "exact": self.exact}
        if self.exact:
            out["mean_fraction"] = str(self.mean)
            out["bias_fraction"] = str(self.bias)
        return out


class TwoPartyProtocol:
    """Interface for the attack search.  Rounds are numbered from 1."""

    name = "two-party"
    rounds = 0

    def senders(self, i: int) -> FrozenSet[int]:
        raise NotImplementedError

    def start(self, source) -> Any:
        raise NotImplementedError

    def step(self, state: Any, i: int) -> Any:
        """Honest round ``i``; must not mutate ``state``."""
        raise NotImplementedError

    def solo(self, state: Any, party: int, k: int) -> int:
        """Output of ``party`` when the other side sends nothing after round ``k``."""
        raise NotImplementedError

    def output(self, state: Any, party: int) -> int:
        raise NotImplementedError


# A trigger is (round, j, b): at the start of ``round`` abort if b_j == b.
# ``j`` None means abort unconditionally.
Trigger = Tuple[int, Optional[int], Optional[int]]


def execute(protocol: TwoPartyProtocol, source, attacker: Optional[int] = None,
            triggers: Sequence[Trigger] = ()) -> Tuple[int, int]:
    """Run once; returns (output of party 0, output of party 1).

    The attacker's entry is its own honest-looking output (or -1 once it has
    aborted); only the other party's output is meaningful under attack.
    """
    state = protocol.start(source)
    states = [state]
    aborted = False
    for i in range(1, protocol.rounds + 1):
        if attacker is not None and not aborted:
            for at, j, b in triggers:
                if at == i and (j is None or protocol.solo(states[j - 1], attacker, j - 1) == b):
                    aborted = True
                    break
        if aborted and attacker in protocol.senders(i):
            other = 1 - attacker
            value = protocol.solo(states[i - 1], other, i - 1)
            return (-1, value) if attacker == 0 else (value, -1)
        state = protocol.step(state, i)
        states.append(state)
    if attacker is None:
        return protocol.output(state, 0), protocol.output(state, 1)
    other = 1 - attacker
    value = protocol.output(state, other)
    return (-1, value) if attacker == 0 else (value, -1)


def attack_triggers(attack: AttackSpec) -> Tuple[Trigger, ...]:
    return ((attack.i_star, attack.j_star, attack.b),)


def exact_mean(protocol: TwoPartyProtocol, attacker: Optional[int], triggers: Sequence[Trigger],
               max_leaves: int = MAX_LEAVES) -> Tuple[Fraction, int]:
    """Exact expectation of the honest party's output and the number of leaves."""
    honest = 1 - attacker if attacker is not None else 1
    total = Fraction(0)
    leaves = 0
    for prob, outs in enumerate_outcomes(lambda s: execute(protocol, s, attacker, triggers), max_leaves):
        total += prob * outs[honest]
        leaves += 1
    return total, leaves


def attack_bias(protocol: TwoPartyProtocol, attack: AttackSpec, max_leaves: int = MAX_LEAVES) -> BiasReport:
    attack.check(protocol.rounds)
    mean, leaves = exact_mean(protocol, attack.attacker, attack_triggers(attack), max_leaves)
    return BiasReport(mean, leaves, 0.0, True)


def estimate_attack_bias(protocol: TwoPartyProtocol, attack: AttackSpec, trials: int, seed: int = 0) -> BiasReport:
    """Monte Carlo fallback when the coin space is too large to enumerate."""
    attack.check(protocol.rounds)
    if trials < 2:
        raise ValueError("need at least two trials")
    honest = 1 - attack.attacker
    values = [execute(protocol, SeededSource(derive_seed(seed, "attack", k)), attack.attacker,
                      attack_triggers(attack))[honest] for k in range(trials)]
    mean = sum(values) / trials
    var = sum((v - mean) ** 2 for v in values) / (trials - 1)
    return BiasReport(mean, trials, math.sqrt(var / trials), False)


@dataclass(frozen=True)
class Consistency:
    mean0: Fraction
    mean1: Fraction
    agreement: Fraction

    @property
    def gamma(self) -> Fraction:
        return self.agreement - HALF


def consistency(protocol: TwoPartyProtocol, max_leaves: int = MAX_LEAVES) -> Consistency:
    m0 = m1 = agree = Fraction(0)
    for prob, (o0, o1) in enumerate_outcomes(lambda s: execute(protocol, s), max_leaves):
        m0 += prob * o0
        m1 += prob * o1
        agree += prob * (o0 == o1)
    return Consistency(m0, m1, agree)


def require_coin_flipping(protocol: TwoPartyProtocol, max_leaves: int = MAX_LEAVES) -> Consistency:
    """Reject protocols whose honest outputs are not a fair coin or that are not consistent."""
    c = consistency(protocol, max_leaves)
    if c.mean0 != HALF or c.mean1 != HALF:
        raise SpecError(f"{protocol.name} is not a coin-flipping protocol: honest means {c.mean0}, {c.mean1}")
    if c.gamma <= 0:
        raise SpecError(f"{protocol.name} is not consistent: agreement {c.agreement}")
    return c


def all_attacks(rounds: int, attackers: Iterable[int] = (0, 1)) -> List[AttackSpec]:
    out = []
    for p in attackers:
        for i in range(1, rounds + 1):
            for j in (i, i - 1):
                if j < 1:
                    continue
                for b in (0, 1):
                    out.append(AttackSpec(p, i, j, b))
    return out


@dataclass(frozen=True)
class CleveResult:
    protocol: str
    attack: AttackSpec
    bias: Fraction
    mean: Fraction
    gamma: Fraction
    rounds: int
    evaluated: int
    leaves: int
    table: Tuple[Tuple[AttackSpec, Fraction], ...] = field(repr=False, default=())

    @property
    def floor(self) -> Fraction:
        """gamma / (8r + 2), the guaranteed single-round bias."""
        return self.gamma / (8 * self.rounds + 2)

    @property
    def toward(self) -> int:
        return 1 if self.mean > HALF else 0

    def as_dict(self) -> Dict[str, Any]:
        return {"protocol": self.protocol, "attack": self.attack.as_dict(), "bias": float(self.bias),
                "bias_fraction": str(self.bias), "mean_fraction": str(self.mean), "toward": self.toward,
                "gamma": str(self.gamma), "rounds": self.rounds, "floor": str(self.floor),
                "floor_met": self.bias >= self.floor, "evaluated": self.evaluated, "leaves": self.leaves}


def find_cleve_attacker(protocol: TwoPartyProtocol, max_leaves: int = MAX_LEAVES,
                        keep: Optional[Callable[[AttackSpec], bool]] = None) -> CleveResult:
    """Exact search over every (party, i*, j*, b).

    The deviation's sign gives the direction, so both directions are covered.
    Ties keep the first candidate in (party, i*, j* descending, b) order.
    ``keep`` restricts the candidates.  Raises ScaleError when a candidate's
    coin space exceeds ``max_leaves``.
    """
    c = require_coin_flipping(protocol, max_leaves)
    best: Optional[Tuple[AttackSpec, Fraction, Fraction]] = None
    table = []
    leaves = 0
    for attack in all_attacks(protocol.rounds):
        if keep is not None and not keep(attack):
            continue
        mean, count = exact_mean(protocol, attack.attacker, attack_triggers(attack), max_leaves)
        leaves += count
        bias = abs(mean - HALF)
        table.append((attack, mean))
        if best is None or bias > best[1]:
            best = (attack, bias, mean)
    if best is None:
        raise SpecError("no candidate attack left to evaluate")
    return CleveResult(protocol.name, best[0], best[1], best[2], c.gamma, protocol.rounds, len(table), leaves,
                       tuple(table))


@dataclass(frozen=True)
class AveragingCheck:
    """Signed biases of the two single-round attackers and the two-round one."""

    b0: Fraction
    b1: Fraction
    two_round: Fraction

    @property
    def holds(self) -> bool:
        return (self.b0 + self.b1) / 2 == self.two_round / 2


def averaging_identity(protocol: TwoPartyProtocol, attacker: int, j: int, b: int,
                       max_leaves: int = MAX_LEAVES) -> AveragingCheck:
    """A_0 aborts at j when b_j = b; A_1 aborts at j + 1 when b_j = 1 - b; the
    two-round attacker aborts at j when b_j = b and at j + 1 otherwise."""
    first = ((j, j, b),)
    second = ((j + 1, j, 1 - b),)
    both = ((j, j, b), (j + 1, None, None))
    m0, _ = exact_mean(protocol, attacker, first, max_leaves)
    m1, _ = exact_mean(protocol, attacker, second, max_leaves)
    m2, _ = exact_mean(protocol, attacker, both, max_leaves)
    return AveragingCheck(m0 - HALF, m1 - HALF, m2 - HALF)


# ------------------------------------------------------------ toy protocols

def _xor(bits: Sequence[int]) -> int:
    out = 0
    for x in bits:
        out ^= x
    return out


def _majority(bits: Sequence[int]) -> int:
    return int(2 * sum(bits) > len(bits))


COMBINERS: Dict[str, Callable[[Sequence[int]], int]] = {
    "xor": _xor,
    "majority": _majority,
    "zero": lambda bits: 0,
}


class ExchangeProtocol(TwoPartyProtocol):
    """Each round's sender posts one coin; both parties output a fixed
    combination of all posted coins.

    A party whose peer went silent fills the missing coins with 0
    (``fill="zero"``) or with coins of its own (``fill="coin"``).
    """

    def __init__(self, senders: Sequence[int], combine: str = "xor", fill: str = "coin", name: Optional[str] = None):
        if combine not in COMBINERS:
            raise SpecError(f"unknown combiner {combine!r}")
        if fill not in ("zero", "coin"):
            raise SpecError(f"unknown fill rule {fill!r}")
        if any(s not in (0, 1) for s in senders):
            raise SpecError("senders are parties 0 and 1")
        self._senders = tuple(senders)
        self.rounds = len(self._senders)
        self.combine = COMBINERS[combine]
        self.fill = fill
        self.name = name or f"{combine}-{self.rounds}-{fill}"

    def senders(self, i):
        return frozenset((self._senders[i - 1],))

    def _post(self, source, i):
        return source.draw(("party", self._senders[i - 1], "post", i), 2)

    def start(self, source):
        return (source, ())

    def step(self, state, i):
        source, posted = state
        return (source, posted + (self._post(source, i),))

    def solo(self, state, party, k):
        source, posted = state
        bits = list(posted[:k])
        for i in range(k + 1, self.rounds + 1):
            if self._senders[i - 1] == party:
                bits.append(self._post(source, i))
            elif self.fill == "coin":
                bits.append(source.draw(("party", party, "fill", i), 2))
            else:
                bits.append(0)
        return self.combine(bits)

    def output(self, state, party):
        return self.combine(state[1])


def alternating(rounds: int) -> Tuple[int, ...]:
    return tuple((i - 1) % 2 for i in range(1, rounds + 1))


def broadcast_bit() -> ExchangeProtocol:
    """Party 0 posts one coin and both output it; a silent party 0 means output 0."""
    return ExchangeProtocol((0,), "xor", "zero", name="broadcast-bit")


def xor_exchange(rounds: int, fill: str = "coin") -> ExchangeProtocol:
    suffix = "" if fill == "coin" else f"-{fill}"
    return ExchangeProtocol(alternating(rounds), "xor", fill, name=f"xor-{rounds}{suffix}")


def majority_exchange(rounds: int, fill: str = "coin") -> ExchangeProtocol:
    if rounds % 2 == 0:
        raise SpecError("majority needs an odd number of coins")
    return ExchangeProtocol(alternating(rounds), "majority", fill, name=f"majority-{rounds}")


def constant_protocol(rounds: int = 1) -> ExchangeProtocol:
    return ExchangeProtocol(alternating(rounds), "zero", "zero", name=f"constant-{rounds}")


def toy_suite() -> Dict[str, ExchangeProtocol]:
    """Consistent toy protocols with one to three rounds."""
    suite = [broadcast_bit(), xor_exchange(2), xor_exchange(3), majority_exchange(3),
             xor_exchange(2, "zero"), xor_exchange(3, "zero")]
    return {p.name: p for p in suite}
