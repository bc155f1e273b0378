"""The multiparty-to-two-party reduction for hybrid coin-flipping protocols
and the translation of a two-party attack back into a fail-stop attack.

The hybrid model here: parallel coin-flip calls, each made by one committee
under fairness with committee identifiable abort (an all-corrupted committee
is rushing and may abort after seeing the other parallel results).

Party 0 of the two-party protocol plays the parties in S (plus the aborting
sets J_i of the large-committee variant) and the trusted party; party 1 plays
everybody else.  A communication round of the hybrid protocol is one
two-party round in which both sides send; each coin-flip call is one round in
which party 0 sends the bit.  Call order inside a functionality round is
lexicographic by committee members.

When a party learns that its peer stopped, it finishes the emulation with
fresh coins for every call it has not yet seen (a fork of the coin source
tagged with the stopping point).  Backup values are therefore functions of
what the party has seen, which is what the translated attacker can compute.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..core import BROADCAST, Bot, Committee, is_bot
from ..engine import (
    AdversaryStrategy,
    Call,
    CallResult,
    CommunicationRound,
    Emulation,
    FunctionBehavior,
    FunctionalityRound,
    Message,
    ProtocolSpec,
    estimate,
    run,
)
from ..errors import SearchExhausted, SpecError
from ..functionalities import Abort, TrustedPartyType, f_cf
from ..randomness import ForkedSource, Namespace, SeededSource, derive_seed, enumerate_outcomes
from .twoparty import HALF, AttackSpec, BiasReport, CleveResult, TwoPartyProtocol, find_cleve_attacker

MAX_LEAVES = 1 << 22


def _fraction(beta) -> Fraction:
    return Fraction(beta).limit_denominator(10_000)


def default_pad(m: int, beta_prime: float, n: int) -> int:
    """c log n with c = log(m (32 m + 10)) / (beta' log n), rounded up."""
    if beta_prime <= 0 or n < 2 or m < 1:
        raise SpecError("need beta' > 0, n >= 2 and m >= 1")
    return math.ceil(round(math.log2(m * (32 * m + 10)) / beta_prime, 9))


@dataclass(frozen=True)
class TwoPartyEmbedding:
    """Which parties each side plays, the aborting sets and the padding size.

    ``pad`` is c log n: ``extend(C)`` has exactly that many members outside
    S and the aborting sets.
    """

    n: int
    beta: Fraction
    S: Tuple[int, ...]
    pad: int
    J: Tuple[Tuple[int, ...], ...] = ()

    def __post_init__(self):
        beta = _fraction(self.beta)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "S", tuple(sorted(set(self.S))))
        object.__setattr__(self, "J", tuple(tuple(sorted(set(j))) for j in self.J))
        n = self.n
        if not HALF < beta < 1:
            raise SpecError("need 1/2 < beta < 1")
        honest = (1 - beta) * n
        if honest.denominator != 1 or honest < 1:
            raise SpecError(f"(1 - beta) n = {honest} must be a positive integer")
        if len(self.S) != honest:
            raise SpecError(f"|S| must be (1 - beta) n = {honest}, got {len(self.S)}")
        if any(not 1 <= p <= n for p in self.S + tuple(p for j in self.J for p in j)):
            raise SpecError("party ids must lie in 1..n")
        if self.J:
            size = (beta - HALF) / len(self.J) * n
            seen = set(self.S)
            for j in self.J:
                if len(j) != size:
                    raise SpecError(f"each J_i needs beta' n = {size} parties, got {len(j)}")
                if seen & set(j):
                    raise SpecError("the aborting sets must be disjoint from each other and from S")
                seen |= set(j)
        if self.pad < 1:
            raise SpecError("the padding size must be positive")
        if len(self.free) - self.pad < honest:
            raise SpecError("too few parties outside S and J to pad a committee and still choose T")

    @property
    def honest_size(self) -> int:
        return int((1 - self.beta) * self.n)

    @property
    def aborting(self) -> FrozenSet[int]:
        return frozenset(p for j in self.J for p in j)

    @property
    def side0(self) -> Tuple[int, ...]:
        return tuple(sorted(set(self.S) | self.aborting))

    @property
    def side1(self) -> Tuple[int, ...]:
        return tuple(p for p in range(1, self.n + 1) if p not in self.side0)

    @property
    def free(self) -> Tuple[int, ...]:
        """Parties outside S and J; T and the padding come from here."""
        return self.side1

    def extend(self, committee: Iterable[int]) -> FrozenSet[int]:
        members = frozenset(committee)
        outside = sorted(members & set(self.free))
        if len(members) > self.pad or len(outside) > self.pad:
            return frozenset(self.free[:self.pad])
        extra = [p for p in self.free if p not in members][:self.pad - len(outside)]
        return members | frozenset(extra)

    def admissible_T(self, committee: Optional[Iterable[int]] = None) -> List[Tuple[int, ...]]:
        """Lexicographic list of candidate honest sets, avoiding extend(committee) if given."""
        avoid = self.extend(committee) if committee is not None else frozenset()
        pool = [p for p in self.free if p not in avoid]
        return list(itertools.combinations(pool, self.honest_size))

    def as_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "beta": str(self.beta), "S": list(self.S), "pad": self.pad,
                "J": [list(j) for j in self.J]}


@dataclass(frozen=True)
class Slot:
    index: int
    kind: str
    pi_round: int
    call_index: int = -1
    committee: Optional[Committee] = None


@dataclass
class _State:
    source: Any
    emus: Tuple[Emulation, Emulation]
    pending: Dict[int, Any]
    rho: int

    def clone(self) -> "_State":
        return _State(self.source, (self.emus[0].clone(), self.emus[1].clone()), dict(self.pending), self.rho)


def _is_hidden(key) -> bool:
    return not (len(key) > 0 and key[0] == "party")


def _check_hybrid(spec: ProtocolSpec) -> None:
    for r, rnd in enumerate(spec.rounds):
        if isinstance(rnd, CommunicationRound):
            continue
        if not rnd.static:
            raise SpecError(f"round {r}: the reduction needs a static call schedule")
        order = [c.committee.members for c in rnd.calls]
        if order != sorted(order):
            raise SpecError(f"round {r}: calls must be listed in lexicographic committee order")
        for c in rnd.calls:
            if not c.functionality.public_output or c.input_parties != ():
                raise SpecError(f"round {r}: calls must be input-free with a public output")


class HybridTwoParty(TwoPartyProtocol):
    """The two-party protocol induced by a hybrid coin-flipping protocol."""

    def __init__(self, spec: ProtocolSpec, embedding: TwoPartyEmbedding):
        if spec.n != embedding.n:
            raise SpecError("embedding and protocol disagree on n")
        spec.validate()
        _check_hybrid(spec)
        self.spec = spec
        self.embedding = embedding
        self.name = f"two-party[{spec.name}]"
        fround = [r for r, rnd in enumerate(spec.rounds) if isinstance(rnd, FunctionalityRound)]
        if embedding.J and len(embedding.J) != len(fround):
            raise SpecError(f"need one aborting set per functionality round ({len(fround)}), got {len(embedding.J)}")
        self.preaborted: Dict[int, Dict[int, Bot]] = {}
        slots: List[Slot] = []
        for r, rnd in enumerate(spec.rounds):
            if isinstance(rnd, CommunicationRound):
                slots.append(Slot(len(slots) + 1, "comm", r))
                continue
            j_set = set(embedding.J[fround.index(r)]) if embedding.J else set()
            self.preaborted[r] = {}
            for idx, call in enumerate(rnd.calls):
                hit = sorted(j_set & call.committee.as_set())
                if hit:
                    self.preaborted[r][idx] = Bot(frozenset((hit[0],)))
                else:
                    slots.append(Slot(len(slots) + 1, "bit", r, idx, call.committee))
        self.slots = tuple(slots)
        self.rounds = len(self.slots)
        self.sides = (embedding.side0, embedding.side1)

    # ---------------------------------------------------------- schedule

    def senders(self, i):
        return frozenset((0,)) if self.slots[i - 1].kind == "bit" else frozenset((0, 1))

    def slot_of(self, pi_round: int, call_index: int) -> Optional[Slot]:
        for s in self.slots:
            if s.pi_round == pi_round and s.call_index == call_index:
                return s
        return None

    def position_after(self, k: int) -> Tuple[int, Tuple[int, ...]]:
        """(first unfinished round, call indices already drawn in it) after slot k."""
        if k == 0:
            return 0, ()
        slot = self.slots[k - 1]
        if slot.kind == "comm":
            return slot.pi_round + 1, ()
        done = tuple(s.call_index for s in self.slots[:k] if s.pi_round == slot.pi_round)
        return slot.pi_round, done

    # ---------------------------------------------------------- execution

    def start(self, source):
        emus = tuple(Emulation(self.spec, side, source) for side in self.sides)
        return _State(source, emus, {}, 0)

    def _deliver_calls(self, emus: Sequence[Emulation], r: int, results: Mapping[int, Any]) -> None:
        calls = self.spec.rounds[r].calls
        everyone = tuple(range(1, self.spec.n + 1))
        for idx in sorted(results):
            call = calls[idx]
            recipients = call.recipients if call.recipients is not None else everyone
            for emu in emus:
                emu.deliver_result(r, idx, call, {p: results[idx] for p in recipients}, True)

    def _finish_round(self, state: _State) -> None:
        r = state.rho
        if isinstance(self.spec.rounds[r], FunctionalityRound):
            results = dict(self.preaborted[r])
            results.update(state.pending)
            self._deliver_calls(state.emus, r, results)
        state.pending = {}
        state.rho = r + 1

    def _draw(self, source, r: int, idx: int) -> Any:
        call = self.spec.rounds[r].calls[idx]
        return call.functionality.evaluate({}, Namespace(source, "call", r, idx), {})

    def step(self, state, i):
        new = state.clone()
        slot = self.slots[i - 1]
        while new.rho < slot.pi_round:
            self._finish_round(new)
        if slot.kind == "bit":
            new.pending[slot.call_index] = self._draw(new.source, slot.pi_round, slot.call_index)
            return new
        messages = [Message(slot.pi_round, p, recv, payload)
                    for side, emu in zip(self.sides, new.emus) for p in side
                    for recv, payload in emu.outgoing(p, slot.pi_round).items()]
        for m in messages:
            for emu in new.emus:
                emu.deliver(m)
        new.rho = slot.pi_round + 1
        return new

    def output(self, state, party):
        final = state.clone()
        while final.rho < len(self.spec.rounds):
            self._finish_round(final)
        return final.emus[party].output(min(self.sides[party]))

    def solo(self, state, party, k):
        return self.solo_from(state.emus[party], state.pending, state.rho, state.source, party, k)

    def solo_from(self, emu: Emulation, pending: Mapping[int, Any], rho: int, source, party: int, k: int) -> int:
        """Finish ``party``'s emulation alone after slot ``k``.

        Party 0 already holds the bit it would send next.  If party 0
        stopped while due to send a call's bit, party 1 treats the
        lowest member of that committee as having aborted the call, draws a
        random honest set T avoiding extend(committee), and from the next
        round on only T keeps sending.
        """
        fork = ForkedSource(source, _is_hidden, ("backup", party, k))
        emu = emu.clone()
        alive: Tuple[int, ...] = self.sides[party]
        upcoming = self.slots[k] if k < self.rounds and self.slots[k].kind == "bit" else None
        aborted_slot = upcoming if party == 1 else None
        own_bit = (upcoming.pi_round, upcoming.call_index) if party == 0 and upcoming is not None else None
        for r in range(rho, len(self.spec.rounds)):
            rnd = self.spec.rounds[r]
            if isinstance(rnd, CommunicationRound):
                msgs = [Message(r, p, recv, payload) for p in alive for recv, payload in emu.outgoing(p, r).items()]
                for m in msgs:
                    emu.deliver(m)
                continue
            results: Dict[int, Any] = {}
            for idx, call in enumerate(rnd.calls):
                if idx in self.preaborted[r]:
                    results[idx] = self.preaborted[r][idx]
                elif r == rho and idx in pending:
                    results[idx] = pending[idx]
                elif aborted_slot is not None and (r, idx) == (aborted_slot.pi_round, aborted_slot.call_index):
                    results[idx] = Bot(frozenset((call.committee.lowest,)))
                elif (r, idx) == own_bit:
                    results[idx] = self._draw(source, r, idx)
                else:
                    results[idx] = self._draw(fork, r, idx)
            self._deliver_calls((emu,), r, results)
            if aborted_slot is not None and r == aborted_slot.pi_round:
                options = self.embedding.admissible_T(aborted_slot.committee)
                alive = options[fork.draw(("T",), len(options))]
        return emu.output(min(alive))

    def side_state(self, party: int, events: Mapping[int, Sequence[Any]], results: Mapping[Tuple[int, int], Any],
                   k: int, source) -> Tuple[Emulation, Dict[int, Any], int]:
        """Rebuild one side's emulation after slot ``k`` from hybrid-protocol views.

        ``events`` are the views' events and ``results`` the call results known
        so far, keyed by (round, call index).
        """
        rho, done = self.position_after(k)
        emu = Emulation(self.spec, self.sides[party], source)
        for p in self.sides[party]:
            emu.events[p] = [e for e in events[p] if e.round < rho]
        pending = {idx: results[(rho, idx)] for idx in done}
        return emu, pending, rho


def build_two_party(spec: ProtocolSpec, embedding: TwoPartyEmbedding) -> HybridTwoParty:
    return HybridTwoParty(spec, embedding)


# ------------------------------------------------------------ toy hybrid protocol

TOY_PHASES = (((1, 2), (3, 4), (5, 6)), ((1, 3), (2, 5), (4, 6)))


def toy_hybrid_protocol(n: int = 6, phases: Sequence[Sequence[Sequence[int]]] = TOY_PHASES) -> ProtocolSpec:
    """Phases of parallel coin flips separated by communication rounds in
    which everybody broadcasts "ready".  Everybody outputs the xor over
    phases of the majority of that phase's bits, reading an aborted call
    as 0."""
    f = f_cf(n)
    rounds: List[Any] = []
    positions: List[Tuple[int, int]] = []
    for k, committees in enumerate(phases):
        if k:
            rounds.append(CommunicationRound("ready"))
        ordered = [Committee.of(c) for c in sorted(tuple(sorted(c)) for c in committees)]
        calls = tuple(Call(c, f, TrustedPartyType.restricted_id_fair((c,)), input_parties=(), label=f"phase{k}-{i}")
                      for i, c in enumerate(ordered))
        positions.append((len(rounds), len(calls)))
        rounds.append(FunctionalityRound(calls, f"phase-{k}"))

    def majority(view, r, count):
        bits = [view.result(r, idx) for idx in range(count)]
        return int(2 * sum(0 if is_bot(b) else b for b in bits) > count)

    def send(view, r):
        return {BROADCAST: "ready"} if isinstance(rounds[r], CommunicationRound) else {}

    def output(view):
        value = 0
        for r, count in positions:
            value ^= majority(view, r, count)
        return value

    return ProtocolSpec(n, tuple(rounds), FunctionBehavior(send=send, output=output), "toy-hybrid")


def toy_embedding() -> TwoPartyEmbedding:
    return TwoPartyEmbedding(6, Fraction(2, 3), (1, 2), 2)


# ------------------------------------------------------------ translation

def _round_functionality_index(spec: ProtocolSpec) -> Dict[int, int]:
    return {r: i for i, r in enumerate(r for r, rnd in enumerate(spec.rounds) if isinstance(rnd, FunctionalityRound))}


class AbortingSets(AdversaryStrategy):
    """Parties in J_i abort every call of the i-th functionality round whose
    committee they belong to, naming their lowest member in it."""

    name = "aborting-sets"

    def __init__(self, spec: ProtocolSpec, J: Sequence[Sequence[int]], corrupted: Optional[Iterable[int]] = None):
        J = tuple(tuple(sorted(j)) for j in J)
        base = set(p for j in J for p in j)
        super().__init__(base if corrupted is None else set(corrupted) | base)
        self.J = J
        self.findex = _round_functionality_index(spec)

    def _j_abort(self, ctx) -> Optional[Abort]:
        i = self.findex.get(ctx.round_index)
        if i is None or i >= len(self.J):
            return None
        hit = sorted(set(self.J[i]) & ctx.call.committee.as_set())
        return Abort((hit[0],)) if hit else None

    def early_abort(self, ctx):
        return self._j_abort(ctx)

    def dictate(self, ctx, inputs, outputs):
        return self._j_abort(ctx)


class TranslatedAttack(AbortingSets):
    """Fail-stop attack on the hybrid protocol that replays a two-party attack.

    Party 0 attacks on a call slot (corrupting [n] minus T): when
    extend(C*) is corrupted, the attacker waits for the parallel results,
    computes party 0's backup value from the corrupted views, and if it
    matches has the lowest member of C* abort the call; everybody corrupted
    then stops sending.  Otherwise it plays honestly.  Party 0 attacking on a
    communication slot stops the parties of side 0.  Party 1 attacks
    (corrupting everybody outside S) stop side 1 at the first communication
    round at or after i*.
    """

    name = "translated"

    def __init__(self, psi: HybridTwoParty, attack: AttackSpec, T: Optional[Sequence[int]] = None,
                 skip_large: bool = True):
        attack.check(psi.rounds)
        emb = psi.embedding
        self.psi = psi
        self.attack = attack
        slot = psi.slots[attack.i_star - 1]
        self.slot = slot
        if attack.attacker == 0:
            if T is None:
                raise SpecError("a party-0 attack needs the honest set T")
            T = tuple(sorted(T))
            if len(T) != emb.honest_size or not set(T) <= set(emb.free):
                raise SpecError(f"T must be a size-{emb.honest_size} subset of the parties outside S and J")
            corrupted = set(range(1, emb.n + 1)) - set(T)
            self.T = T
        else:
            corrupted = set(range(1, emb.n + 1)) - set(emb.S)
            self.T = tuple(emb.S)
        super().__init__(psi.spec, emb.J, corrupted)
        self.armed = True
        if attack.attacker == 0 and slot.kind == "bit":
            large = len(slot.committee) > emb.pad
            self.armed = emb.extend(slot.committee) <= self.corrupted and not (skip_large and large)
        self.decision = next((s for s in psi.slots[attack.i_star - 1:] if attack.attacker in psi.senders(s.index)),
                             None)
        self.stopped: FrozenSet[int] = frozenset()
        self.stop_after = len(psi.spec.rounds)
        self.decided = False

    def describe(self):
        out = super().describe()
        out.update({"attack": self.attack.as_dict(), "T": list(self.T), "armed": self.armed})
        return out

    def _backup(self, views, results) -> int:
        party = self.attack.attacker
        events = {p: views[p].events for p in self.psi.sides[party]}
        k = self.attack.j_star - 1
        emu, pending, rho = self.psi.side_state(party, events, results, k, self.run.source)
        return self.psi.solo_from(emu, pending, rho, self.run.source, party, k)

    @staticmethod
    def _known_results(views) -> Dict[Tuple[int, int], Any]:
        known = {}
        for view in views.values():
            for e in view.events:
                if isinstance(e, CallResult):
                    known[(e.round, e.index)] = e.value
        return known

    def send(self, ctx):
        r = ctx.round_index
        slot = self.decision
        if self.armed and not self.decided and slot is not None and slot.kind == "comm" and r == slot.pi_round:
            self.decided = True
            if self._backup(ctx.views, self._known_results(ctx.views)) == self.attack.b:
                self.stopped = frozenset(self.psi.sides[self.attack.attacker]) & self.corrupted
                self.stop_after = r - 1
        if r > self.stop_after:
            return {p: ({} if p in self.stopped else msgs) for p, msgs in ctx.defaults.items()}
        return ctx.defaults

    def dictate(self, ctx, inputs, outputs):
        j_abort = self._j_abort(ctx)
        if j_abort is not None:
            return j_abort
        slot = self.decision
        if (self.armed and not self.decided and slot is not None and slot.kind == "bit"
                and (ctx.round_index, ctx.call_index) == (slot.pi_round, slot.call_index)):
            self.decided = True
            known = self._known_results(ctx.views)
            known.update({(ctx.round_index, idx): value for idx, value in ctx.info.visible})
            if self._backup(ctx.views, known) == self.attack.b:
                self.stopped = self.corrupted
                self.stop_after = ctx.round_index
                return Abort((slot.committee.lowest,))
        return None


def translate_attack(psi: HybridTwoParty, attack: AttackSpec, T: Optional[Sequence[int]] = None,
                     skip_large: bool = True) -> TranslatedAttack:
    return TranslatedAttack(psi, attack, T, skip_large)


# ------------------------------------------------------------ measurement

def _bit(value: Any) -> int:
    if value not in (0, 1):
        raise SpecError(f"honest output {value!r} is not a bit")
    return int(value)


def measure_bias(spec: ProtocolSpec, strategy: Optional[AdversaryStrategy] = None, mode: str = "exact",
                 trials: int = 1000, seed: int = 0, max_leaves: int = MAX_LEAVES) -> BiasReport:
    """Bias of the lowest honest party's output.

    "exact" enumerates every coin the parties, the trusted party and the
    attacker draw; "monte_carlo" averages ``trials`` seeded runs.
    """
    if mode == "exact":
        total = Fraction(0)
        leaves = 0
        for prob, value in enumerate_outcomes(lambda src: _bit(run(spec, strategy, source=src).common_output()),
                                              max_leaves):
            total += prob * value
            leaves += 1
        return BiasReport(total, leaves, 0.0, True)
    if mode == "monte_carlo":
        summary = estimate(spec, strategy, trials, seed, statistic=lambda res: _bit(res.common_output()))
        return BiasReport(summary.mean, trials, summary.stderr or 0.0, False)
    raise SpecError(f"unknown mode {mode!r}")


def psi_bias(psi: HybridTwoParty, attack: AttackSpec, skip_large: bool = True,
             max_leaves: int = MAX_LEAVES) -> BiasReport:
    """Exact bias of the honest party in the two-party protocol, with the
    attacker that never aborts a committee larger than the padding size."""
    from .twoparty import attack_bias

    slot = psi.slots[attack.i_star - 1]
    if skip_large and attack.attacker == 0 and slot.kind == "bit" and len(slot.committee) > psi.embedding.pad:
        from .twoparty import exact_mean
        mean, leaves = exact_mean(psi, None, (), max_leaves)
        return BiasReport(mean, leaves, 0.0, True)
    return attack_bias(psi, attack, max_leaves)


def small_committee_bound(m: int, beta, n: int, pad: int) -> Fraction:
    """1/(16 m + 4) times Pr[T misses extend(C*)] = C((2 beta - 1) n, pad) / C(beta n, pad)."""
    beta = _fraction(beta)
    pool = (2 * beta - 1) * n
    total = beta * n
    if pool.denominator != 1 or total.denominator != 1:
        raise SpecError("beta n must be an integer")
    return Fraction(math.comb(int(pool), pad), math.comb(int(total), pad)) / (16 * m + 4)


def closed_form_bound(m: int, beta, pad: int) -> float:
    """The looser 1/(16 m + 4) ((2 beta - 1) / (beta e)) ** pad."""
    beta = float(beta)
    return ((2 * beta - 1) / (beta * math.e)) ** pad / (16 * m + 4)


@dataclass(frozen=True)
class PipelineReport:
    """Outcome of the reduction on one hybrid protocol.

    ``route`` is "cleve" when the two-party protocol is a fair coin and a
    translated single-round attack is measured, or "aborting-sets" when the
    aborting sets alone already bias it.  ``conditioned_signed`` averages the
    runs in which the attack is armed and must equal the two-party deviation.
    """

    route: str
    cleve: Optional[CleveResult]
    psi_report: BiasReport
    per_T: Tuple[Tuple[Tuple[int, ...], BiasReport, bool], ...]
    average_signed: Fraction
    conditioned_signed: Optional[Fraction]
    bound: Fraction
    probability_all_corrupted: Fraction

    @property
    def average_bias(self) -> Fraction:
        return abs(self.average_signed)

    @property
    def fidelity(self) -> Optional[bool]:
        if self.conditioned_signed is None:
            return None
        return self.conditioned_signed == self.psi_report.signed

    def as_dict(self) -> Dict[str, Any]:
        return {
            "route": self.route,
            "cleve": self.cleve.as_dict() if self.cleve is not None else None,
            "psi": self.psi_report.as_dict(),
            "per_T": [{"T": list(T), "armed": armed, **rep.as_dict()} for T, rep, armed in self.per_T],
            "average_bias": float(self.average_bias),
            "average_bias_fraction": str(self.average_bias),
            "conditioned_signed": None if self.conditioned_signed is None else str(self.conditioned_signed),
            "fidelity": self.fidelity,
            "bound": str(self.bound),
            "bound_met": self.average_bias >= self.bound,
            "probability_all_corrupted": str(self.probability_all_corrupted),
        }


def lower_bound_pipeline(spec: ProtocolSpec, embedding: TwoPartyEmbedding,
                         attack: Optional[AttackSpec] = None, max_leaves: int = MAX_LEAVES) -> PipelineReport:
    """Build the two-party protocol, find the best single-round attacker
    (or use ``attack``), translate it for every admissible T and measure
    the hybrid protocol's bias exactly."""
    from .twoparty import consistency, exact_mean

    psi = build_two_party(spec, embedding)
    bound = small_committee_bound(psi.rounds, embedding.beta, embedding.n, embedding.pad)
    honest = consistency(psi, max_leaves)
    if embedding.J and (honest.mean0 != HALF or honest.mean1 != HALF):
        mean, leaves = exact_mean(psi, None, (), max_leaves)
        report = measure_bias(spec, AbortingSets(spec, embedding.J), "exact", max_leaves=max_leaves)
        return PipelineReport("aborting-sets", None, BiasReport(mean, leaves, 0.0, True),
                              (((), report, True),), report.signed, report.signed, bound, Fraction(1))
    cleve = find_cleve_attacker(psi, max_leaves)
    attack = attack or cleve.attack
    psi_report = psi_bias(psi, attack, max_leaves=max_leaves)
    per_T = []
    candidates = embedding.admissible_T() if attack.attacker == 0 else [tuple(embedding.S)]
    for T in candidates:
        strategy = translate_attack(psi, attack, T)
        per_T.append((tuple(T), measure_bias(spec, strategy, "exact", max_leaves=max_leaves), strategy.armed))
    average = sum((rep.signed for _, rep, _ in per_T), Fraction(0)) / len(per_T)
    armed = [rep.signed for _, rep, a in per_T if a]
    conditioned = sum(armed, Fraction(0)) / len(armed) if armed else None
    slot = psi.slots[attack.i_star - 1]
    if attack.attacker == 0 and slot.kind == "bit":
        probability = Fraction(len(embedding.admissible_T(slot.committee)), len(candidates))
    else:
        probability = Fraction(1)
    return PipelineReport("cleve", cleve, psi_report, tuple(per_T), average, conditioned, bound, probability)


# ------------------------------------------------------------ aborting sets

def sample_disjoint_subsets(n: int, count: int, size: int, rng) -> Tuple[Tuple[int, ...], ...]:
    if count * size > n:
        raise SpecError(f"{count} disjoint subsets of size {size} do not fit in {n} parties")
    perm = [int(p) + 1 for p in rng.permutation(n)]
    return tuple(tuple(sorted(perm[i * size:(i + 1) * size])) for i in range(count))


def large_call_escape_rate(spec: ProtocolSpec, J: Sequence[Sequence[int]], pad: int, trials: int,
                           seed: int = 0) -> Tuple[float, ...]:
    """Per functionality round, the fraction of runs (with J_i aborting) in
    which some committee larger than ``pad`` calls without meeting J_i."""
    findex = _round_functionality_index(spec)
    rounds = sorted(findex, key=findex.get)[:len(J)]
    hits = [0] * len(rounds)
    adversary = AbortingSets(spec, J)
    for k in range(trials):
        result = run(spec, adversary, derive_seed(seed, "escape", k))
        for pos, r in enumerate(rounds):
            record = result.transcript[r]
            if any(len(c.committee) > pad and not set(c.committee) & set(J[pos]) for c in record.calls):
                hits[pos] += 1
    return tuple(h / trials for h in hits)


def choose_good_subsets(spec: ProtocolSpec, s: int, beta_prime: float, pad: int, m: Optional[int] = None,
                        trials: int = 200, retries: int = 50, seed: int = 0) -> Tuple[Tuple[int, ...], ...]:
    """Sample s disjoint beta' n subsets until every functionality round's
    escape rate is at most 1 / (32 m + 10)."""
    if s == 0:
        return ()
    n = spec.n
    size = int(math.floor(beta_prime * n + 1e-9))
    if size < 1:
        raise SpecError("beta' n must be at least one party")
    m = m if m is not None else len(spec.rounds)
    threshold = 1 / (32 * m + 10)
    rng = SeededSource(seed).numpy("good-subsets")
    for _ in range(retries):
        J = sample_disjoint_subsets(n, s, size, rng)
        rates = large_call_escape_rate(spec, J, pad, trials, seed)
        if all(rate <= threshold for rate in rates):
            return J
    raise SearchExhausted(f"no aborting sets passed within {retries} samples")
