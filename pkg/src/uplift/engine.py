"""Deterministic synchronous execution engine.

A protocol is a schedule of rounds plus one ``PartyBehavior`` shared by all
parties.  Communication rounds have a send phase followed by a receive phase;
corrupted parties act after the honest messages of the round are fixed
(rushing).  Functionality rounds hold zero or more parallel trusted-party
calls, each made by a committee.

Behaviours are pure functions of a ``View``: the party's input, the ordered
events it has observed and its keyed coins.  The engine never hands a
behaviour anything else, which gives honest-view isolation by construction.
"""

from __future__ import annotations

import copy
import json
import math
from collections import Counter as _Counter
from dataclasses import dataclass, field
from typing import Any, Callable, ClassVar, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .core import ABSENT, BROADCAST, Bot, Committee, digest, jsonable
from .errors import ProtocolViolation, SpecError
from .functionalities import Abort, CallHooks, CallInfo, FunctionalitySpec, TrustedPartyType, tp_execute
from .randomness import Namespace, SeededSource, derive_seed


# ---------------------------------------------------------------- events

@dataclass(frozen=True)
class Message:
    round: int
    sender: int
    receiver: int
    payload: Any


@dataclass(frozen=True)
class CallResult:
    round: int
    index: int
    committee: Committee
    name: str
    value: Any


@dataclass(frozen=True)
class View:
    """Everything a party may base its behaviour on."""

    pid: int
    n: int
    input: Any
    events: Tuple[Any, ...]
    coins: Namespace

    def messages(self, round_index: Optional[int] = None) -> List[Message]:
        return [e for e in self.events if isinstance(e, Message) and (round_index is None or e.round == round_index)]

    def received(self, round_index: int, sender: int) -> Any:
        """Point-to-point payload from ``sender`` in a round, or ABSENT."""
        for e in self.events:
            if isinstance(e, Message) and e.round == round_index and e.sender == sender and e.receiver == self.pid:
                return e.payload
        return ABSENT

    def broadcast(self, round_index: int, sender: int) -> Any:
        for e in self.events:
            if isinstance(e, Message) and e.round == round_index and e.sender == sender and e.receiver == BROADCAST:
                return e.payload
        return ABSENT

    def broadcasts(self, round_index: int) -> Dict[int, Any]:
        return {e.sender: e.payload for e in self.events
                if isinstance(e, Message) and e.round == round_index and e.receiver == BROADCAST}

    def results(self, round_index: Optional[int] = None) -> List[CallResult]:
        return [e for e in self.events if isinstance(e, CallResult) and (round_index is None or e.round == round_index)]

    def result(self, round_index: int, call_index: int = 0) -> Any:
        for e in self.events:
            if isinstance(e, CallResult) and e.round == round_index and e.index == call_index:
                return e.value
        return ABSENT


# ---------------------------------------------------------------- schedule

@dataclass(frozen=True)
class Call:
    """One trusted-party invocation made by ``committee``.

    ``input_parties`` default to the committee, ``recipients`` to all parties.
    ``simulated_by`` lists (member, simulator) pairs: the simulator plays the
    member inside this call, so the member counts as corrupted exactly when its
    simulator is, and it contributes the functionality's default input.
    """

    committee: Committee
    functionality: FunctionalitySpec
    tp: TrustedPartyType
    input_parties: Optional[Tuple[int, ...]] = None
    recipients: Optional[Tuple[int, ...]] = None
    simulated_by: Tuple[Tuple[int, int], ...] = ()
    state_key: Optional[str] = None
    label: str = ""


@dataclass(frozen=True)
class CommunicationRound:
    label: str = ""
    kind: ClassVar[str] = "communication"


@dataclass(frozen=True)
class FunctionalityRound:
    """Parallel calls.  ``calls`` may be a function of the public log (all
    broadcasts and public call results so far) and the round index."""

    calls: Union[Tuple[Call, ...], Callable[[Tuple[Any, ...], int], Sequence[Call]]] = ()
    label: str = ""
    kind: ClassVar[str] = "functionality"

    def resolve(self, public: Tuple[Any, ...], round_index: int) -> Tuple[Call, ...]:
        calls = self.calls(public, round_index) if callable(self.calls) else self.calls
        return tuple(calls or ())

    @property
    def static(self) -> bool:
        return not callable(self.calls)


RoundSpec = Union[CommunicationRound, FunctionalityRound]


class PartyBehavior:
    """Next-message behaviour shared by all parties."""

    def send(self, view: View, round_index: int) -> Mapping[int, Any]:
        return {}

    def call_input(self, view: View, round_index: int, call: Call) -> Any:
        return None

    def output(self, view: View) -> Any:
        return None


class FunctionBehavior(PartyBehavior):
    """Behaviour assembled from plain functions."""

    def __init__(self, send=None, call_input=None, output=None):
        self._send = send
        self._call_input = call_input
        self._output = output

    def send(self, view, round_index):
        return self._send(view, round_index) if self._send else {}

    def call_input(self, view, round_index, call):
        return self._call_input(view, round_index, call) if self._call_input else None

    def output(self, view):
        return self._output(view) if self._output else None


@dataclass(frozen=True)
class ProtocolSpec:
    n: int
    rounds: Tuple[RoundSpec, ...]
    behavior: PartyBehavior
    name: str = "protocol"

    def validate(self) -> None:
        if self.n < 1:
            raise SpecError("need at least one party")
        for r, rnd in enumerate(self.rounds):
            if not isinstance(rnd, (CommunicationRound, FunctionalityRound)):
                raise SpecError(f"round {r} has unknown kind {type(rnd).__name__}")
            if isinstance(rnd, FunctionalityRound) and rnd.static:
                for call in rnd.calls:
                    _check_call(call, self.n, r)


def _check_call(call: Call, n: int, r: int) -> None:
    if not isinstance(call, Call):
        raise SpecError(f"round {r}: expected a Call, got {type(call).__name__}")
    call.committee.check_within(n)
    for c in call.tp.committees:
        c.check_within(n)
    for group in (call.input_parties or (), call.recipients or ()):
        if any(not 1 <= p <= n for p in group):
            raise SpecError(f"round {r}: party id out of range in call {call.label or call.functionality.name}")


# ---------------------------------------------------------------- adversary

@dataclass(frozen=True)
class SendContext:
    round_index: int
    defaults: Dict[int, Dict[int, Any]]
    visible: Tuple[Message, ...]
    traffic: Tuple[Tuple[int, int, Any], ...]
    views: Mapping[int, View]


@dataclass(frozen=True)
class CallContext:
    info: CallInfo
    call: Call
    round_index: int
    call_index: int
    views: Mapping[int, View]


@dataclass
class RunContext:
    spec: ProtocolSpec
    corrupted: FrozenSet[int]
    coins: Namespace
    source: Any
    emulation: "Emulation"

    def view(self, pid: int) -> View:
        if pid not in self.corrupted:
            raise ProtocolViolation("the adversary only sees corrupted parties' views")
        return self.emulation.view(pid)


class AdversaryStrategy:
    """Base strategy: corrupts parties but behaves honestly.

    Subclasses override ``send`` and the call hooks.  A fail-stop strategy may
    only omit messages, withhold inputs and abort calls; the engine raises
    ``ProtocolViolation`` on anything else.
    """

    name = "honest"

    def __init__(self, corrupted: Iterable[int] = (), fail_stop: bool = True, rushing: bool = True):
        self.corrupted = frozenset(corrupted)
        self.fail_stop = fail_stop
        self.rushing = rushing
        self.run: Optional[RunContext] = None

    def setup(self, run: RunContext) -> None:
        self.run = run

    def send(self, ctx: SendContext) -> Dict[int, Dict[int, Any]]:
        return ctx.defaults

    def substitute(self, ctx: CallContext, inputs: Dict[int, Any]) -> Dict[int, Any]:
        return inputs

    def early_abort(self, ctx: CallContext) -> Optional[Abort]:
        return None

    def late_abort(self, ctx: CallContext, corrupted_outputs: Mapping[int, Any]) -> Optional[Abort]:
        return None

    def dictate(self, ctx: CallContext, inputs: Mapping[int, Any], outputs: Mapping[int, Any]):
        return None

    def respond(self, ctx: CallContext, query: Any) -> Any:
        return None

    def describe(self) -> Dict[str, Any]:
        return {"name": self.name, "corrupted": sorted(self.corrupted)}


class _StrategyHooks(CallHooks):
    def __init__(self, adversary: AdversaryStrategy, call: Call, r: int, idx: int, views):
        self.adversary = adversary
        self.call = call
        self.r = r
        self.idx = idx
        self.views = views

    def _ctx(self, info):
        return CallContext(info, self.call, self.r, self.idx, self.views)

    def substitute(self, info, inputs):
        new = self.adversary.substitute(self._ctx(info), dict(inputs))
        if self.adversary.fail_stop:
            for p, x in new.items():
                if p in inputs and x is not ABSENT and x != inputs[p]:
                    raise ProtocolViolation(f"fail-stop party {p} may not change its input")
        return new

    def early_abort(self, info):
        return self.adversary.early_abort(self._ctx(info))

    def late_abort(self, info, corrupted_outputs):
        return self.adversary.late_abort(self._ctx(info), corrupted_outputs)

    def dictate(self, info, inputs, outputs):
        decision = self.adversary.dictate(self._ctx(info), inputs, outputs)
        if decision is not None and not isinstance(decision, Abort) and self.adversary.fail_stop:
            raise ProtocolViolation("a fail-stop adversary may abort but not dictate outputs")
        return decision

    def respond(self, info, query):
        return self.adversary.respond(self._ctx(info), query)


# ---------------------------------------------------------------- results

@dataclass(frozen=True)
class CallRecord:
    round: int
    index: int
    committee: Tuple[int, ...]
    functionality: str
    tp: str
    aborted: bool
    phase: Optional[str]
    identified: Tuple[int, ...]
    dictated: bool
    sampled: bool
    result: str

    def to_json(self) -> Dict[str, Any]:
        return {
            "round": self.round, "index": self.index, "committee": list(self.committee),
            "functionality": self.functionality, "tp": self.tp, "aborted": self.aborted,
            "phase": self.phase, "identified": list(self.identified), "dictated": self.dictated,
            "result": self.result,
        }


@dataclass(frozen=True)
class RoundRecord:
    index: int
    kind: str
    label: str
    messages: Tuple[Tuple[int, int, str, bool], ...]
    calls: Tuple[CallRecord, ...]

    @property
    def active(self) -> bool:
        return bool(self.messages or self.calls)

    def to_json(self) -> Dict[str, Any]:
        return {
            "round": self.index, "kind": self.kind, "label": self.label,
            "messages": [{"sender": s, "receiver": r, "payload": h, "delivered": d} for s, r, h, d in self.messages],
            "calls": [c.to_json() for c in self.calls],
        }


@dataclass(frozen=True)
class ExecutionResult:
    outputs: Dict[int, Any]
    corrupted: FrozenSet[int]
    transcript: Tuple[RoundRecord, ...]
    rounds_used: int
    functionality_rounds_used: int
    calls_made: int
    identified: FrozenSet[int]

    @property
    def call_ledger(self) -> Tuple[CallRecord, ...]:
        return tuple(c for r in self.transcript for c in r.calls)

    def honest_outputs(self) -> Dict[int, Any]:
        return {p: v for p, v in self.outputs.items() if p not in self.corrupted}

    def common_output(self) -> Any:
        """Output of the lowest-index honest party."""
        honest = self.honest_outputs()
        return honest[min(honest)] if honest else None

    def agreement(self) -> bool:
        values = list(self.honest_outputs().values())
        return all(v == values[0] for v in values)

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(r.to_json(), sort_keys=True) for r in self.transcript) + "\n"


# ---------------------------------------------------------------- emulation

class Emulation:
    """Per-party views for a subset of parties.

    The engine emulates every party; the two-party reduction emulates the
    parties one side controls and injects the other side's messages.
    """

    def __init__(self, spec: ProtocolSpec, parties: Iterable[int], source, inputs: Optional[Sequence[Any]] = None):
        self.spec = spec
        self.source = source
        self.parties = tuple(sorted(parties))
        self.inputs = tuple(inputs) if inputs is not None else (None,) * spec.n
        if len(self.inputs) != spec.n:
            raise SpecError(f"expected {spec.n} inputs, got {len(self.inputs)}")
        self.events: Dict[int, List[Any]] = {p: [] for p in self.parties}
        self.public: List[Any] = []

    def clone(self) -> "Emulation":
        other = Emulation.__new__(Emulation)
        other.spec, other.source, other.parties, other.inputs = self.spec, self.source, self.parties, self.inputs
        other.events = {p: list(v) for p, v in self.events.items()}
        other.public = list(self.public)
        return other

    def view(self, pid: int, source=None) -> View:
        coins = Namespace(source if source is not None else self.source, "party", pid)
        return View(pid, self.spec.n, self.inputs[pid - 1], tuple(self.events[pid]), coins)

    def outgoing(self, pid: int, r: int, source=None) -> Dict[int, Any]:
        out = self.spec.behavior.send(self.view(pid, source), r) or {}
        clean = {}
        for receiver, payload in out.items():
            if receiver != BROADCAST and not 1 <= receiver <= self.spec.n:
                raise SpecError(f"party {pid} addressed unknown receiver {receiver}")
            if receiver == pid:
                continue
            clean[int(receiver)] = payload
        return dict(sorted(clean.items()))

    def deliver(self, msg: Message) -> None:
        if msg.receiver == BROADCAST:
            for p in self.parties:
                self.events[p].append(msg)
            self.public.append(msg)
        elif msg.receiver in self.events:
            self.events[msg.receiver].append(msg)

    def deliver_result(self, r: int, idx: int, call: Call, outputs: Mapping[int, Any], public: bool) -> None:
        for p in sorted(outputs):
            if p in self.events:
                self.events[p].append(CallResult(r, idx, call.committee, call.functionality.name, outputs[p]))
        if public and outputs:
            value = outputs[min(outputs)]
            self.public.append(CallResult(r, idx, call.committee, call.functionality.name, value))

    def call_input(self, pid: int, r: int, call: Call, source=None) -> Any:
        return self.spec.behavior.call_input(self.view(pid, source), r, call)

    def output(self, pid: int, source=None) -> Any:
        return self.spec.behavior.output(self.view(pid, source))


class _LazyViews(Mapping):
    """Corrupted parties' views, built on first access."""

    def __init__(self, emulation: Emulation, parties: Iterable[int]):
        self.emulation = emulation
        self.parties = tuple(sorted(parties))
        self.cache: Dict[int, View] = {}

    def __getitem__(self, pid: int) -> View:
        if pid not in self.parties:
            raise KeyError(pid)
        if pid not in self.cache:
            self.cache[pid] = self.emulation.view(pid)
        return self.cache[pid]

    def __iter__(self):
        return iter(self.parties)

    def __len__(self) -> int:
        return len(self.parties)


def _effective_corruption(call: Call, corrupted: FrozenSet[int]) -> FrozenSet[int]:
    if not call.simulated_by:
        return corrupted
    simulated = {m for m, _ in call.simulated_by}
    acting = {m for m, sim in call.simulated_by if sim in corrupted}
    return frozenset((corrupted - simulated) | acting)


class _Runner:
    def __init__(self, spec, adversary, source, inputs, channels):
        self.spec = spec
        self.adversary = adversary
        self.source = source
        self.channels = channels
        self.corrupted = adversary.corrupted
        self.emulation = Emulation(spec, range(1, spec.n + 1), source, inputs)
        self.states: Dict[Any, dict] = {}
        self.records: List[RoundRecord] = []

    def corrupted_views(self) -> Mapping[int, View]:
        return _LazyViews(self.emulation, self.corrupted)

    def communication(self, r: int, rnd: CommunicationRound) -> None:
        emu = self.emulation
        defaults = {p: emu.outgoing(p, r) for p in range(1, self.spec.n + 1)}
        honest_msgs = [Message(r, p, recv, payload)
                       for p in range(1, self.spec.n + 1) if p not in self.corrupted
                       for recv, payload in defaults[p].items()]
        chosen: Dict[int, Dict[int, Any]] = {}
        if self.corrupted:
            visible = tuple(m for m in honest_msgs if m.receiver == BROADCAST or m.receiver in self.corrupted)
            traffic = tuple(
                (m.sender, m.receiver, m.payload if self.channels == "authenticated" else digest(m.payload))
                for m in honest_msgs if m.receiver != BROADCAST and m.receiver not in self.corrupted
            )
            ctx = SendContext(
                r,
                {p: dict(defaults[p]) for p in sorted(self.corrupted)},
                visible if self.adversary.rushing else (),
                traffic if self.adversary.rushing else (),
                self.corrupted_views(),
            )
            chosen = self.adversary.send(ctx) or {}
            for p in chosen:
                if p not in self.corrupted:
                    raise ProtocolViolation(f"adversary tried to send for honest party {p}")
        log = []
        deliveries = []
        for p in range(1, self.spec.n + 1):
            if p not in self.corrupted:
                for recv, payload in defaults[p].items():
                    deliveries.append(Message(r, p, recv, payload))
                    log.append((p, recv, digest(payload), True))
                continue
            actual = chosen.get(p, {})
            if self.adversary.fail_stop:
                for recv, payload in actual.items():
                    if recv not in defaults[p] or defaults[p][recv] != payload:
                        raise ProtocolViolation(f"fail-stop party {p} may only omit messages")
            for recv, payload in defaults[p].items():
                if recv in actual:
                    deliveries.append(Message(r, p, recv, actual[recv]))
                    log.append((p, recv, digest(actual[recv]), True))
                else:
                    deliveries.append(Message(r, p, recv, ABSENT))
                    log.append((p, recv, digest(ABSENT), False))
            for recv, payload in actual.items():
                if recv not in defaults[p]:
                    deliveries.append(Message(r, p, recv, payload))
                    log.append((p, recv, digest(payload), True))
        for m in deliveries:
            emu.deliver(m)
        self.records.append(RoundRecord(r, rnd.kind, rnd.label, tuple(log), ()))

    def functionality(self, r: int, rnd: FunctionalityRound) -> None:
        emu = self.emulation
        calls = rnd.resolve(tuple(emu.public), r)
        if not calls:
            self.records.append(RoundRecord(r, rnd.kind, rnd.label, (), ()))
            return
        for call in calls:
            _check_call(call, self.spec.n, r)
        outcomes: Dict[int, Any] = {}
        effective = [_effective_corruption(c, self.corrupted) for c in calls]
        rushing = [idx for idx, c in enumerate(calls) if c.committee.as_set() <= effective[idx]]
        order = [idx for idx in range(len(calls)) if idx not in rushing] + rushing
        views = self.corrupted_views()
        for idx in order:
            call = calls[idx]
            visible: Tuple[Tuple[int, Any], ...] = ()
            if idx in rushing:
                visible = tuple(sorted((j, _visible_value(calls[j], outcomes[j], self.corrupted)) for j in outcomes))
            outcomes[idx] = self._call(r, idx, call, effective[idx], visible, views)
        ledger = []
        for idx, call in enumerate(calls):
            out = outcomes[idx]
            public = call.functionality.public_output or out.aborted
            emu.deliver_result(r, idx, call, out.outputs, public)
            ledger.append(CallRecord(
                r, idx, call.committee.members, call.functionality.name, call.tp.label(), out.aborted,
                out.phase, tuple(sorted(out.identified)), out.dictated, out.sampled,
                digest(out.outputs),
            ))
        self.records.append(RoundRecord(r, rnd.kind, rnd.label, (), tuple(ledger)))

    def _call(self, r, idx, call, corrupted, visible, views):
        emu = self.emulation
        parties = call.input_parties if call.input_parties is not None else call.committee.members
        simulated = dict(call.simulated_by)
        inputs = {}
        for p in parties:
            if p in simulated:
                inputs[p] = call.functionality.default_input
            else:
                inputs[p] = emu.call_input(p, r, call)
        recipients = call.recipients if call.recipients is not None else tuple(range(1, self.spec.n + 1))
        key = call.state_key
        state = self.states.setdefault(key, {}) if key is not None else {}
        hooks = _StrategyHooks(self.adversary, call, r, idx, views)
        return tp_execute(
            call.functionality, call.tp, inputs, corrupted, hooks,
            Namespace(self.source, "call", r, idx), recipients, call.committee.members,
            state, visible, r, idx,
        )

    def finish(self) -> ExecutionResult:
        outputs = {}
        for p in range(1, self.spec.n + 1):
            outputs[p] = None if p in self.corrupted else self.emulation.output(p)
        identified = set()
        for rec in self.records:
            for c in rec.calls:
                identified.update(c.identified)
        for p, v in outputs.items():
            if isinstance(v, Bot):
                identified.update(v.identified)
        active = [r for r in self.records if r.active]
        return ExecutionResult(
            outputs=outputs,
            corrupted=self.corrupted,
            transcript=tuple(self.records),
            rounds_used=len(active),
            functionality_rounds_used=sum(1 for r in active if r.kind == "functionality"),
            calls_made=sum(len(r.calls) for r in self.records),
            identified=frozenset(identified),
        )


def _visible_value(call: Call, outcome, corrupted) -> Any:
    if call.functionality.public_output or outcome.aborted:
        return outcome.outputs[min(outcome.outputs)] if outcome.outputs else None
    return {p: v for p, v in outcome.outputs.items() if p in corrupted}


def run(spec: ProtocolSpec, adversary: Optional[AdversaryStrategy] = None, seed: int = 0,
        inputs: Optional[Sequence[Any]] = None, source=None, channels: str = "secure") -> ExecutionResult:
    """Execute ``spec`` against ``adversary``.

    The result is a deterministic function of (spec, adversary, seed, inputs).
    ``source`` overrides the seeded randomness (used for exact enumeration).
    ``channels`` is "secure" (the adversary sees only metadata of honest
    point-to-point traffic) or "authenticated" (it also sees payloads).
    """
    spec.validate()
    if channels not in ("secure", "authenticated"):
        raise SpecError(f"unknown channel model {channels!r}")
    adversary = copy.deepcopy(adversary) if adversary is not None else AdversaryStrategy()
    if any(not 1 <= p <= spec.n for p in adversary.corrupted):
        raise SpecError("corrupted parties must be within 1..n")
    source = source if source is not None else SeededSource(seed)
    runner = _Runner(spec, adversary, source, inputs, channels)
    adversary.setup(RunContext(spec, adversary.corrupted, Namespace(source, "adversary"), source, runner.emulation))
    for r, rnd in enumerate(spec.rounds):
        if isinstance(rnd, CommunicationRound):
            runner.communication(r, rnd)
        else:
            runner.functionality(r, rnd)
    return runner.finish()


@dataclass(frozen=True)
class Summary:
    trials: int
    frequencies: Dict[Any, int]
    mean: Optional[float]
    stderr: Optional[float]
    agreement_rate: float

    def frequency(self, value: Any) -> float:
        return self.frequencies.get(value, 0) / self.trials


def estimate(spec: ProtocolSpec, adversary: Optional[AdversaryStrategy] = None, trials: int = 1000,
             seed: int = 0, inputs: Optional[Sequence[Any]] = None,
             statistic: Optional[Callable[[ExecutionResult], Any]] = None) -> Summary:
    """Aggregate ``trials`` independent runs with per-trial seeds derived from ``seed``."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    statistic = statistic or ExecutionResult.common_output
    counts: _Counter = _Counter()
    numeric: List[float] = []
    agreed = 0
    for k in range(trials):
        result = run(spec, adversary, derive_seed(seed, "trial", k), inputs)
        value = statistic(result)
        counts[value] += 1
        agreed += result.agreement()
        if isinstance(value, (int, float)) and not isinstance(value, bool) or isinstance(value, bool):
            numeric.append(float(value))
    mean = stderr = None
    if len(numeric) == trials:
        mean = sum(numeric) / trials
        var = sum((x - mean) ** 2 for x in numeric) / (trials - 1) if trials > 1 else 0.0
        stderr = math.sqrt(var / trials)
    freq = dict(sorted(counts.items(), key=lambda kv: repr(kv[0])))
    return Summary(trials, freq, mean, stderr, agreed / trials)


def continue_alone(spec: ProtocolSpec, pid: int, events: Sequence[Any], start_round: int, source,
                   inputs: Optional[Sequence[Any]] = None) -> Any:
    """Output of ``pid`` when, from ``start_round`` on, nobody else sends.

    Calls in later functionality rounds are evaluated honestly with the given
    source and default inputs for everybody but ``pid``.
    """
    emu = Emulation(spec, (pid,), source, inputs)
    emu.events[pid] = list(events)
    for r in range(start_round, len(spec.rounds)):
        rnd = spec.rounds[r]
        if isinstance(rnd, CommunicationRound):
            for recv, payload in emu.outgoing(pid, r).items():
                emu.deliver(Message(r, pid, recv, payload))
        else:
            for idx, call in enumerate(rnd.resolve(tuple(emu.public), r)):
                parties = call.input_parties if call.input_parties is not None else call.committee.members
                default = call.functionality.default_input
                inputs_ = {p: emu.call_input(p, r, call) if p == pid else default for p in parties}
                recipients = call.recipients if call.recipients is not None else tuple(range(1, spec.n + 1))
                out = tp_execute(call.functionality, call.tp, inputs_, (), None,
                                 Namespace(source, "call", r, idx), recipients, call.committee.members)
                emu.deliver_result(r, idx, call, out.outputs, call.functionality.public_output)
    return emu.output(pid)
