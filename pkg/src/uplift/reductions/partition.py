"""From fairness with committee abort to full security by partitioning the
first parties into disjoint committees of size 2t + 1."""

from __future__ import annotations

from typing import Any, Callable, Optional, Sequence, Tuple

from ..core import ABSENT, BROADCAST, Bot, Committee, is_bot
from ..engine import (
    AdversaryStrategy,
    Call,
    CallResult,
    CommunicationRound,
    ExecutionResult,
    FunctionBehavior,
    FunctionalityRound,
    ProtocolSpec,
    run,
)
from ..errors import SpecError
from ..functionalities import TrustedPartyType, f_from

Fn = Callable[[Sequence[int]], Any]


def partition_committees(t: int, count: int) -> Tuple[Committee, ...]:
    size = 2 * t + 1
    return tuple(Committee.of(range(j * size + 1, (j + 1) * size + 1)) for j in range(count))


def sequential_partition_protocol(fn: Fn, n: int, t: int, default_input: int = 0) -> ProtocolSpec:
    """Up to t calls over disjoint committees of 2t + 1 parties, each made
    only if all earlier ones aborted; if all abort, party t(2t+1)+1 collects
    the inputs and announces fn of them."""
    if t < 0 or t * (2 * t + 1) >= n:
        raise SpecError("the sequential partition needs t (2t + 1) < n")
    committees = partition_committees(t, t)
    fallback = t * (2 * t + 1) + 1
    everyone = tuple(range(1, n + 1))
    f = f_from("f", lambda inputs: fn([inputs[p] for p in everyone]), n, default_input)
    collect, announce = t, t + 1

    def delivered(events):
        for e in events:
            if isinstance(e, CallResult) and e.round < t and not is_bot(e.value):
                return e.value
        return ABSENT

    def aborted_so_far(events, upto: int) -> bool:
        seen = {e.round for e in events if isinstance(e, CallResult) and e.round < upto and is_bot(e.value)}
        return len(seen) == upto

    def call_round(j: int) -> FunctionalityRound:
        c = committees[j]

        def calls(public, r):
            if not aborted_so_far(public, j):
                return ()
            return (Call(c, f, TrustedPartyType.restricted_fair_abort((c,)), input_parties=everyone,
                         label=f"committee-{j}"),)

        return FunctionalityRound(calls, f"committee-{j}")

    def send(view, r):
        if not aborted_so_far(view.events, t):
            return {}
        if r == collect and view.pid != fallback:
            return {fallback: view.input}
        if r == announce and view.pid == fallback:
            inputs = [view.input if p == fallback else view.received(collect, p) for p in everyone]
            inputs = [default_input if x is ABSENT else x for x in inputs]
            return {BROADCAST: fn(inputs)}
        return {}

    def output(view):
        value = delivered(view.events)
        if value is not ABSENT:
            return value
        announced = view.broadcast(announce, fallback)
        return Bot() if announced is ABSENT else announced

    rounds = tuple(call_round(j) for j in range(t)) + (CommunicationRound("collect"), CommunicationRound("announce"))
    return ProtocolSpec(n, rounds, FunctionBehavior(send=send, call_input=lambda v, r, c: v.input, output=output),
                        "partition-sequential")


def parallel_partition_protocol(fn: Fn, n: int, t: int, default_input: int = 0) -> ProtocolSpec:
    """One call restricted to t + 1 disjoint committees of 2t + 1 parties.
    Some committee is corruption free, so the call cannot be aborted."""
    if t < 0 or (t + 1) * (2 * t + 1) > n:
        raise SpecError("the parallel partition needs (t + 1)(2t + 1) <= n")
    committees = partition_committees(t, t + 1)
    everyone = tuple(range(1, n + 1))
    f = f_from("f", lambda inputs: fn([inputs[p] for p in everyone]), n, default_input)
    caller = Committee.of(p for c in committees for p in c)
    rounds = (FunctionalityRound((Call(caller, f, TrustedPartyType.restricted_fair_abort(committees),
                                       input_parties=everyone, label="partition"),), "partition"),)
    return ProtocolSpec(n, rounds, FunctionBehavior(call_input=lambda v, r, c: v.input,
                                                    output=lambda v: v.result(0)), "partition-parallel")


def partition_abort_to_full(fn: Fn, n: int, t: int, adversary: Optional[AdversaryStrategy] = None,
                            seed: int = 0, inputs: Optional[Sequence[int]] = None,
                            parallel: bool = False) -> ExecutionResult:
    if adversary is not None and len(adversary.corrupted) > t:
        raise SpecError(f"the partition tolerates at most t = {t} corrupted parties")
    spec = parallel_partition_protocol(fn, n, t) if parallel else sequential_partition_protocol(fn, n, t)
    return run(spec, adversary, seed, inputs)
