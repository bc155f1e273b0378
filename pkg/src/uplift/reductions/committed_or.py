"""OR with full security: commit, elect a committee, then iterate the
two-phase committed OR with restricted identifiable abort over all
sub-committees."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, FrozenSet, List, Optional, Sequence, Tuple

from ..core import ABSENT, BROADCAST, Bot, Committee, is_bot
from ..engine import (
    AdversaryStrategy,
    Call,
    CallResult,
    CommunicationRound,
    ExecutionResult,
    FunctionBehavior,
    FunctionalityRound,
    Message,
    ProtocolSpec,
    run,
)
from ..functionalities import OPENING_BITS, Commitment, TrustedPartyType, commit, f_elect_functionality, make_f_comor
from .subcommittees import ReductionConfig, elected_committee, enumerate_subcommittees, surviving

STATE_KEY = "comor"


def committee_beta(beta: float) -> float:
    """Corrupted fraction the election guarantees for the OR committee: (1 + beta) / 2."""
    return (1 + beta) / 2


@dataclass(frozen=True)
class OrState:
    identified: FrozenSet[int]
    invalid: FrozenSet[int]
    phase: int
    value: Any = ABSENT
    last_abort: Optional[Bot] = None


def _commitments(events) -> dict:
    return {e.sender: e.payload for e in events
            if isinstance(e, Message) and e.round == 0 and e.receiver == BROADCAST}


def replay_or(events: Sequence[Any], first: int) -> OrState:
    """Walk the iteration rounds.  An aborted first phase drops the named
    parties; an aborted second phase also drops the invalid openers that the
    completed first phase reported."""
    identified: set = set()
    dropped_invalid: set = set()
    pending_invalid: FrozenSet[int] = frozenset()
    phase = 1
    last = None
    results = sorted(((e.round, e.value) for e in events if isinstance(e, CallResult) and e.round >= first),
                     key=lambda item: item[0])
    for r, value in results:
        if (r - first) % 2 == 0:
            if is_bot(value):
                identified |= value.identified
                last = value
                phase = 1
            else:
                pending_invalid = frozenset(value)
                phase = 2
        else:
            if is_bot(value):
                identified |= value.identified
                dropped_invalid |= pending_invalid
                last = value
                phase = 1
            else:
                return OrState(frozenset(identified), frozenset(dropped_invalid), 2, value, last)
    return OrState(frozenset(identified), frozenset(dropped_invalid), phase, ABSENT, last)


def committed_or_protocol(config: ReductionConfig) -> ProtocolSpec:
    """Rounds: commitments; committee election (skipped when m = n); then
    pairs of functionality rounds for the two phases."""
    n = config.n
    rounds: List[Any] = [CommunicationRound("commit")]
    if config.m < n:
        elect = f_elect_functionality(n, config.m, committee_beta(config.beta))
        rounds.append(FunctionalityRound((Call(Committee.of(range(1, n + 1)), elect, TrustedPartyType.full(),
                                               label="elect"),), "elect"))
    first = len(rounds)
    iterations = n if config.fallback else config.iteration_bound
    everyone = tuple(range(1, n + 1))

    def committee_of(public) -> Committee:
        if config.m < n:
            return elected_committee(public, n, first - 1)
        return Committee.of(everyone)

    def halted(public) -> bool:
        coms = _commitments(public)
        return any(not isinstance(coms.get(p, ABSENT), Commitment) for p in everyone)

    def calls_for(phase: int):
        def calls(public, r):
            if halted(public):
                return ()
            state = replay_or(public, first)
            if state.value is not ABSENT or state.phase != phase:
                return ()
            subs = surviving(enumerate_subcommittees(committee_of(public), config.n_double_prime, config.cap),
                             sorted(state.identified))
            if not subs:
                return ()
            tp = TrustedPartyType.restricted_id_abort(subs)
            caller = Committee.of(sorted({p for c in subs for p in c}))
            phase_one, phase_two = make_f_comor(_commitments(public), STATE_KEY)
            if phase == 1:
                parties = tuple(p for p in everyone if p not in state.identified and p not in state.invalid)
                return (Call(caller, phase_one, tp, input_parties=parties, state_key=STATE_KEY, label="comor-1"),)
            return (Call(caller, phase_two, tp, input_parties=(), state_key=STATE_KEY, label="comor-2"),)

        return calls

    for k in range(iterations):
        rounds.append(FunctionalityRound(calls_for(1), f"phase-1-{k}"))
        rounds.append(FunctionalityRound(calls_for(2), f"phase-2-{k}"))

    def opening(view) -> int:
        return view.coins.draw(("opening",), 1 << OPENING_BITS)

    def send(view, r):
        if r == 0:
            return {BROADCAST: commit(int(view.input or 0), opening(view))}
        return {}

    def call_input(view, r, call):
        return (int(view.input or 0), opening(view))

    def output(view):
        if halted(view.events):
            return 1
        state = replay_or(view.events, first)
        if state.value is not ABSENT:
            return state.value
        return state.last_abort if state.last_abort is not None else Bot()

    return ProtocolSpec(n, tuple(rounds), FunctionBehavior(send=send, call_input=call_input, output=output),
                        "committed-or")


def run_committed_or(config: ReductionConfig, inputs: Sequence[int], adversary: Optional[AdversaryStrategy] = None,
                     seed: int = 0) -> ExecutionResult:
    return run(committed_or_protocol(config), adversary, seed, list(inputs))
