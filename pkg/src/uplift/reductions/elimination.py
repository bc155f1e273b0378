"""Player elimination over a committee with restricted identifiable abort.

The committee calls the functionality; an abort names a corrupted member, who
is removed and from then on played by the lowest-index remaining member with
the functionality's default input.  With at most t' corrupted members the
computation finishes within t' + 1 sequential calls.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence, Tuple, Union

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
from ..errors import ProtocolViolation, SpecError
from ..functionalities import FunctionalitySpec, TrustedPartyType, f_cf
from .election import bin_count, committee_from_broadcasts, elect_from_view

CommitteeSource = Union[Committee, Callable[[Sequence[Any]], Committee]]


@dataclass(frozen=True)
class EliminationState:
    committee: Committee
    remaining: Tuple[int, ...]
    eliminated: Tuple[int, ...]
    value: Any = ABSENT
    last_abort: Optional[Bot] = None

    @property
    def finished(self) -> bool:
        return self.value is not ABSENT

    def outcome(self) -> Any:
        if self.finished:
            return self.value
        return self.last_abort if self.last_abort is not None else Bot()


def replay(events: Sequence[Any], committee: Committee, rounds: range) -> EliminationState:
    """Elimination state after the public call results in ``rounds``."""
    remaining = list(committee.members)
    eliminated = []
    last = None
    for e in events:
        if not isinstance(e, CallResult) or e.round not in rounds:
            continue
        if not is_bot(e.value):
            return EliminationState(committee, tuple(remaining), tuple(eliminated), e.value, last)
        last = e.value
        if not remaining:
            continue
        named = min(e.value.identified) if e.value.identified else remaining[0]
        # a party already removed is played by the lowest remaining member
        culprit = named if named in remaining else remaining[0]
        remaining.remove(culprit)
        eliminated.append(culprit)
    return EliminationState(committee, tuple(remaining), tuple(eliminated), ABSENT, last)


def _inner_tp(kind: str, committee: Committee) -> TrustedPartyType:
    if kind == "fair":
        return TrustedPartyType.restricted_id_fair((committee,))
    if kind == "abort":
        return TrustedPartyType.restricted_id_abort((committee,))
    raise SpecError(f"unknown inner model {kind!r}")


def elimination_rounds(f: FunctionalitySpec, committee_of: CommitteeSource, max_calls: int, start: int,
                       input_parties: Optional[Callable[[Committee], Tuple[int, ...]]] = None,
                       kind: str = "fair") -> Tuple[FunctionalityRound, ...]:
    """``max_calls`` functionality rounds starting at round index ``start``."""
    block = range(start, start + max_calls)

    def calls(public, r):
        committee = committee_of(public) if callable(committee_of) else committee_of
        state = replay(public, committee, block)
        if state.finished or not state.remaining:
            return ()
        simulator = state.remaining[0]
        parties = input_parties(committee) if input_parties else None
        return (Call(
            committee, f, _inner_tp(kind, committee),
            input_parties=parties,
            simulated_by=tuple((m, simulator) for m in state.eliminated),
            label="elimination",
        ),)

    return tuple(FunctionalityRound(calls, label=f"elimination-{k}") for k in range(max_calls))


def player_elimination_protocol(f: FunctionalitySpec, n: int, committee: Committee, t_prime: int,
                                kind: str = "fair", with_inputs: bool = False) -> ProtocolSpec:
    """t' + 1 elimination rounds over a fixed committee.

    With ``with_inputs`` every party contributes its own input and removed
    members fall back to the functionality's default input.
    """
    if t_prime < 0 or t_prime >= len(committee):
        raise SpecError("need 0 <= t' < |C|")
    committee.check_within(n)
    max_calls = t_prime + 1
    block = range(0, max_calls)
    parties = (lambda c: tuple(range(1, n + 1))) if with_inputs else None
    rounds = elimination_rounds(f, committee, max_calls, 0, parties, kind)

    def call_input(view, r, call):
        return view.input

    def output(view):
        return replay(view.events, committee, block).outcome()

    behavior = FunctionBehavior(call_input=call_input, output=output)
    return ProtocolSpec(n, rounds, behavior, f"player-elimination[{f.name}]")


def run_player_elimination(f: FunctionalitySpec, n: int, committee: Committee, t_prime: int,
                           adversary: Optional[AdversaryStrategy] = None, seed: int = 0,
                           inputs: Optional[Sequence[Any]] = None, kind: str = "fair") -> ExecutionResult:
    """Run player elimination and check the call ceiling."""
    spec = player_elimination_protocol(f, n, committee, t_prime, kind, with_inputs=inputs is not None)
    result = run(spec, adversary, seed, inputs)
    if result.calls_made > t_prime + 1:
        raise ProtocolViolation(f"{result.calls_made} calls exceed the ceiling t' + 1 = {t_prime + 1}")
    return result


def coin_flip_uplift_protocol(n: int, n_prime: int) -> ProtocolSpec:
    """Lightest-bin election followed by player elimination over coin flipping.

    The elected committee C calls f_cf with C-identifiable fairness; the
    elimination budget is |C| - 1, so up to n sequential calls are scheduled
    and the unused ones stay empty.
    """
    k = bin_count(n, n_prime)
    f = f_cf(n)
    block = range(1, 1 + n)

    def committee_of(public):
        announced = {e.sender: e.payload for e in public
                     if isinstance(e, Message) and e.round == 0 and e.receiver == BROADCAST}
        return committee_from_broadcasts(announced, n, k)

    def send(view, r):
        if r == 0:
            return {BROADCAST: view.coins.draw(("bin",), k) + 1}
        return {}

    def output(view):
        committee = elect_from_view(view, 0, k)
        return replay(view.events, committee, block).outcome()

    rounds = (CommunicationRound("bins"),) + elimination_rounds(f, committee_of, n, 1)
    return ProtocolSpec(n, rounds, FunctionBehavior(send=send, output=output), "coin-flip-uplift")

