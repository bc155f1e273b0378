"""Synchronous engine: rounds, rushing, fail-stop enforcement, calls."""

import pytest

from uplift.core import ABSENT, BROADCAST, Bot, Committee
from uplift.engine import (AdversaryStrategy, Call, CommunicationRound, FunctionBehavior, FunctionalityRound,
                           ProtocolSpec, continue_alone, estimate, run)
from uplift.errors import ProtocolViolation, SpecError
from uplift.functionalities import Abort, TrustedPartyType, f_cf


def sum_protocol(n):
    """Every party broadcasts its input; outputs the sum of what arrived (absent counts 0)."""

    def send(view, r):
        return {BROADCAST: view.input}

    def output(view):
        return sum(v for v in view.broadcasts(0).values() if v is not ABSENT)

    return ProtocolSpec(n, (CommunicationRound("inputs"),), FunctionBehavior(send=send, output=output), "sum")


def p2p_protocol(n):
    """Party 1 sends a secret to party 2; everyone outputs what they received from 1."""

    def send(view, r):
        return {2: 42} if view.pid == 1 else {}

    def output(view):
        return view.received(0, 1)

    return ProtocolSpec(n, (CommunicationRound(),), FunctionBehavior(send=send, output=output))


def coin_protocol(n, committee, tp):
    call = Call(Committee.of(committee), f_cf(n), tp, input_parties=())
    behavior = FunctionBehavior(output=lambda view: view.result(0))
    return ProtocolSpec(n, (FunctionalityRound((call,)),), behavior, "coin")


class Silent(AdversaryStrategy):
    name = "silent"

    def send(self, ctx):
        return {}


class Forger(AdversaryStrategy):
    def send(self, ctx):
        return {p: {BROADCAST: 999} for p in self.corrupted}


class Spy(AdversaryStrategy):
    """Records what the rushing interface reveals."""

    def send(self, ctx):
        Spy.seen = (ctx.visible, ctx.traffic)
        return ctx.defaults


class AbortCall(AdversaryStrategy):
    def early_abort(self, ctx):
        return ctx.info.abort_with()


def test_honest_run():
    result = run(sum_protocol(4), inputs=[1, 2, 3, 4])
    assert result.honest_outputs() == {1: 10, 2: 10, 3: 10, 4: 10}
    assert result.agreement()
    assert result.rounds_used == 1


def test_silent_parties_are_absent():
    result = run(sum_protocol(4), Silent((2, 3)), inputs=[1, 2, 3, 4])
    assert result.honest_outputs() == {1: 5, 4: 5}
    assert result.outputs[2] is None


def test_fail_stop_forbids_changed_messages():
    with pytest.raises(ProtocolViolation):
        run(sum_protocol(3), Forger((1,)), inputs=[1, 1, 1])


def test_non_fail_stop_may_lie():
    adv = Forger((1,), fail_stop=False)
    assert run(sum_protocol(3), adv, inputs=[1, 1, 1]).common_output() == 1001


def test_rushing_sees_broadcasts_and_only_metadata_of_honest_p2p():
    run(p2p_protocol(3), Spy((3,)))
    visible, traffic = Spy.seen
    assert visible == ()
    assert len(traffic) == 1
    sender, receiver, payload = traffic[0]
    assert (sender, receiver) == (1, 2) and payload != 42
    run(p2p_protocol(3), Spy((3,)), channels="authenticated")
    assert Spy.seen[1] == ((1, 2, 42),)


def test_adversary_is_copied_per_run():
    adv = Silent((1,))
    run(sum_protocol(2), adv, inputs=[1, 1])
    assert adv.run is None


def test_corrupted_out_of_range():
    with pytest.raises(SpecError):
        run(sum_protocol(2), Silent((3,)))


def test_call_result_public_and_deterministic():
    spec = coin_protocol(4, (1, 2), TrustedPartyType.fair())
    a, b = run(spec, seed=11), run(spec, seed=11)
    assert a.common_output() == b.common_output() in (0, 1)
    assert a.calls_made == 1 and a.functionality_rounds_used == 1
    assert a.to_jsonl() == b.to_jsonl()


def test_identifiable_abort_names_corrupted_member():
    spec = coin_protocol(4, (1, 2), TrustedPartyType.id_fair())
    result = run(spec, AbortCall((2,)))
    assert result.common_output() == Bot(frozenset({2}))
    assert result.identified == {2}
    assert result.call_ledger[0].aborted


def test_restricted_call_cannot_abort_with_honest_committee():
    tp = TrustedPartyType.restricted_id_fair((Committee.of((1, 2)), Committee.of((3, 4))))
    with pytest.raises(ProtocolViolation):
        run(coin_protocol(4, (1, 2, 3, 4), tp), AbortCall((1,)))


def test_estimate_frequencies():
    summary = estimate(coin_protocol(3, (1,), TrustedPartyType.fair()), trials=400, seed=0)
    assert summary.trials == 400 and summary.agreement_rate == 1.0
    assert abs(summary.mean - 0.5) < 4 * summary.stderr + 1e-9


def test_continue_alone_uses_defaults():
    spec = sum_protocol(3)
    assert continue_alone(spec, 2, [], 0, None, inputs=[5, 7, 9]) == 7


def test_spec_validation():
    with pytest.raises(SpecError):
        ProtocolSpec(0, (), FunctionBehavior()).validate()
    bad = Call(Committee.of((1, 5)), f_cf(3), TrustedPartyType.fair())
    with pytest.raises(SpecError):
        run(ProtocolSpec(3, (FunctionalityRound((bad,)),), FunctionBehavior()))
