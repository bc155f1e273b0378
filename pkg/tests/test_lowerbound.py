"""Hybrid-to-two-party reduction, attack translation and the toy pipeline."""

import math
from fractions import Fraction

import pytest

from uplift.adversaries.lowerbound import (TwoPartyEmbedding, build_two_party, choose_good_subsets, closed_form_bound,
                                           default_pad, large_call_escape_rate, lower_bound_pipeline, measure_bias,
                                           psi_bias, small_committee_bound, toy_embedding, toy_hybrid_protocol,
                                           translate_attack)
from uplift.adversaries.strategies import ScriptedAdversary
from uplift.adversaries.twoparty import AttackSpec, all_attacks
from uplift.core import BROADCAST, Committee
from uplift.engine import Call, CommunicationRound, FunctionBehavior, FunctionalityRound, ProtocolSpec
from uplift.errors import SearchExhausted, SpecError
from uplift.functionalities import TrustedPartyType, f_cf

ONE_PHASE = (((1, 2), (3, 4), (5, 6)),)


def ready_only(rounds):
    behavior = FunctionBehavior(send=lambda view, r: {BROADCAST: "ready"}, output=lambda view: 0)
    return ProtocolSpec(6, tuple(CommunicationRound() for _ in range(rounds)), behavior)


@pytest.fixture(scope="module")
def toy_report():
    return lower_bound_pipeline(toy_hybrid_protocol(), toy_embedding())


# ------------------------------------------------------------ slots

def test_one_call_is_one_bit_slot():
    psi = build_two_party(toy_hybrid_protocol(phases=(((1, 2),),)), toy_embedding())
    assert [s.kind for s in psi.slots] == ["bit"]
    assert psi.senders(1) == {0}


def test_no_functionality_rounds_keeps_round_count():
    psi = build_two_party(ready_only(3), toy_embedding())
    assert psi.rounds == 3 and all(s.kind == "comm" for s in psi.slots)
    assert psi.senders(2) == {0, 1}


def test_calls_meeting_aborting_set_get_no_slot():
    emb = TwoPartyEmbedding(6, Fraction(2, 3), (1, 2), 1, J=((3,),))
    psi = build_two_party(toy_hybrid_protocol(phases=ONE_PHASE), emb)
    assert [s.committee.members for s in psi.slots] == [(1, 2), (5, 6)]
    assert set(psi.preaborted[0]) == {1}


def test_unordered_calls_rejected():
    f = f_cf(6)
    calls = tuple(Call(Committee.of(c), f, TrustedPartyType.fair(), input_parties=()) for c in ((3, 4), (1, 2)))
    spec = ProtocolSpec(6, (FunctionalityRound(calls),), FunctionBehavior(output=lambda view: 0))
    with pytest.raises(SpecError):
        build_two_party(spec, toy_embedding())


def test_toy_slot_layout():
    psi = build_two_party(toy_hybrid_protocol(), toy_embedding())
    assert [s.kind for s in psi.slots] == ["bit"] * 3 + ["comm"] + ["bit"] * 3


# ------------------------------------------------------------ embedding

def test_embedding_validation():
    with pytest.raises(SpecError):
        TwoPartyEmbedding(6, Fraction(2, 3), (1,), 2)
    with pytest.raises(SpecError):
        TwoPartyEmbedding(6, Fraction(1, 2), (1, 2, 3), 2)
    with pytest.raises(SpecError):
        TwoPartyEmbedding(6, Fraction(2, 3), (1, 2), 3)


def test_extend_and_admissible_sets():
    emb = toy_embedding()
    assert emb.free == (3, 4, 5, 6)
    assert emb.extend((1, 2)) == {1, 2, 3, 4}
    assert emb.extend((3, 5)) == {3, 5}
    assert emb.admissible_T((1, 2)) == [(5, 6)]
    assert len(emb.admissible_T()) == math.comb(4, 2)


# ------------------------------------------------------------ bounds

def test_bounds_frozen():
    # C(2, 2) / C(4, 2) / (16 * 7 + 4)
    assert small_committee_bound(7, Fraction(2, 3), 6, 2) == Fraction(1, 696)
    # (1 / (2e))^2 / 116
    assert closed_form_bound(7, Fraction(2, 3), 2) == pytest.approx(2.9167e-4, rel=1e-4)
    # ceil(log2(7 * 234) / 0.5)
    assert default_pad(7, 0.5, 6) == 22


# ------------------------------------------------------------ measurement

def test_honest_toy_is_fair():
    assert measure_bias(toy_hybrid_protocol()).bias == 0


def test_dropping_ready_round_does_not_bias():
    adversary = ScriptedAdversary((1, 2, 3), drop_rounds=(1,))
    assert measure_bias(toy_hybrid_protocol(), adversary).bias == 0


def test_monte_carlo_mode_near_half():
    report = measure_bias(toy_hybrid_protocol(), mode="monte_carlo", trials=400, seed=2)
    assert abs(report.mean - 0.5) < 4 * report.stderr
    with pytest.raises(SpecError):
        measure_bias(toy_hybrid_protocol(), mode="guess")


def test_pipeline_values(toy_report):
    assert toy_report.route == "cleve"
    assert toy_report.cleve.attack == AttackSpec(0, 7, 7, 0)
    assert toy_report.psi_report.bias == Fraction(1, 8)
    assert toy_report.average_bias == Fraction(1, 48)
    assert toy_report.bound == Fraction(1, 696)
    assert toy_report.probability_all_corrupted == Fraction(1, 6)
    assert toy_report.fidelity


def test_unarmed_sets_measure_zero(toy_report):
    # average = conditioned bias * Pr[armed], since the other sets play honestly
    for T, report, armed in toy_report.per_T:
        assert (report.signed != 0) == armed
    assert toy_report.average_signed == toy_report.conditioned_signed * toy_report.probability_all_corrupted


def test_translate_needs_valid_honest_set():
    psi = build_two_party(toy_hybrid_protocol(), toy_embedding())
    with pytest.raises(SpecError):
        translate_attack(psi, AttackSpec(0, 1, 1, 0))
    with pytest.raises(SpecError):
        translate_attack(psi, AttackSpec(0, 1, 1, 0), T=(1, 3))


def test_fidelity_for_every_attack():
    spec, emb = toy_hybrid_protocol(), toy_embedding()
    psi = build_two_party(spec, emb)
    for attack in all_attacks(psi.rounds):
        expected = psi_bias(psi, attack).signed
        candidates = emb.admissible_T() if attack.attacker == 0 else [emb.S]
        for T in candidates:
            strategy = translate_attack(psi, attack, T)
            if strategy.armed:
                assert measure_bias(spec, strategy).signed == expected, (attack, T)


# ------------------------------------------------------------ aborting sets

def test_escape_rate():
    spec = toy_hybrid_protocol(phases=ONE_PHASE)
    assert large_call_escape_rate(spec, ((1, 3, 5),), pad=1, trials=3) == (0.0,)
    assert large_call_escape_rate(spec, ((1,),), pad=1, trials=3) == (1.0,)


def test_choose_good_subsets():
    spec = toy_hybrid_protocol(phases=ONE_PHASE)
    assert choose_good_subsets(spec, 0, 0.5, 1) == ()
    with pytest.raises(SearchExhausted):
        choose_good_subsets(spec, 1, 1 / 6, 1, trials=3, retries=2)
    J = choose_good_subsets(spec, 1, 0.5, 1, trials=3)
    assert len(J) == 1 and len(J[0]) == 3
