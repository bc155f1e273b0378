"""Trusted-party types and the concrete functionalities."""

import random

import pytest

from uplift.core import Bot, Committee
from uplift.errors import ProtocolViolation, SpecError
from uplift.functionalities import (Abort, CallHooks, TrustedPartyType, augct_by_xor, commit, decode_int, encode_int,
                                    f_augct, f_cf, f_elect, f_or, make_f_comor, make_f_in, make_f_ssout, open_ok,
                                    pad_with_corrupted,
                                    relation_enc, relation_exec, share_vector, tp_execute, zk_1m_verify)
from uplift.randomness import Namespace, SeededSource
from uplift.sharing import Scheme, ShareSet, ecss_recon, encode_secret, mac_repetitions


class EarlyAbort(CallHooks):
    def early_abort(self, info):
        return info.abort_with()


class LateAbort(CallHooks):
    def late_abort(self, info, seen):
        LateAbort.seen = dict(seen)
        return info.abort_with()


class Dictator(CallHooks):
    def __init__(self, decision):
        self.decision = decision

    def dictate(self, info, inputs, outputs):
        return self.decision


class Substitute(CallHooks):
    def substitute(self, info, inputs):
        return {p: 1 for p in inputs}


def coins(seed=0):
    return Namespace(SeededSource(seed), "test")


def run_or(tp, hooks, corrupted=(2,), inputs=None):
    inputs = inputs or {1: 0, 2: 0, 3: 0}
    return tp_execute(f_or(3), tp, inputs, corrupted, hooks, coins())


def test_full_security_refuses_aborts():
    out = run_or(TrustedPartyType.full(), CallHooks())
    assert not out.aborted and out.outputs == {1: 0, 2: 0, 3: 0}
    with pytest.raises(ProtocolViolation):
        run_or(TrustedPartyType.full(), EarlyAbort())


def test_fair_abort_hides_identity():
    out = run_or(TrustedPartyType.fair(), EarlyAbort())
    assert out.aborted and out.phase == "early" and out.identified == frozenset()


def test_id_fair_abort_names_a_corrupted_party():
    out = run_or(TrustedPartyType.id_fair(), EarlyAbort())
    assert out.outputs[1] == Bot(frozenset({2}))


def test_late_abort_only_where_allowed():
    out = run_or(TrustedPartyType.id_abort(), LateAbort(), inputs={1: 1, 2: 0, 3: 0})
    assert out.aborted and out.phase == "late"
    assert LateAbort.seen == {2: 1}
    fair = run_or(TrustedPartyType.id_fair(), LateAbort(), inputs={1: 1, 2: 0, 3: 0})
    assert not fair.aborted


def test_abort_needs_a_corrupted_member():
    with pytest.raises(ProtocolViolation):
        run_or(TrustedPartyType.id_fair(), EarlyAbort(), corrupted=())


def test_abort_with_wrong_identity():
    class Liar(CallHooks):
        def early_abort(self, info):
            return Abort((1,))

    with pytest.raises(ProtocolViolation):
        run_or(TrustedPartyType.id_fair(), Liar())


def test_substitution_and_input_validation():
    out = run_or(TrustedPartyType.fair(), Substitute())
    assert out.outputs[1] == 1
    bad = tp_execute(f_or(2), TrustedPartyType.fair(), {1: 7, 2: 0}, (), None, coins())
    assert bad.outputs[1] == 0


def restricted(*committees):
    return TrustedPartyType.restricted_id_fair(tuple(Committee.of(c) for c in committees))


def test_restricted_abort_needs_one_identity_per_committee():
    tp = restricted((1, 2), (3, 4))
    inputs = {p: 0 for p in range(1, 5)}
    out = tp_execute(f_or(4), tp, inputs, (2, 3), EarlyAbort(), coins())
    assert out.identified == {2, 3}
    with pytest.raises(ProtocolViolation):
        tp_execute(f_or(4), tp, inputs, (2,), EarlyAbort(), coins())


def test_fully_corrupted_committee_dictates():
    tp = restricted((1, 2))
    inputs = {1: 0, 2: 0, 3: 0}
    out = tp_execute(f_or(3), tp, inputs, (1, 2), Dictator({3: 1}), coins())
    assert out.dictated and out.outputs == {1: 0, 2: 0, 3: 1}
    out = tp_execute(f_or(3), tp, inputs, (1, 2), Dictator(Abort((1,))), coins())
    assert out.aborted and out.outputs[3] == Bot(frozenset({1}))


def test_coin_is_uniformish_over_seeds():
    bits = [tp_execute(f_cf(2), TrustedPartyType.fair(), {}, (), None, coins(s), (1, 2)).outputs[1]
            for s in range(400)]
    assert 160 < sum(bits) < 240


def test_elect_buckets_and_padding():
    committee = f_elect(20, 5, 0.4, (1, 2, 3), coins(), pad_with_corrupted(5))
    assert len(committee) == 5
    assert {1, 2} <= committee.as_set()
    honest = committee.as_set() - {1, 2, 3}
    assert len(honest) == 3
    with pytest.raises(SpecError):
        f_elect(10, 5, 0.0, range(1, 10), coins())


def test_commitments_bind():
    com = commit(5, 99)
    assert open_ok(com, 5, 99)
    assert not open_ok(com, 6, 99) and not open_ok(com, 5, 98)


def test_ssout_reshares_function_of_inputs():
    members = (1, 2, 3, 4, 5)
    rng = random.Random(0)
    xs = [3, 4, 0, 1]
    per_party = [share_vector([x], Scheme.ECSS_MAC, 5, 2, rng) for x in xs]
    inputs = {m: tuple(per_party[i][h][0] for i in range(4)) for h, m in enumerate(members)}
    f = make_f_ssout(sum, 4, members, 2)
    out = tp_execute(f, TrustedPartyType.fair(), inputs, (), None, coins())
    length = len(encode_secret(encode_int(0)))
    shares = ShareSet(Scheme.ECSS_MAC, 5, 2, tuple(out.outputs[m] for m in members), length,
                      mac_repetitions(40, length))
    assert decode_int(ecss_recon(shares)) == 8


def xor_shares(value, members, rng):
    parts = [rng.randrange(1 << 16) for _ in members[:-1]]
    last = value
    for p in parts:
        last ^= p
    return parts + [last]


def test_f_in_identifies_bad_opening():
    rng = random.Random(1)
    members = (2, 4)
    xs = [1, 0, 1]
    shares = {i + 1: xor_shares(x, members, rng) for i, x in enumerate(xs)}
    openings = {(i, h): rng.randrange(1 << 30) for i in shares for h in (1, 2)}
    coms = {(i, h): commit(shares[i][h - 1], openings[(i, h)]) for i in shares for h in (1, 2)}
    f = make_f_in(lambda v: int(any(v)), 3, members, coms)
    honest = {m: tuple((shares[i][h - 1], openings[(i, h)]) for i in (1, 2, 3)) for h, m in enumerate(members, 1)}
    assert tp_execute(f, TrustedPartyType.id_fair(), honest, (), None, coins()).outputs[2] == 1
    cheat = dict(honest)
    cheat[4] = ((0, 0),) + honest[4][1:]
    assert tp_execute(f, TrustedPartyType.id_fair(), cheat, (), None, coins()).outputs[2] == Bot(frozenset({4}))


def test_augct_functionality_and_realisation():
    committee = Committee.of((1, 2))
    out = tp_execute(f_augct(committee, n=3), TrustedPartyType.fair(), {1: None, 2: None}, (), None,
                     coins(), (1, 2, 3))
    (r1, rho1), public = out.outputs[1]
    assert out.outputs[3][0] is None and open_ok(dict(public)[1], r1, rho1)
    contributions = {j: {i: commit(10 * j + i, j) for i in (1, 2)} for j in (1, 2)}
    openings = {j: {i: (10 * j + i, j) for i in (1, 2)} for j in (1, 2)}
    assert augct_by_xor(committee, contributions, openings) == {1: 11 ^ 21, 2: 12 ^ 22}
    openings[2][1] = (0, 2)
    assert augct_by_xor(committee, contributions, openings) == Bot(frozenset({2}))


def test_relations_and_zk():
    value, rho = 6, 11
    shares = [[2, 4], [6]]
    share_rho = [[1, 2], [3]]
    statement = {"input_commitment": commit(value, rho),
                 "share_commitments": [[commit(s, o) for s, o in zip(ss, oo)] for ss, oo in zip(shares, share_rho)]}
    witness = {"value": value, "opening": rho, "shares": shares, "share_openings": share_rho}
    assert zk_1m_verify(1, statement, witness, "enc") == (statement, 1)
    assert not relation_enc(statement, {**witness, "value": 7})
    exec_statement = {"claim": 5, "randomness_commitment": commit(4, 9), "member": 1, "transcript": (1,),
                      "recompute": lambda m, r, tr: r + tr[0]}
    assert relation_exec(exec_statement, {"randomness": 4, "opening": 9})
    assert not relation_exec({**exec_statement, "claim": 6}, {"randomness": 4, "opening": 9})
    with pytest.raises(SpecError):
        zk_1m_verify(1, statement, witness, "nope")


def test_committed_or_two_phases():
    coms = {1: commit(0, 5), 2: commit(1, 6), 3: commit(0, 7)}
    phase1, phase2 = make_f_comor(coms)
    state = {}
    bad = tp_execute(phase1, TrustedPartyType.fair(), {1: (0, 5), 2: (1, 0), 3: (0, 7)}, (), None, coins(),
                     state=state)
    assert bad.outputs[1] == frozenset({2})
    assert tp_execute(phase2, TrustedPartyType.fair(), {1: None}, (), None, coins(), state=state).outputs[1] == 0
    with pytest.raises(SpecError):
        tp_execute(phase2, TrustedPartyType.fair(), {1: None}, (), None, coins(), state=state)
