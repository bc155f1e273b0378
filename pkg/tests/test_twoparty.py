"""Two-party toy protocols, the single-round attack search and the averaging identity."""

import itertools
from fractions import Fraction

import pytest

from uplift.adversaries.twoparty import (AttackSpec, all_attacks, attack_bias, averaging_identity, broadcast_bit,
                                         consistency, constant_protocol, estimate_attack_bias, find_cleve_attacker,
                                         majority_exchange, toy_suite, xor_exchange)
from uplift.errors import ScaleError, SpecError

COMBINE = {"xor": lambda bits: sum(bits) % 2, "majority": lambda bits: int(2 * sum(bits) > len(bits))}


def brute_force_mean(senders, combine, fill, attack):
    """Honest party's expected output, by looping over every coin assignment."""
    r = len(senders)
    a, honest = attack.attacker, 1 - attack.attacker
    total = Fraction(0)
    cases = list(itertools.product((0, 1), repeat=3 * r))
    for coins in cases:
        posts, fills = coins[:r], {0: coins[r:2 * r], 1: coins[2 * r:]}

        def finish(party, known):
            tail = []
            for i in range(known + 1, r + 1):
                if senders[i - 1] == party:
                    tail.append(posts[i - 1])
                else:
                    tail.append(fills[party][i - 1] if fill == "coin" else 0)
            return COMBINE[combine](list(posts[:known]) + tail)

        aborted = False
        out = COMBINE[combine](list(posts))
        for i in range(1, r + 1):
            if i == attack.i_star and finish(a, attack.j_star - 1) == attack.b:
                aborted = True
            if aborted and senders[i - 1] == a:
                out = finish(honest, i - 1)
                break
        total += out
    return total / len(cases)


@pytest.mark.parametrize("protocol,senders,combine,fill", [
    (xor_exchange(2), (0, 1), "xor", "coin"),
    (xor_exchange(3), (0, 1, 0), "xor", "coin"),
    (xor_exchange(3, "zero"), (0, 1, 0), "xor", "zero"),
    (majority_exchange(3), (0, 1, 0), "majority", "coin"),
])
def test_attack_bias_matches_brute_force(protocol, senders, combine, fill):
    for attack in all_attacks(protocol.rounds):
        assert attack_bias(protocol, attack).mean == brute_force_mean(senders, combine, fill, attack)


def test_best_biases_frozen():
    best = {name: find_cleve_attacker(p).bias for name, p in toy_suite().items()}
    assert best == {"broadcast-bit": Fraction(1, 2), "xor-2": Fraction(1, 4), "xor-3": Fraction(1, 4),
                    "majority-3": Fraction(1, 8), "xor-2-zero": Fraction(1, 4), "xor-3-zero": Fraction(1, 4)}


def test_floor_met_on_suite():
    for p in toy_suite().values():
        result = find_cleve_attacker(p)
        assert result.gamma == Fraction(1, 2)
        assert result.bias >= result.floor == Fraction(1, 2) / (8 * p.rounds + 2)


def test_averaging_identity_on_suite():
    for p in toy_suite().values():
        for attacker, j, b in itertools.product((0, 1), range(1, p.rounds), (0, 1)):
            check = averaging_identity(p, attacker, j, b)
            assert check.holds, (p.name, attacker, j, b)


def test_broadcast_bit_attack_by_hand():
    # party 0 withholds a 1, so party 1 always outputs 0
    report = attack_bias(broadcast_bit(), AttackSpec(0, 1, 1, 1))
    assert report.mean == 0 and report.bias == Fraction(1, 2)


def test_consistency_of_honest_runs():
    c = consistency(xor_exchange(3))
    assert c.mean0 == c.mean1 == Fraction(1, 2) and c.agreement == 1


def test_constant_protocol_rejected():
    with pytest.raises(SpecError):
        find_cleve_attacker(constant_protocol(2))


def test_attack_spec_validation():
    with pytest.raises(SpecError):
        AttackSpec(2, 1, 1, 0)
    with pytest.raises(SpecError):
        AttackSpec(0, 2, 0, 0)
    with pytest.raises(SpecError):
        attack_bias(xor_exchange(2), AttackSpec(0, 3, 3, 0))
    assert len(all_attacks(3)) == 2 * (1 + 2 + 2) * 2


def test_monte_carlo_close_to_exact():
    attack = AttackSpec(1, 2, 2, 0)
    estimate = estimate_attack_bias(xor_exchange(2), attack, trials=4000, seed=1)
    assert abs(estimate.mean - 0.75) < 4 * estimate.stderr


def test_leaf_cap():
    with pytest.raises(ScaleError):
        find_cleve_attacker(xor_exchange(3), max_leaves=4)
