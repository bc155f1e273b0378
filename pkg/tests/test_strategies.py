"""Scripted fail-stop adversaries."""

import pytest

from uplift.adversaries.strategies import PRESETS, ScriptedAdversary, minimal_identities, preset
from uplift.core import Committee
from uplift.engine import run
from uplift.functionalities import CallInfo, TrustedPartyType, f_cf, f_or
from uplift.reductions.elimination import run_player_elimination


def info(legal):
    return CallInfo(f_cf(6), TrustedPartyType.id_fair(), frozenset({1, 2, 3}), (1, 2, 3, 4), True,
                    tuple(frozenset(s) for s in legal), False)


def test_minimal_identities_reuse_names():
    assert minimal_identities(info([{2, 3}, {3}])).identities == (2, 3)
    assert minimal_identities(info([{3}, {2, 3}])).identities == (3, 3)


def committee_of(size):
    return Committee.of(range(1, size + 1))


def test_first_k_aborts_k_calls():
    adversary = ScriptedAdversary((1, 2, 3), abort="first", k=2)
    result = run_player_elimination(f_cf(7), 7, committee_of(7), 3, adversary)
    assert result.calls_made == 3
    assert adversary.aborted == 0


def test_targets_restrict_aborts():
    adversary = ScriptedAdversary((1,), abort="always", targets=("f_or",))
    result = run_player_elimination(f_cf(3), 3, committee_of(3), 1, adversary)
    assert result.calls_made == 1


def test_withhold_uses_default_input():
    adversary = ScriptedAdversary((1,), withhold=(f_or(3).name,))
    result = run_player_elimination(f_or(3), 3, committee_of(3), 1, adversary, inputs=[1, 0, 0])
    assert result.common_output() == 0


def test_substitution_is_not_fail_stop():
    adversary = ScriptedAdversary((1,), substitutions={f_or(3).name: lambda pid, x: 1})
    assert not adversary.fail_stop
    result = run_player_elimination(f_or(3), 3, committee_of(3), 1, adversary, inputs=[0, 0, 0])
    assert result.common_output() == 1


def test_random_policy_is_seeded():
    spec_args = (f_cf(7), 7, committee_of(7), 3)
    calls = [run_player_elimination(*spec_args, preset("abort-random", (1, 2, 3)), seed=s).calls_made
             for s in range(12)]
    again = [run_player_elimination(*spec_args, preset("abort-random", (1, 2, 3)), seed=s).calls_made
             for s in range(12)]
    assert calls == again and len(set(calls)) > 1


def test_presets_and_describe():
    assert sorted(PRESETS) == ["abort-always", "abort-first-2", "abort-late", "abort-random", "drop-election",
                               "never-abort"]
    described = preset("drop-election", (2,)).describe()
    assert described["drop_rounds"] == [0] and described["abort"] == "always"
    with pytest.raises(KeyError):
        preset("abort-sometimes", (1,))
    with pytest.raises(ValueError):
        ScriptedAdversary((1,), abort="sometimes")
