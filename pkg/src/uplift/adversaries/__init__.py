"""Scripted fail-stop adversaries and the coin-flipping attacks."""

from .lowerbound import (
    TwoPartyEmbedding,
    build_two_party,
    choose_good_subsets,
    lower_bound_pipeline,
    measure_bias,
    small_committee_bound,
    toy_hybrid_protocol,
    translate_attack,
)
from .strategies import PRESETS, ScriptedAdversary, preset
from .twoparty import AttackSpec, BiasReport, averaging_identity, find_cleve_attacker, toy_suite
