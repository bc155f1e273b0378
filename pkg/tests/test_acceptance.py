"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line."""

import itertools
import random
from fractions import Fraction

from click.testing import CliRunner

from uplift.adversaries.lowerbound import build_two_party, lower_bound_pipeline, toy_embedding, toy_hybrid_protocol
from uplift.adversaries.strategies import PRESETS, ScriptedAdversary, preset
from uplift.adversaries.twoparty import averaging_identity, find_cleve_attacker, toy_suite
from uplift.cli import dump_report, main
from uplift.core import Committee
from uplift.engine import FunctionalityRound
from uplift.errors import ReconstructionFailure
from uplift.experiments import EXPERIMENTS, run_experiment
from uplift.field import P
from uplift.functionalities import f_cf
from uplift.reductions.committed_or import run_committed_or
from uplift.reductions.elimination import run_player_elimination
from uplift.reductions.partition import partition_abort_to_full
from uplift.reductions.subcommittees import ReductionConfig, run_parallel_subcommittees
from uplift.sharing import MacShare, Scheme, Share, ecss_recon, ecss_recon_many, share

UPLIFT_ADVERSARIES = ("never-abort", "abort-always", "abort-random", "abort-first-2", "drop-election")


def test_criterion_1_election_failure_rate(verdict):
    report, _ = run_experiment("elect", {"n": 2000, "n_prime": 100, "beta": 0.3, "beta_prime": 0.6}, 1, 10_000)
    rate, err = report["measured"]["failure_rate"], report["bounds"]["err"]
    verdict(1, rate <= err and rate <= 0.032,
            f"failure rate {rate:.4f} over 10^4 trials, err {err:.4f} (and <= 0.032)")


def test_criterion_2_error_correction(verdict):
    rng = random.Random(2)
    pairs = list(itertools.combinations(range(1, 8), 2))
    perfect_ok = perfect_total = 0
    for _ in range(100):
        secret = rng.randbytes(8)
        clean = share(secret, Scheme.ECSS_PERFECT, 7, 2, rng)
        batch = []
        for i, j in pairs:
            for _ in range(100):
                shares = list(clean.shares)
                for pos in (i, j):
                    shares[pos - 1] = Share(pos, tuple(rng.randrange(P) for _ in clean.shares[pos - 1].values))
                batch.append(type(clean)(clean.scheme, 7, 2, tuple(shares), clean.secret_len, clean.mac_reps))
        results = ecss_recon_many(batch)
        perfect_ok += sum(r == secret for r in results)
        perfect_total += len(batch)
    mac_failures = 0
    for k in range(10_000):
        secret = rng.randbytes(8)
        shares = share(secret, Scheme.ECSS_MAC, 5, 2, rng)
        for pos in rng.sample(range(1, 6), 2):
            old = shares.shares[pos - 1]
            values = tuple(rng.randrange(P) for _ in old.values)
            keys = old.keys
            if k % 2:
                keys = tuple(tuple((rng.randrange(P), rng.randrange(P)) for _ in key) for key in old.keys)
            shares = shares.replace(pos, MacShare(pos, values, old.tags, keys))
        try:
            mac_failures += ecss_recon(shares) != secret
        except ReconstructionFailure:
            mac_failures += 1
    verdict(2, perfect_ok == perfect_total == 210_000 and mac_failures == 0,
            f"perfect n=7 t=2 exact {perfect_ok}/{perfect_total}; MAC n=5 t=2 failures {mac_failures}/10^4")


def test_criterion_3_elimination_ceiling(verdict):
    committee = Committee.of(range(1, 8))
    calls, agreed = set(), True
    for corrupted in itertools.combinations(range(1, 8), 3):
        for seed in range(3):
            result = run_player_elimination(f_cf(10), 10, committee, 3, preset("abort-always", corrupted), seed)
            calls.add(result.calls_made)
            agreed &= result.agreement() and result.common_output() in (0, 1)
    quiet = {run_player_elimination(f_cf(10), 10, committee, 3, adv, seed).calls_made
             for seed in range(5) for adv in (None, preset("never-abort", (1, 2, 3)))}
    verdict(3, calls == {4} and agreed and quiet == {1},
            f"t'=3 maximally aborting: calls {sorted(calls)}, agreement {agreed}; no aborts: calls {sorted(quiet)}")


def test_criterion_4_subcommittees(verdict):
    report, _ = run_experiment("subcommittees", {"kappa": 256, "phi": 2, "beta": 0.2, "beta_prime": 0.25,
                                                 "runs": 1000}, 4, 1000)
    m = report["measured"]
    config = ReductionConfig(n=16, beta=0.2, beta_prime=0.25)
    sweep = max(run_parallel_subcommittees(f_cf(16), config, preset("abort-always", range(1, k + 1)), seed)
                .functionality_rounds_used for k in range(config.t_prime, 12) for seed in range(5))
    ok = (m["ell"] == 1820 and m["ell"] <= 19658 and report["verdicts"]["ell_within_count_bound"]
          and report["verdicts"]["subcommittees_keep_honest_majority"]
          and m["max_functionality_rounds"] <= 4 and sweep <= 4)
    verdict(4, ok, f"ell {m['ell']} <= 19658 (formula {report['bounds']['subcommittee_count']:.2f}); worst corrupted "
                   f"{m['max_corrupted_in_subcommittee']} of {m['sub_size']} over 10^3 fills; rounds "
                   f"{m['max_functionality_rounds']} over 1000 runs, {sweep} over aborting 4..11")


def test_criterion_5_uplift_uniformity(verdict):
    parts, ok = [], True
    for name in UPLIFT_ADVERSARIES:
        report, _ = run_experiment("uplift", {"n": 24, "n_prime": 8, "corrupted": list(range(1, 7)),
                                              "adversary": name}, 5, 10_000)
        m = report["measured"]
        ok &= m["agreement_rate"] == 1.0 and abs(m["ones_frequency"] - 0.5) <= 0.02
        parts.append(f"{name} {m['ones_frequency']:.4f}/{m['agreement_rate']:.0%}")
    verdict(5, ok, "ones frequency/agreement: " + ", ".join(parts))


def or_directives():
    yield ScriptedAdversary
    for abort, k in (("never", 0), ("always", 0), ("random", 0), ("first", 1), ("first", 2)):
        for late in (False, True):
            for withhold in ((), ("f_comor/1",)):
                yield lambda c, a=abort, k=k, late=late, w=withhold: ScriptedAdversary(c, abort=a, k=k, late=late,
                                                                                        withhold=w)
    yield lambda c: ScriptedAdversary(c, drop_rounds=(0,))
    yield lambda c: ScriptedAdversary(c, abort="always", substitutions={"f_comor/1": lambda p, x: (1 - x[0], x[1])})


def test_criterion_6_committed_or(verdict):
    runs = wrong = 0
    for n in range(2, 7):
        config = ReductionConfig(n=n)
        sets = {tuple(range(1, k + 1)) for k in range(1, n)} | {tuple(range(n - k + 1, n + 1)) for k in range(1, n)}
        for corrupted, make, inputs in itertools.product(sorted(sets), list(or_directives()),
                                                         itertools.product((0, 1), repeat=n)):
            result = run_committed_or(config, inputs, make(corrupted), seed=runs)
            runs += 1
            if any(inputs[p - 1] for p in range(1, n + 1) if p not in corrupted):
                wrong += not (result.agreement() and result.common_output() == 1)
    verdict(6, wrong == 0, f"{runs} runs over n=2..6, every input vector, 23 directives: {wrong} wrong outputs")


def test_criterion_7_cleve_floor(verdict):
    parts, ok = [], True
    for name, protocol in toy_suite().items():
        result = find_cleve_attacker(protocol)
        floor = Fraction(1, 16 * protocol.rounds + 4)
        averaging = all(averaging_identity(protocol, a, j, b).holds
                        for a, j, b in itertools.product((0, 1), range(1, protocol.rounds), (0, 1)))
        ok &= result.gamma == Fraction(1, 2) and result.bias >= floor and result.bias >= result.floor and averaging
        parts.append(f"{name} {result.bias}>={floor}")
    verdict(7, ok, "exact best bias vs floor: " + ", ".join(parts) + "; averaging identity holds")


def test_criterion_8_lower_bound_pipeline(verdict):
    spec = toy_hybrid_protocol()
    frounds = [rnd for rnd in spec.rounds if isinstance(rnd, FunctionalityRound)]
    shape = spec.n == 6 and len(frounds) == 2 and all(len(c.committee) == 2 for rnd in frounds for c in rnd.calls)
    report = lower_bound_pipeline(spec, toy_embedding())
    psi = build_two_party(spec, toy_embedding())
    ok = shape and report.average_bias > 0 and report.fidelity is True
    verdict(8, ok, f"{psi.rounds}-slot two-party protocol; average bias {report.average_bias}, conditioned "
                   f"{abs(report.conditioned_signed)} == two-party {report.psi_report.bias}, bound {report.bound}")


def partition_adversaries(corrupted):
    for name in sorted(PRESETS):
        yield preset(name, corrupted)
    yield ScriptedAdversary(corrupted, abort="always", drop_rounds=(2, 3))
    yield ScriptedAdversary(corrupted, withhold=("f",))


def test_criterion_9_partition(verdict):
    outcome = {}
    for n, parallel in ((11, False), (15, True)):
        inputs = list(range(1, n + 1))
        bad = aborted = runs = 0
        for size in range(3):
            for corrupted in itertools.combinations(range(1, n + 1), size):
                for adversary in partition_adversaries(corrupted):
                    result = partition_abort_to_full(lambda xs: tuple(xs), n, 2, adversary, runs, inputs, parallel)
                    runs += 1
                    out = result.common_output()
                    fine = isinstance(out, tuple) and result.agreement() and all(
                        got == x or (p in corrupted and got == 0) for p, (got, x) in enumerate(zip(out, inputs), 1))
                    bad += not fine
                    aborted += any(c.aborted for c in result.call_ledger)
        outcome[parallel] = (runs, bad, aborted)
    (seq_runs, seq_bad, _), (par_runs, par_bad, par_aborted) = outcome[False], outcome[True]
    verdict(9, seq_bad == 0 and par_bad == 0 and par_aborted == 0,
            f"sequential n=11: {seq_bad}/{seq_runs} wrong; parallel n=15: {par_bad}/{par_runs} wrong, "
            f"{par_aborted} aborted calls")


def test_criterion_10_determinism(verdict, tmp_path):
    small = {"elect": ({}, 500), "uplift": ({}, 200), "attack": ({"protocol": "xor-3"}, 1),
             "subcommittees": ({"runs": 20}, 100)}
    same = all(dump_report(run_experiment(name, params, 7, trials)[0]) ==
               dump_report(run_experiment(name, params, 7, trials)[0]) for name, (params, trials) in small.items())
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        CliRunner().invoke(main, ["--seed", "3", "--trials", "300", "--out", str(path), "uplift"])
    cli_same = paths[0].read_bytes() == paths[1].read_bytes()
    replay = CliRunner().invoke(main, ["replay", str(paths[0])])
    ok = same and cli_same and replay.exit_code == 0 and set(small) == set(EXPERIMENTS)
    verdict(10, ok, f"reruns byte-identical for {sorted(small)}; CLI files identical {cli_same}; "
                    f"replay exit {replay.exit_code}")
