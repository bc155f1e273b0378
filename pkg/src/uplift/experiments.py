"""Named experiments behind the command line.

Each experiment is a pure function of (parameters, seed, trials) returning a
report dict and per-trial rows.  Verdicts are recomputed from the report's
own ``measured`` and ``bounds`` fields by ``judge``, so a stored report can be
checked without rerunning anything.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

from .adversaries import lowerbound, twoparty
from .adversaries.strategies import preset
from .core import Committee, is_bot
from .engine import run
from .errors import SpecError
from .functionalities import f_cf
from .randomness import SeededSource, derive_seed
from .reductions.committed_or import committed_or_protocol
from .reductions.election import err_bound, simulate_election
from .reductions.elimination import coin_flip_uplift_protocol, player_elimination_protocol
from .reductions.subcommittees import (ReductionConfig, enumerate_subcommittees, run_parallel_subcommittees,
                                      subcommittee_count_bound)

REPORT_SCHEMA = "uplift-experiment-report"
REPORT_VERSION = 1
UNIFORMITY_TOLERANCE = 0.02

Rows = List[Dict[str, Any]]


@dataclass(frozen=True)
class Experiment:
    name: str
    defaults: Mapping[str, Any]
    default_trials: int
    body: Callable[[Dict[str, Any], int, int], Tuple[Dict[str, Any], Dict[str, Any], Rows]]


def _corrupted(spec: Any, n: int, beta: float) -> Tuple[int, ...]:
    if spec in (None, "auto"):
        return tuple(range(1, int(math.floor(beta * n + 1e-9)) + 1))
    parties = tuple(sorted(int(p) for p in spec))
    if any(not 1 <= p <= n for p in parties):
        raise SpecError("corrupted parties must lie in 1..n")
    return parties


# ------------------------------------------------------------ elect

def _elect(p, seed, trials):
    n, n_prime, beta, beta_prime = int(p["n"]), int(p["n_prime"]), float(p["beta"]), float(p["beta_prime"])
    result = simulate_election(n, n_prime, beta, beta_prime, trials, seed)
    fractions = result.fractions
    measured = {
        "failures": result.failures,
        "failure_rate": result.failure_rate,
        "mean_corrupted_fraction": round(float(np.mean(fractions)), 12),
        "max_corrupted_fraction": round(float(np.max(fractions)), 12),
    }
    bounds = {"err": err_bound(n, n_prime, beta, beta_prime)}
    rows = [{"trial": k, "corrupted_fraction": round(float(f), 12), "failed": bool(f >= beta_prime - 1e-12)}
            for k, f in enumerate(fractions)]
    return measured, bounds, rows


# ------------------------------------------------------------ uplift

def _uplift(p, seed, trials):
    functionality = p["functionality"]
    n = int(p["n"])
    beta = float(p["beta"])
    if functionality == "cf" and p.get("t_prime") is not None and p.get("corrupted") in (None, "auto"):
        # elimination alone: the adversary spends exactly the abort budget
        corrupted = tuple(range(1, int(p["t_prime"]) + 1))
    else:
        corrupted = _corrupted(p.get("corrupted"), n, beta)
    adversary = preset(p["adversary"], corrupted)
    rows: Rows = []
    if functionality == "cf":
        if p.get("t_prime") is not None:
            t_prime = int(p["t_prime"])
            size = int(p.get("committee_size") or 2 * t_prime + 1)
            spec = player_elimination_protocol(f_cf(n), n, Committee.of(range(1, size + 1)), t_prime)
            ceiling = t_prime + 1
        else:
            spec = coin_flip_uplift_protocol(n, int(p["n_prime"]))
            ceiling = n
        inputs_for = lambda k: None
    elif functionality == "or":
        config = ReductionConfig.from_mapping({k: p[k] for k in ("n", "beta", "beta_prime", "kappa", "phi", "cap")
                                               if p.get(k) is not None})
        spec = committed_or_protocol(config)
        ceiling = 2 * (n if config.fallback else config.iteration_bound)
        fixed = p.get("inputs")
        rng = SeededSource(seed).numpy("or-inputs")
        drawn = rng.integers(0, 2, size=(trials, n))
        if fixed is not None:
            inputs_for = lambda k: [int(x) for x in fixed]
        else:
            inputs_for = lambda k: [int(x) for x in drawn[k]]
    else:
        raise SpecError(f"unknown functionality {functionality!r}; choose cf or or")
    for k in range(trials):
        inputs = inputs_for(k)
        result = run(spec, adversary, derive_seed(seed, "trial", k), inputs)
        output = result.common_output()
        honest_inputs = [inputs[q - 1] for q in range(1, n + 1) if q not in corrupted] if inputs else []
        row = {"trial": k, "output": repr(output) if is_bot(output) else output,
               "calls": result.calls_made, "rounds": result.rounds_used, "agreed": result.agreement()}
        if functionality == "or":
            row["honest_one"] = int(any(honest_inputs))
            row["correct"] = (output == 1) if any(honest_inputs) else output in (0, 1)
        rows.append(row)
    outputs = [r["output"] for r in rows]
    measured: Dict[str, Any] = {
        "trials": trials,
        "agreement_rate": sum(r["agreed"] for r in rows) / trials,
        "max_calls": max(r["calls"] for r in rows),
        "min_calls": min(r["calls"] for r in rows),
        "max_rounds": max(r["rounds"] for r in rows),
        "ones_frequency": sum(1 for o in outputs if o == 1) / trials,
        "abort_outputs": sum(1 for o in outputs if o not in (0, 1)),
    }
    bounds: Dict[str, Any] = {"call_ceiling": ceiling}
    if functionality == "cf":
        bounds["uniformity_tolerance"] = UNIFORMITY_TOLERANCE
    else:
        measured["correct_rate"] = sum(r["correct"] for r in rows) / trials
    return measured, bounds, rows


# ------------------------------------------------------------ attack

def hybrid_presets() -> Dict[str, Tuple[Any, lowerbound.TwoPartyEmbedding]]:
    one_phase = lowerbound.toy_hybrid_protocol(6, (((1, 2), (3, 4), (5, 6)),))
    return {
        "toy-hybrid": (lowerbound.toy_hybrid_protocol(), lowerbound.toy_embedding()),
        "toy-hybrid-aborting": (one_phase,
                                lowerbound.TwoPartyEmbedding(6, Fraction(2, 3), (1, 2), 1, J=((3,),))),
    }


def attack_protocols() -> List[str]:
    return sorted(twoparty.toy_suite()) + sorted(hybrid_presets())


def _attack(p, seed, trials):
    name = p["protocol"]
    mode = p["mode"]
    honest = bool(p.get("honest"))
    if mode not in ("exact", "monte_carlo"):
        raise SpecError(f"unknown mode {mode!r}")
    suite = twoparty.toy_suite()
    if name in suite:
        protocol = suite[name]
        cleve = twoparty.find_cleve_attacker(protocol)
        if honest:
            mean, leaves = twoparty.exact_mean(protocol, None, ())
            report = twoparty.BiasReport(mean, leaves, 0.0, True)
        elif mode == "exact":
            report = twoparty.attack_bias(protocol, cleve.attack)
        else:
            report = twoparty.estimate_attack_bias(protocol, cleve.attack, trials, seed)
        measured = {"bias": _num(report.bias), "mean": _num(report.mean), "exact": report.exact,
                    "stderr": report.stderr, "attack": cleve.attack.as_dict(), "gamma": str(cleve.gamma),
                    "rounds": protocol.rounds, "honest": honest}
        bounds = {"floor": 0.0 if honest else float(cleve.floor), "floor_fraction": str(cleve.floor)}
        rows = [{**attack.as_dict(), "mean": str(mean)} for attack, mean in cleve.table]
        return measured, bounds, rows
    presets = hybrid_presets()
    if name not in presets:
        raise SpecError(f"unknown protocol {name!r}; choose from {attack_protocols()}")
    spec, embedding = presets[name]
    if honest:
        report = lowerbound.measure_bias(spec, None, mode, trials, seed)
        measured = {"bias": _num(report.bias), "mean": _num(report.mean), "exact": report.exact, "honest": True}
        return measured, {"floor": 0.0}, []
    pipeline = lowerbound.lower_bound_pipeline(spec, embedding)
    data = pipeline.as_dict()
    measured = {"bias": float(pipeline.average_bias), "bias_fraction": str(pipeline.average_bias),
                "route": pipeline.route, "fidelity": pipeline.fidelity,
                "conditioned_signed": data["conditioned_signed"], "psi_signed": str(pipeline.psi_report.signed),
                "probability_all_corrupted": data["probability_all_corrupted"],
                "embedding": embedding.as_dict(), "honest": False}
    if pipeline.cleve is not None:
        measured["attack"] = pipeline.cleve.attack.as_dict()
    if mode == "monte_carlo":
        psi = lowerbound.build_two_party(spec, embedding)
        estimates = []
        for T, _, _ in pipeline.per_T:
            if pipeline.cleve is not None:
                strategy = lowerbound.translate_attack(psi, pipeline.cleve.attack, T)
            else:
                strategy = lowerbound.AbortingSets(spec, embedding.J)
            estimates.append(lowerbound.measure_bias(spec, strategy, "monte_carlo", trials, seed).signed)
        measured["monte_carlo_bias"] = abs(sum(estimates) / len(estimates))
    bounds = {"floor": float(pipeline.bound), "floor_fraction": str(pipeline.bound)}
    rows = [{"T": " ".join(map(str, T)), "armed": armed, "mean": str(rep.mean)} for T, rep, armed in pipeline.per_T]
    return measured, bounds, rows


def _num(value) -> float:
    return float(value)


# ------------------------------------------------------------ subcommittees

def _subcommittees(p, seed, trials):
    kappa, phi, beta_prime = int(p["kappa"]), float(p["phi"]), float(p["beta_prime"])
    beta = float(p["beta"])
    m = math.ceil(round(phi * math.log2(kappa), 9))
    n = int(p.get("n") or m)
    config = ReductionConfig(n=n, beta=beta, beta_prime=beta_prime, kappa=kappa, phi=phi)
    rng = SeededSource(seed).numpy("fills")
    t_prime = config.t_prime
    subs = enumerate_subcommittees(config.m, config.n_double_prime, config.cap) if config.n_double_prime else []
    members = np.array([s.members for s in subs], dtype=np.int64) if subs else np.zeros((1, config.m), np.int64)
    rows: Rows = []
    worst = 0
    for k in range(trials):
        fill = np.zeros(config.m + 1, dtype=bool)
        fill[rng.choice(np.arange(1, config.m + 1), size=t_prime, replace=False)] = True
        corrupted_counts = fill[members].sum(axis=1)
        worst_here = int(corrupted_counts.max())
        worst = max(worst, worst_here)
        rows.append({"trial": k, "max_corrupted_in_subcommittee": worst_here})
    runs = int(p.get("runs", 0))
    aborting = tuple(range(1, int(p.get("aborting") or t_prime) + 1))
    rounds_used = []
    for k in range(runs):
        result = run_parallel_subcommittees(f_cf(n), config, preset("abort-always", aborting),
                                            derive_seed(seed, "reduction", k))
        rounds_used.append(result.functionality_rounds_used)
    measured = {
        "m": config.m, "n_double_prime": config.n_double_prime, "sub_size": config.sub_size, "ell": config.ell,
        "t_prime": t_prime, "max_corrupted_in_subcommittee": worst,
        "honest_majority_condition": config.honest_majority_ok(),
        "max_functionality_rounds": max(rounds_used) if rounds_used else 0, "reduction_runs": runs,
    }
    bounds = {"subcommittee_count": subcommittee_count_bound(kappa, phi), "iteration_ceiling": config.iteration_bound}
    return measured, bounds, rows


EXPERIMENTS: Dict[str, Experiment] = {
    "elect": Experiment("elect", {"n": 2000, "n_prime": 100, "beta": 0.3, "beta_prime": 0.6}, 10_000, _elect),
    "uplift": Experiment("uplift", {"functionality": "cf", "n": 24, "n_prime": 8, "beta": 0.25, "beta_prime": 0.3,
                                    "adversary": "abort-always", "corrupted": "auto", "t_prime": None,
                                    "committee_size": None, "inputs": None, "kappa": 256, "phi": 2.0,
                                    "cap": None}, 1000, _uplift),
    "attack": Experiment("attack", {"protocol": "toy-hybrid", "mode": "exact", "honest": False}, 1000, _attack),
    "subcommittees": Experiment("subcommittees", {"kappa": 256, "phi": 2.0, "beta": 0.2, "beta_prime": 0.25,
                                                  "n": None, "runs": 0, "aborting": None}, 1000, _subcommittees),
}


def judge(experiment: str, parameters: Mapping[str, Any], measured: Mapping[str, Any],
          bounds: Mapping[str, Any]) -> Dict[str, bool]:
    """Verdicts computed only from a report's fields."""
    if experiment == "elect":
        return {"failure_rate_within_err": measured["failure_rate"] <= bounds["err"]}
    if experiment == "uplift":
        out = {"honest_agree": measured["agreement_rate"] == 1.0,
               "calls_within_ceiling": measured["max_calls"] <= bounds["call_ceiling"]}
        if parameters["functionality"] == "cf":
            out["ones_near_half"] = abs(measured["ones_frequency"] - 0.5) <= bounds["uniformity_tolerance"]
        else:
            out["or_correct"] = measured["correct_rate"] == 1.0
        return out
    if experiment == "attack":
        if measured.get("honest"):
            return {"honest_bias_zero": measured["bias"] == 0}
        out = {"bias_at_least_floor": measured["bias"] >= bounds["floor"], "bias_positive": measured["bias"] > 0}
        if "fidelity" in measured:
            out["embedding_fidelity"] = measured["fidelity"] is True
        return out
    if experiment == "subcommittees":
        return {"ell_within_count_bound": measured["ell"] <= bounds["subcommittee_count"],
                "honest_majority_condition": bool(measured["honest_majority_condition"]),
                "subcommittees_keep_honest_majority":
                    2 * measured["max_corrupted_in_subcommittee"] < measured["sub_size"],
                "within_iteration_ceiling": measured["max_functionality_rounds"] <= bounds["iteration_ceiling"]}
    raise SpecError(f"unknown experiment {experiment!r}")


def resolve_parameters(experiment: str, given: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    if experiment not in EXPERIMENTS:
        raise SpecError(f"unknown experiment {experiment!r}; choose from {sorted(EXPERIMENTS)}")
    params = dict(EXPERIMENTS[experiment].defaults)
    for key, value in (given or {}).items():
        if key not in params:
            raise SpecError(f"unknown parameter {key!r} for {experiment}; known: {sorted(params)}")
        if value is not None:
            params[key] = value
    return params


def run_experiment(experiment: str, parameters: Optional[Mapping[str, Any]] = None, seed: int = 0,
                   trials: Optional[int] = None) -> Tuple[Dict[str, Any], Rows]:
    """Run a named experiment; returns the report and the per-trial rows."""
    params = resolve_parameters(experiment, parameters)
    trials = int(trials if trials is not None else EXPERIMENTS[experiment].default_trials)
    if trials < 1:
        raise SpecError("trials must be at least 1")
    measured, bounds, rows = EXPERIMENTS[experiment].body(dict(params), int(seed), trials)
    verdicts = judge(experiment, params, measured, bounds)
    report = {
        "schema": REPORT_SCHEMA,
        "version": REPORT_VERSION,
        "experiment": experiment,
        "parameters": params,
        "seed": int(seed),
        "trials": trials,
        "measured": measured,
        "bounds": bounds,
        "verdicts": verdicts,
        "passed": all(verdicts.values()),
    }
    return report, rows


def check_report(report: Mapping[str, Any]) -> None:
    """Validate the envelope of a stored report."""
    if report.get("schema") != REPORT_SCHEMA:
        raise SpecError("not an experiment report")
    if report.get("version") != REPORT_VERSION:
        raise SpecError(f"report version {report.get('version')} is not supported (expected {REPORT_VERSION})")
    for key in ("experiment", "parameters", "seed", "trials", "measured", "bounds", "verdicts"):
        if key not in report:
            raise SpecError(f"report is missing {key!r}")


def rejudge(report: Mapping[str, Any]) -> Dict[str, bool]:
    check_report(report)
    return judge(report["experiment"], report["parameters"], report["measured"], report["bounds"])
