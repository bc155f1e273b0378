"""Command-line front end: ``uplift [global flags] elect|uplift|attack|subcommittees|replay``.

Every subcommand prints a table, and with ``--out`` writes the versioned JSON
report; ``--csv`` writes the per-trial rows.  Parameters come from the
command line, then the ``--config`` file section named after the subcommand,
then the experiment defaults.  Reports contain no timestamps, so a rerun with
the same seed writes a byte-identical file.
"""

from __future__ import annotations

import csv
import json
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import click

from . import _kernels
from .adversaries.strategies import PRESETS
from .errors import UpliftError
from .experiments import attack_protocols, check_report, rejudge, resolve_parameters, run_experiment


def dump_report(report: Mapping[str, Any]) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_csv(path: Path, rows: List[Dict[str, Any]]) -> None:
    columns: List[str] = []
    for row in rows:
        columns.extend(k for k in row if k not in columns)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


def _flatten(prefix: str, value: Any, out: List[tuple]) -> None:
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(f"{prefix}.{key}" if prefix else key, value[key], out)
    else:
        out.append((prefix, value))


def format_table(report: Mapping[str, Any], seconds: Optional[float] = None) -> str:
    lines = [f"experiment  {report['experiment']}  (seed {report['seed']}, trials {report['trials']})"]
    for section in ("parameters", "measured", "bounds", "verdicts"):
        items: List[tuple] = []
        _flatten("", report[section], items)
        if not items:
            continue
        lines.append(f"[{section}]")
        width = max(len(k) for k, _ in items)
        lines.extend(f"  {k.ljust(width)}  {v}" for k, v in items)
    lines.append(f"overall     {'PASS' if report['passed'] else 'FAIL'}")
    if seconds is not None:
        lines.append(f"wall-clock  {seconds:.2f}s  (kernel backend {_kernels.BACKEND})")
    return "\n".join(lines)


def load_config(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise click.BadParameter("the config file must hold a JSON object", param_hint="--config")
    return data


def _ints(text: Optional[str]) -> Optional[List[int]]:
    if text is None:
        return None
    return [int(x) for x in text.replace(",", " ").split()]


def _emit(ctx: click.Context, report: Dict[str, Any], rows: List[Dict[str, Any]], seconds: float) -> None:
    opts = ctx.obj
    click.echo(format_table(report, seconds))
    if opts["out"]:
        Path(opts["out"]).write_text(dump_report(report))
    if opts["csv"]:
        write_csv(Path(opts["csv"]), rows)


def _run(ctx: click.Context, experiment: str, given: Dict[str, Any]) -> None:
    opts = ctx.obj
    config = opts["config"]
    section = config.get(experiment, {})
    if not isinstance(section, dict):
        raise click.BadParameter(f"config section {experiment!r} must be an object", param_hint="--config")
    merged = dict(section)
    merged.update({k: v for k, v in given.items() if v is not None})
    seed = opts["seed"] if opts["seed"] is not None else int(config.get("seed", 0))
    trials = opts["trials"] if opts["trials"] is not None else config.get("trials")
    try:
        params = resolve_parameters(experiment, merged)
        start = time.perf_counter()
        report, rows = run_experiment(experiment, params, seed, trials)
    except UpliftError as exc:
        raise click.ClickException(str(exc)) from exc
    _emit(ctx, report, rows, time.perf_counter() - start)


@click.group()
@click.option("--seed", type=int, default=None, help="Master seed (default 0).")
@click.option("--trials", type=int, default=None, help="Number of trials (experiment default otherwise).")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the JSON report here.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON config file; see docs/config.md.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None, help="Write per-trial rows here.")
@click.pass_context
def main(ctx, seed, trials, out, config_path, csv_path):
    """Experiments on committee-based uplifting of fairness and the matching attacks."""
    ctx.obj = {"seed": seed, "trials": trials, "out": out, "csv": csv_path, "config": load_config(config_path)}


@main.command()
@click.option("--n", type=int)
@click.option("--n-prime", type=int, help="Target committee size.")
@click.option("--beta", type=float, help="Corrupted fraction overall.")
@click.option("--beta-prime", type=float, help="Corrupted fraction counted as a failed election.")
@click.pass_context
def elect(ctx, n, n_prime, beta, beta_prime):
    """Lightest-bin election against a bin-stuffing adversary."""
    _run(ctx, "elect", {"n": n, "n_prime": n_prime, "beta": beta, "beta_prime": beta_prime})


@main.command()
@click.option("--functionality", type=click.Choice(["cf", "or"]))
@click.option("--n", type=int)
@click.option("--n-prime", type=int, help="Committee size for the composed coin flip.")
@click.option("--beta", type=float)
@click.option("--beta-prime", type=float)
@click.option("--kappa", type=int)
@click.option("--phi", type=float)
@click.option("--adversary", type=click.Choice(sorted(PRESETS)))
@click.option("--corrupted",
              help="Comma-separated party ids (default: the first floor(beta n), or the first t' with --t-prime).")
@click.option("--t-prime", type=int, help="Run player elimination alone with this abort budget.")
@click.option("--committee-size", type=int, help="Committee size for --t-prime (default 2t'+1).")
@click.option("--inputs", help="Comma-separated OR inputs (default: random per trial).")
@click.pass_context
def uplift(ctx, functionality, n, n_prime, beta, beta_prime, kappa, phi, adversary, corrupted, t_prime,
           committee_size, inputs):
    """Run a reduction end to end and report rounds, calls and output statistics."""
    _run(ctx, "uplift", {"functionality": functionality, "n": n, "n_prime": n_prime, "beta": beta,
                         "beta_prime": beta_prime, "kappa": kappa, "phi": phi, "adversary": adversary,
                         "corrupted": _ints(corrupted), "t_prime": t_prime, "committee_size": committee_size,
                         "inputs": _ints(inputs)})


@main.command()
@click.option("--protocol", type=click.Choice(attack_protocols()))
@click.option("--mode", type=click.Choice(["exact", "monte_carlo"]))
@click.option("--honest/--attacked", default=None, help="Measure the honest execution instead.")
@click.pass_context
def attack(ctx, protocol, mode, honest):
    """Find the best single-round attacker and measure the bias it forces."""
    _run(ctx, "attack", {"protocol": protocol, "mode": mode, "honest": honest})


@main.command()
@click.option("--kappa", type=int)
@click.option("--phi", type=float)
@click.option("--beta", type=float)
@click.option("--beta-prime", type=float)
@click.option("--n", type=int, help="Parties for the reduction runs (default m).")
@click.option("--runs", type=int, help="End-to-end runs of the parallel reduction.")
@click.option("--aborting", type=int, help="Aborting parties in those runs (default t').")
@click.pass_context
def subcommittees(ctx, kappa, phi, beta, beta_prime, n, runs, aborting):
    """Sub-committee counts, the polynomial bound and the honest-majority check."""
    _run(ctx, "subcommittees", {"kappa": kappa, "phi": phi, "beta": beta, "beta_prime": beta_prime, "n": n,
                                "runs": runs, "aborting": aborting})


@main.command()
@click.argument("report_path", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def replay(ctx, report_path):
    """Rerun a stored report and check that the result is byte-identical."""
    text = Path(report_path).read_text()
    try:
        stored = json.loads(text)
        check_report(stored)
        if rejudge(stored) != stored["verdicts"]:
            raise click.ClickException("stored verdicts do not follow from the stored measurements")
        start = time.perf_counter()
        report, rows = run_experiment(stored["experiment"], stored["parameters"], stored["seed"], stored["trials"])
    except (UpliftError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    _emit(ctx, report, rows, time.perf_counter() - start)
    if dump_report(report) != dump_report(stored):
        changed = sorted(k for k in report if report[k] != stored.get(k))
        click.echo(f"replay DIFFERS in {', '.join(changed)}", err=True)
        sys.exit(1)
    click.echo("replay identical")


if __name__ == "__main__":
    main()
