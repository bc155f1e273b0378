"""Parallel sub-committees: one restricted call per iteration over every
large subset of the elected committee."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, List, Mapping, Optional, Sequence, Tuple, Union

from ..core import ABSENT, Bot, Committee, is_bot
from ..engine import (
    AdversaryStrategy,
    Call,
    CallResult,
    ExecutionResult,
    FunctionBehavior,
    FunctionalityRound,
    ProtocolSpec,
    run,
)
from ..errors import CapExceeded, ProtocolViolation, SpecError
from ..functionalities import FunctionalitySpec, TrustedPartyType, f_elect_functionality

DEFAULT_CAP = 200_000


@dataclass(frozen=True)
class ReductionConfig:
    """Parameters of the committee reductions.

    ``m`` (committee size) and ``n_double_prime`` (parties left out of each
    sub-committee) use base-2 logarithms rounded up.  When n is smaller than
    m the whole party set is the committee and nobody is left out.
    """

    n: int
    beta: float = 0.25
    beta_prime: float = 0.3
    kappa: int = 256
    phi: float = 2.0
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.n < 1:
            raise SpecError("need at least one party")
        if not 0 <= self.beta < 1 or not 0 < self.beta_prime < 1:
            raise SpecError("beta must lie in [0, 1) and beta' in (0, 1)")
        if self.beta >= self.beta_prime:
            raise SpecError("need beta < beta'")
        if self.kappa < 2 or self.phi <= 0:
            raise SpecError("need kappa >= 2 and phi > 0")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "ReductionConfig":
        known = {"n", "beta", "beta_prime", "kappa", "phi", "cap"}
        unknown = set(data) - known - {"scheme", "mac_lambda"}
        if unknown:
            raise SpecError(f"unknown config keys: {sorted(unknown)}")
        return cls(**{k: data[k] for k in known if k in data})

    @property
    def log_kappa(self) -> float:
        return math.log2(self.kappa)

    @property
    def fallback(self) -> bool:
        return self.n < math.ceil(round(self.phi * self.log_kappa, 9))

    @property
    def m(self) -> int:
        return self.n if self.fallback else math.ceil(round(self.phi * self.log_kappa, 9))

    @property
    def n_double_prime(self) -> int:
        return 0 if self.fallback else math.ceil(round(self.log_kappa / self.phi, 9))

    @property
    def sub_size(self) -> int:
        return self.m - self.n_double_prime

    @property
    def ell(self) -> int:
        return math.comb(self.m, self.n_double_prime)

    @property
    def t(self) -> int:
        return int(math.floor(self.beta * self.n + 1e-9))

    @property
    def t_prime(self) -> int:
        return int(math.floor(self.beta_prime * self.m + 1e-9))

    @property
    def iteration_bound(self) -> int:
        return math.ceil(round(self.phi ** 2, 9))

    def honest_majority_ok(self) -> bool:
        return self.beta_prime < 0.5 and self.phi > 1 / math.sqrt(1 - 2 * self.beta_prime)

    def honest_presence_ok(self) -> bool:
        return self.phi > 1 / math.sqrt(1 - self.beta_prime)

    def require_honest_majority(self) -> None:
        if not self.honest_majority_ok():
            raise SpecError(f"phi={self.phi} needs beta' < 1/2 and phi > 1/sqrt(1 - 2 beta')")

    def require_honest_presence(self) -> None:
        if not self.honest_presence_ok():
            raise SpecError(f"phi={self.phi} needs phi > 1/sqrt(1 - beta')")

    def as_dict(self) -> dict:
        return {"n": self.n, "beta": self.beta, "beta_prime": self.beta_prime, "kappa": self.kappa,
                "phi": self.phi, "m": self.m, "n_double_prime": self.n_double_prime,
                "sub_size": self.sub_size, "ell": self.ell, "t": self.t, "t_prime": self.t_prime}


def subcommittee_count_bound(kappa: float, phi: float) -> float:
    """kappa ** (log2(e) * (2/e + 1/phi)), the polynomial bound on C(m, n'')."""
    return kappa ** (math.log2(math.e) * (2 / math.e + 1 / phi))


def enumerate_subcommittees(committee: Union[int, Committee, Sequence[int]], n_double_prime: int,
                            cap: int = DEFAULT_CAP) -> List[Committee]:
    """All subsets of size |C| - n'' in lexicographic order.

    An integer ``committee`` stands for parties 1..m.
    """
    members = tuple(range(1, committee + 1)) if isinstance(committee, int) else tuple(sorted(committee))
    m = len(members)
    if not 0 <= n_double_prime < m:
        raise SpecError("need 0 <= n'' < m")
    count = math.comb(m, n_double_prime)
    if count > cap:
        raise CapExceeded(f"{count} sub-committees exceed the cap {cap}")
    return [Committee(c) for c in itertools.combinations(members, m - n_double_prime)]


def surviving(subcommittees: Sequence[Committee], removed: Sequence[int]) -> Tuple[Committee, ...]:
    """Sub-committees with removed parties taken out; empty and repeated ones dropped."""
    gone = set(removed)
    seen = set()
    out = []
    for c in subcommittees:
        rest = tuple(p for p in c.members if p not in gone)
        if rest and rest not in seen:
            seen.add(rest)
            out.append(Committee(rest))
    return tuple(out)


@dataclass(frozen=True)
class IterationState:
    removed: Tuple[int, ...]
    value: Any = ABSENT
    aborts: Tuple[Bot, ...] = ()

    @property
    def finished(self) -> bool:
        return self.value is not ABSENT

    def outcome(self) -> Any:
        if self.finished:
            return self.value
        return self.aborts[-1] if self.aborts else Bot()


def replay_iterations(events: Sequence[Any], rounds: range) -> IterationState:
    removed: List[int] = []
    aborts = []
    for e in events:
        if not isinstance(e, CallResult) or e.round not in rounds:
            continue
        if not is_bot(e.value):
            return IterationState(tuple(removed), e.value, tuple(aborts))
        aborts.append(e.value)
        removed.extend(sorted(set(e.value.identified) - set(removed)))
    return IterationState(tuple(removed), ABSENT, tuple(aborts))


def elected_committee(events: Sequence[Any], n: int, round_index: int = 0) -> Committee:
    for e in events:
        if isinstance(e, CallResult) and e.round == round_index and isinstance(e.value, Committee):
            return e.value
    return Committee.of(range(1, n + 1))


def parallel_subcommittee_protocol(f: FunctionalitySpec, config: ReductionConfig,
                                   committee: Optional[Committee] = None) -> ProtocolSpec:
    """Optional election round, then up to ceil(phi^2) iterations.

    Without an explicit ``committee`` the parties first call f_elect for a
    committee of m parties (skipped when m = n).  Each iteration is one call
    with restricted identifiable fairness over all surviving sub-committees.
    """
    n = config.n
    rounds: List[FunctionalityRound] = []
    if committee is None and config.m < n:
        elect = f_elect_functionality(n, config.m, config.beta_prime)
        everyone = Committee.of(range(1, n + 1))
        rounds.append(FunctionalityRound((Call(everyone, elect, TrustedPartyType.full(), label="elect"),), "elect"))
    start = len(rounds)
    block = range(start, start + config.iteration_bound)
    fixed = committee

    def committee_of(public) -> Committee:
        return fixed if fixed is not None else elected_committee(public, n)

    def calls(public, r):
        state = replay_iterations(public, block)
        if state.finished:
            return ()
        base = committee_of(public)
        subs = surviving(enumerate_subcommittees(base, config.n_double_prime, config.cap), state.removed)
        if not subs:
            return ()
        caller = Committee.of(sorted({p for c in subs for p in c}))
        return (Call(caller, f, TrustedPartyType.restricted_id_fair(subs), label="subcommittees"),)

    for k in range(config.iteration_bound):
        rounds.append(FunctionalityRound(calls, f"iteration-{k}"))

    def output(view):
        return replay_iterations(view.events, block).outcome()

    return ProtocolSpec(n, tuple(rounds), FunctionBehavior(call_input=lambda v, r, c: v.input, output=output),
                        f"parallel-subcommittees[{f.name}]")


def run_parallel_subcommittees(f: FunctionalitySpec, config: ReductionConfig,
                               adversary: Optional[AdversaryStrategy] = None, seed: int = 0,
                               committee: Optional[Committee] = None,
                               inputs: Optional[Sequence[Any]] = None) -> ExecutionResult:
    """Run the reduction and check the iteration ceiling."""
    spec = parallel_subcommittee_protocol(f, config, committee)
    result = run(spec, adversary, seed, inputs)
    iterations = [c for c in result.call_ledger if c.functionality == f.name]
    if len(iterations) > config.iteration_bound:
        raise ProtocolViolation(f"{len(iterations)} iterations exceed phi^2 = {config.iteration_bound}")
    return result
