"""Scripted fail-stop adversaries used by the reductions' tests and the CLI."""

from __future__ import annotations

from typing import Any, Callable, Dict, FrozenSet, Iterable, Optional, Sequence, Set

from ..engine import AdversaryStrategy, CallContext, SendContext
from ..functionalities import Abort, CallInfo

ABORT_POLICIES = ("never", "always", "random", "first")


def minimal_identities(info: CallInfo) -> Abort:
    """One identity per required slot, reusing names already chosen in this
    call so that the adversary reveals as few parties as it can."""
    chosen: list = []
    for legal in info.legal_identities:
        reuse = sorted(set(chosen) & legal)
        chosen.append(reuse[0] if reuse else min(legal))
    return Abort(tuple(chosen))


class ScriptedAdversary(AdversaryStrategy):
    """Fail-stop adversary driven by a few switches.

    ``abort`` is one of "never", "always", "random" (a fair coin per call from
    the adversary's own randomness) or "first" (the first ``k`` abortable
    calls).  Calls are only aborted when the ideal model admits it.  ``late``
    prefers aborting after seeing the corrupted outputs where the model has a
    late-abort phase.  ``drop_rounds`` lists communication rounds in which the
    corrupted parties send nothing; ``withhold`` lists functionality names for
    which they supply no input.  ``targets`` restricts aborts to calls of the
    named functionalities.  ``substitutions`` maps a functionality name to
    ``fn(pid, honest_input) -> input``; using it makes the adversary
    non-fail-stop.
    """

    def __init__(self, corrupted: Iterable[int], abort: str = "never", k: int = 0, late: bool = False,
                 drop_rounds: Iterable[int] = (), withhold: Iterable[str] = (),
                 targets: Optional[Iterable[str]] = None, name: Optional[str] = None,
                 substitutions: Optional[Dict[str, Callable[[int, Any], Any]]] = None):
        super().__init__(corrupted, fail_stop=not substitutions)
        self.substitutions = dict(substitutions or {})
        if abort not in ABORT_POLICIES:
            raise ValueError(f"unknown abort policy {abort!r}")
        self.abort = abort
        self.k = k
        self.late = late
        self.drop_rounds = frozenset(drop_rounds)
        self.withhold = frozenset(withhold)
        self.targets = frozenset(targets) if targets is not None else None
        self.aborted = 0
        self.name = name or f"abort-{abort}"

    def _wants(self, ctx: CallContext) -> bool:
        if not ctx.info.abort_allowed:
            return False
        if self.targets is not None and ctx.call.functionality.name not in self.targets:
            return False
        if self.abort == "always":
            return True
        if self.abort == "first":
            return self.aborted < self.k
        if self.abort == "random":
            return bool(self.run.coins.draw(("abort", ctx.round_index, ctx.call_index), 2))
        return False

    def _abort(self, ctx: CallContext) -> Abort:
        self.aborted += 1
        return minimal_identities(ctx.info)

    def send(self, ctx: SendContext):
        if ctx.round_index in self.drop_rounds:
            return {}
        return ctx.defaults

    def substitute(self, ctx, inputs):
        name = ctx.call.functionality.name
        if name in self.withhold:
            return {}
        if name in self.substitutions:
            return {p: self.substitutions[name](p, x) for p, x in inputs.items()}
        return inputs

    def early_abort(self, ctx):
        late_possible = self.late and ctx.info.tp.allows_late_abort
        if not late_possible and self._wants(ctx):
            return self._abort(ctx)
        return None

    def late_abort(self, ctx, corrupted_outputs):
        if self.late and self._wants(ctx):
            return self._abort(ctx)
        return None

    def dictate(self, ctx, inputs, outputs):
        if self._wants(ctx):
            return self._abort(ctx)
        return None

    def describe(self) -> Dict[str, Any]:
        out = super().describe()
        out.update({"abort": self.abort, "k": self.k, "late": self.late,
                    "drop_rounds": sorted(self.drop_rounds), "withhold": sorted(self.withhold)})
        return out


def _preset(name: str, **kw) -> Callable[[Iterable[int]], ScriptedAdversary]:
    return lambda corrupted: ScriptedAdversary(corrupted, name=name, **kw)


PRESETS: Dict[str, Callable[[Iterable[int]], AdversaryStrategy]] = {
    "never-abort": _preset("never-abort"),
    "abort-always": _preset("abort-always", abort="always"),
    "abort-random": _preset("abort-random", abort="random"),
    "abort-first-2": _preset("abort-first-2", abort="first", k=2),
    "drop-election": _preset("drop-election", abort="always", drop_rounds=(0,)),
    "abort-late": _preset("abort-late", abort="always", late=True),
}


def preset(name: str, corrupted: Iterable[int]) -> AdversaryStrategy:
    if name not in PRESETS:
        raise KeyError(f"unknown adversary preset {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[name](corrupted)
