"""Lightest-bin committee election and its error bound."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .. import _kernels
from ..core import ABSENT, BROADCAST, Committee
from ..engine import CommunicationRound, FunctionBehavior, ProtocolSpec
from ..randomness import SeededSource


def bin_count(n: int, n_prime: int) -> int:
    return -(-n // n_prime)


def err_bound(n: int, n_prime: int, beta: float, beta_prime: float) -> float:
    """(n/n') * exp(-(beta' - beta)^2 * n' / (2 (1 - beta)))."""
    if not 0 < n_prime <= n:
        raise ValueError("need 0 < n' <= n")
    if not 0 <= beta < 1:
        raise ValueError("beta must lie in [0, 1)")
    return (n / n_prime) * math.exp(-((beta_prime - beta) ** 2) * n_prime / (2 * (1 - beta)))


def lightest_bin(bins: Sequence[int], k: int) -> int:
    """Index (1-based) of the least-populated nonempty bin, lowest index on ties."""
    counts = [0] * (k + 1)
    for b in bins:
        if 1 <= b <= k:
            counts[b] += 1
    nonempty = [b for b in range(1, k + 1) if counts[b] > 0]
    if not nonempty:
        raise ValueError("no party chose a valid bin")
    return min(nonempty, key=lambda b: (counts[b], b))


def feige_elect(n: int, n_prime: int, bins: Optional[Sequence[int]] = None, seed: Optional[int] = None) -> Committee:
    """Parties in the lightest of ceil(n/n') bins.

    ``bins[i]`` is party (i+1)'s 1-based choice; when omitted, choices are
    drawn uniformly from ``seed``.  Entries outside 1..k (for example a party
    that never announced a bin) are ignored.
    """
    if not 0 < n_prime < n:
        raise ValueError("need 0 < n' < n")
    k = bin_count(n, n_prime)
    if bins is None:
        source = SeededSource(seed or 0)
        bins = [source.draw(("bin", p), k) + 1 for p in range(1, n + 1)]
    if len(bins) != n:
        raise ValueError("one bin choice per party")
    target = lightest_bin(bins, k)
    return Committee.of(p for p, b in enumerate(bins, start=1) if b == target)


def _committee(bins: Sequence[int], k: int) -> Committee:
    target = lightest_bin(bins, k)
    return Committee.of(p for p, b in enumerate(bins, start=1) if b == target)


def committee_from_broadcasts(announced: dict, n: int, k: int) -> Committee:
    """Elected committee given each party's announced bin; missing or
    malformed announcements are ignored."""
    bins = []
    for p in range(1, n + 1):
        b = announced.get(p, ABSENT)
        bins.append(b if isinstance(b, int) and not isinstance(b, bool) and 1 <= b <= k else 0)
    return _committee(bins, k)


def elect_from_view(view, round_index: int, k: int) -> Committee:
    return committee_from_broadcasts(view.broadcasts(round_index), view.n, k)


def feige_protocol(n: int, n_prime: int) -> ProtocolSpec:
    """One broadcast round; every party outputs the elected committee."""
    k = bin_count(n, n_prime)

    def send(view, r):
        return {BROADCAST: view.coins.draw(("bin",), k) + 1}

    def output(view):
        return elect_from_view(view, 0, k)

    return ProtocolSpec(n, (CommunicationRound("bins"),), FunctionBehavior(send=send, output=output), "lightest-bin")


@dataclass(frozen=True)
class ElectionTrials:
    fractions: np.ndarray
    threshold: float

    @property
    def failures(self) -> int:
        return int((self.fractions >= self.threshold - 1e-12).sum())

    @property
    def failure_rate(self) -> float:
        return self.failures / len(self.fractions) if len(self.fractions) else 0.0


def simulate_election(n: int, n_prime: int, beta: float, beta_prime: float, trials: int, seed: int) -> ElectionTrials:
    """Monte Carlo of the lightest-bin election against the strongest rushing
    adversary holding floor(beta * n) parties.

    Honest parties choose bins uniformly; the adversary then places its parties
    to maximise the corrupted fraction of the elected bin (see
    ``_kernels.lightest_bin_attack``).
    """
    k = bin_count(n, n_prime)
    corrupted = int(math.floor(beta * n + 1e-9))
    honest = n - corrupted
    rng = SeededSource(seed).numpy("elect", n, n_prime)
    counts = rng.multinomial(honest, [1.0 / k] * k, size=trials)
    fractions = _kernels.lightest_bin_attack(counts, corrupted, beta_prime)
    return ElectionTrials(np.asarray(fractions), beta_prime)
