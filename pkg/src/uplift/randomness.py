"""Keyed randomness.

Every random value in a simulation is addressed by a key (a tuple of ints and
strings) and a radix.  A seeded source hashes (seed, key) so that the value of a
key never depends on which other keys were requested, or in what order.  An
enumerating source turns every distinct key into a branch point so that all
outcomes of a small computation can be visited with exact probabilities.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, List, Tuple

import numpy as np

from .errors import ScaleError

Key = Tuple[Any, ...]


def _key_bytes(key: Key) -> bytes:
    return json.dumps(list(key), separators=(",", ":"), default=str).encode()


class SeededSource:
    """Deterministic keyed source: value = H(seed, key) mod radix."""

    def __init__(self, seed: int):
        self.seed = int(seed) & ((1 << 64) - 1)
        self._seed_bytes = self.seed.to_bytes(8, "little")

    def draw(self, key: Key, radix: int) -> int:
        if radix < 1:
            raise ValueError("radix must be positive")
        if radix == 1:
            return 0
        digest = hashlib.blake2b(_key_bytes(key), digest_size=16, key=self._seed_bytes).digest()
        return int.from_bytes(digest, "little") % radix

    def numpy(self, *label: Any) -> np.random.Generator:
        """Bulk generator for Monte Carlo loops, derived from the seed and a label."""
        digest = hashlib.blake2b(_key_bytes(label), digest_size=16, key=self._seed_bytes).digest()
        return np.random.default_rng(np.random.SeedSequence([self.seed, int.from_bytes(digest, "little")]))


class EnumeratingSource:
    """Replays one branch of the coin tree and records the branch points.

    ``prefix`` gives the values of the first branch points in request order;
    later branch points take value 0.
    """

    def __init__(self, prefix: List[int], max_radix: int):
        self.prefix = prefix
        self.max_radix = max_radix
        self.assigned: Dict[Key, int] = {}
        self.radices: List[int] = []

    def draw(self, key: Key, radix: int) -> int:
        if radix == 1:
            return 0
        value = self.assigned.get(key)
        if value is not None:
            return value % radix
        if radix > self.max_radix:
            raise ScaleError(f"radix {radix} for key {key!r} is too large to enumerate")
        idx = len(self.radices)
        value = self.prefix[idx] if idx < len(self.prefix) else 0
        self.radices.append(radix)
        self.assigned[key] = value
        return value


def enumerate_outcomes(
    fn: Callable[[Any], Any],
    max_leaves: int = 1 << 22,
    max_radix: int = 1 << 16,
) -> Iterator[Tuple[Fraction, Any]]:
    """Yield (probability, fn(source)) for every leaf of fn's coin tree.

    ``fn`` must be deterministic given the source.  The tree is walked depth
    first with an odometer over the recorded branch points.
    """
    prefix: List[int] = []
    leaves = 0
    while True:
        source = EnumeratingSource(prefix, max_radix)
        result = fn(source)
        leaves += 1
        if leaves > max_leaves:
            raise ScaleError(f"coin space exceeds {max_leaves} outcomes")
        prob = Fraction(1)
        for r in source.radices:
            prob /= r
        yield prob, result
        values = [prefix[i] if i < len(prefix) else 0 for i in range(len(source.radices))]
        pos = len(values) - 1
        while pos >= 0 and values[pos] + 1 >= source.radices[pos]:
            pos -= 1
        if pos < 0:
            return
        prefix = values[:pos] + [values[pos] + 1]


class ForkedSource:
    """A view of ``base`` in which keys matching ``hidden`` are redrawn.

    Used for hypothetical continuations: values the acting party already knows
    come from the real source, values it cannot know yet are fresh.
    """

    def __init__(self, base, hidden: Callable[[Key], bool], tag: Key):
        self.base = base
        self.hidden = hidden
        self.tag = tuple(tag)

    def draw(self, key: Key, radix: int) -> int:
        if self.hidden(key):
            return self.base.draw(("hyp",) + self.tag + tuple(key), radix)
        return self.base.draw(key, radix)


class Namespace:
    """Prefixes every key, giving a component its own slice of a source."""

    def __init__(self, source, *prefix: Any):
        self.source = source
        self.prefix = tuple(prefix)

    def draw(self, key: Key, radix: int) -> int:
        return self.source.draw(self.prefix + tuple(key), radix)

    def randbelow(self, radix: int, *label: Any) -> int:
        return self.draw(label, radix)

    def child(self, *label: Any) -> "Namespace":
        return Namespace(self.source, *(self.prefix + label))


class Counter:
    """Sequential draws from a namespace, for code that wants a stream."""

    def __init__(self, space: Namespace):
        self.space = space
        self.index = 0

    def randbelow(self, radix: int) -> int:
        value = self.space.draw(("ctr", self.index), radix)
        self.index += 1
        return value


def derive_seed(seed: int, *label: Any) -> int:
    key = (int(seed) & ((1 << 64) - 1)).to_bytes(8, "little")
    digest = hashlib.blake2b(_key_bytes(label), digest_size=8, key=key).digest()
    return int.from_bytes(digest, "little")
