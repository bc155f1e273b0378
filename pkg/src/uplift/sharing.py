"""Secret sharing: additive, Shamir, and error-correcting variants.

Secrets are byte strings.  They are encoded as a vector of field elements: a
length prefix followed by 7-byte little-endian chunks, so every element is
below 2^56 < p.  Each element is shared independently with the same
evaluation points (party i holds the evaluation at x = i).

``EcssPerfect`` is Shamir sharing decoded with Berlekamp-Welch and needs
t < n/3.  ``EcssMac`` authenticates every share towards every other party with
a one-time polynomial MAC and works for t < n/2: a share is accepted when it
is supported by at least n - t parties (itself included).
"""

from __future__ import annotations

import enum
import math
import secrets
from dataclasses import dataclass
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .errors import InsufficientShares, InvalidThreshold, ReconstructionFailure
from .field import P, add, interpolate_at_zero, lagrange_interpolate, mul, sub

CHUNK_BYTES = 7
DEFAULT_MAC_LAMBDA = 40


class Scheme(enum.Enum):
    ADDITIVE = "additive"
    SHAMIR = "shamir"
    ECSS_PERFECT = "ecss-perfect"
    ECSS_MAC = "ecss-mac"


@dataclass(frozen=True)
class Share:
    index: int
    values: Tuple[int, ...]


@dataclass(frozen=True)
class MacShare:
    """Share plus authentication material.

    ``tags[j - 1]`` authenticates this share towards verifier j; ``keys[i - 1]``
    is the key this party uses to verify party i's share.  Each tag or key is a
    tuple with one entry per MAC repetition.
    """

    index: int
    values: Tuple[int, ...]
    tags: Tuple[Tuple[int, ...], ...]
    keys: Tuple[Tuple[Tuple[int, int], ...], ...]


@dataclass(frozen=True)
class ShareSet:
    scheme: Scheme
    n: int
    t: int
    shares: Tuple[Optional[Any], ...]
    secret_len: int
    mac_reps: int = 0

    def __post_init__(self):
        if len(self.shares) != self.n:
            raise ValueError("a share set holds exactly one entry per party")

    def present(self) -> List[int]:
        return [i + 1 for i, s in enumerate(self.shares) if s is not None]

    def only(self, indices: Iterable[int]) -> "ShareSet":
        """Copy keeping the listed parties' entries and marking the rest absent."""
        keep = set(indices)
        shares = tuple(s if i + 1 in keep else None for i, s in enumerate(self.shares))
        return ShareSet(self.scheme, self.n, self.t, shares, self.secret_len, self.mac_reps)

    def replace(self, index: int, payload: Any) -> "ShareSet":
        shares = list(self.shares)
        shares[index - 1] = payload
        return ShareSet(self.scheme, self.n, self.t, tuple(shares), self.secret_len, self.mac_reps)


def check_threshold(scheme: Scheme, n: int, t: int) -> None:
    if n < 1 or t < 0:
        raise InvalidThreshold(f"need n >= 1 and t >= 0, got n={n}, t={t}")
    if scheme is Scheme.ADDITIVE:
        if t != n - 1:
            raise InvalidThreshold("additive sharing has t = n - 1")
    elif t >= n:
        raise InvalidThreshold("threshold must be below the party count")
    if scheme is Scheme.ECSS_PERFECT and 3 * t >= n:
        raise InvalidThreshold("perfect error correction needs t < n/3")
    if scheme is Scheme.ECSS_MAC and 2 * t >= n:
        raise InvalidThreshold("MAC-based error correction needs t < n/2")


def encode_secret(secret: bytes) -> List[int]:
    data = bytes(secret)
    chunks = [int.from_bytes(data[i:i + CHUNK_BYTES], "little") for i in range(0, len(data), CHUNK_BYTES)]
    return [len(data)] + chunks


def decode_secret(elements: Sequence[int]) -> bytes:
    if not elements:
        raise ReconstructionFailure("empty encoding")
    length = elements[0]
    count = -(-length // CHUNK_BYTES)
    if length >= 1 << 40 or len(elements) != count + 1:
        raise ReconstructionFailure("length prefix does not match the chunk count")
    out = bytearray()
    for value in elements[1:]:
        if value >= 1 << (8 * CHUNK_BYTES):
            raise ReconstructionFailure("chunk out of range")
        out += value.to_bytes(CHUNK_BYTES, "little")
    return bytes(out[:length])


def mac_repetitions(lam: int, length: int) -> int:
    per_tag = 61 - max(1, length).bit_length()
    return max(1, math.ceil(lam / per_tag))


def mac_tag(key: Tuple[int, int], values: Sequence[int]) -> int:
    a, b = key
    acc = 0
    for v in reversed(values):
        acc = mul(add(acc, v % P), a)
    return add(acc, b)


def _randbelow(rng) -> Any:
    if rng is None:
        return secrets.randbelow
    if hasattr(rng, "randbelow"):
        return rng.randbelow
    return lambda k: rng.randrange(k)


def share(secret: bytes, scheme: Scheme, n: int, t: int, rng=None, mac_lambda: int = DEFAULT_MAC_LAMBDA) -> ShareSet:
    """Share ``secret`` among parties 1..n.

    ``rng`` is anything with ``randbelow(k)`` (or ``randrange(k)``); the
    default is the ``secrets`` module.
    """
    check_threshold(scheme, n, t)
    rand = _randbelow(rng)
    elements = encode_secret(secret)
    per_party: List[List[int]] = [[] for _ in range(n)]
    for value in elements:
        if scheme is Scheme.ADDITIVE:
            parts = [rand(P) for _ in range(n - 1)]
            last = value
            for part in parts:
                last = sub(last, part)
            parts.append(last)
        else:
            coeffs = [value] + [rand(P) for _ in range(t)]
            parts = []
            for x in range(1, n + 1):
                acc = 0
                for c in reversed(coeffs):
                    acc = add(mul(acc, x), c)
                parts.append(acc)
        for i, part in enumerate(parts):
            per_party[i].append(part)
    values = [tuple(v) for v in per_party]
    if scheme is not Scheme.ECSS_MAC:
        shares = tuple(Share(i + 1, values[i]) for i in range(n))
        return ShareSet(scheme, n, t, shares, len(elements))
    reps = mac_repetitions(mac_lambda, len(elements))
    # keys[j][i]: verifier j's key for prover i
    keys = [[tuple((rand(P), rand(P)) for _ in range(reps)) if i != j else () for i in range(n)] for j in range(n)]
    shares = []
    for i in range(n):
        tags = tuple(
            tuple(mac_tag(k, values[i]) for k in keys[j][i]) if j != i else ()
            for j in range(n)
        )
        shares.append(MacShare(i + 1, values[i], tags, tuple(keys[i])))
    return ShareSet(scheme, n, t, tuple(shares), len(elements), reps)


def _values_of(payload: Any, length: int) -> Optional[Tuple[int, ...]]:
    values = getattr(payload, "values", None)
    if not isinstance(values, tuple) or len(values) != length:
        return None
    if not all(isinstance(v, int) and 0 <= v < P for v in values):
        return None
    return values


def recon(shares: ShareSet) -> bytes:
    """Reconstruct from present entries, assuming none is corrupted."""
    present = shares.present()
    if shares.scheme is Scheme.ADDITIVE:
        if len(present) < shares.n:
            raise InsufficientShares("additive sharing needs every share")
        elements = []
        for k in range(shares.secret_len):
            acc = 0
            for s in shares.shares:
                acc = add(acc, s.values[k])
            elements.append(acc)
        return decode_secret(elements)
    if len(present) < shares.t + 1:
        raise InsufficientShares(f"need {shares.t + 1} shares, have {len(present)}")
    chosen = present[: shares.t + 1]
    xs = chosen
    elements = [
        interpolate_at_zero(xs, [shares.shares[i - 1].values[k] for i in chosen])
        for k in range(shares.secret_len)
    ]
    return decode_secret(elements)


def _received_words(shares: ShareSet) -> np.ndarray:
    words = np.zeros((shares.secret_len, shares.n), dtype=np.uint64)
    for i, payload in enumerate(shares.shares):
        values = _values_of(payload, shares.secret_len)
        if values is not None:
            words[:, i] = values
    return words


def ecss_recon(shares: ShareSet) -> bytes:
    """Reconstruct while tolerating up to t corrupted entries.

    Absent or unparsable entries count as corrupted.
    """
    if shares.scheme is Scheme.ECSS_PERFECT:
        return ecss_recon_many([shares])[0]
    if shares.scheme is Scheme.ECSS_MAC:
        return _mac_recon(shares)
    raise ValueError(f"{shares.scheme.value} sharing is not error correcting")


def ecss_recon_many(share_sets: Sequence[ShareSet]) -> List[bytes]:
    """Batched ``ecss_recon`` for perfect-scheme share sets with equal n and t.

    Raises ``ReconstructionFailure`` on the first set that cannot be decoded.
    """
    if not share_sets:
        return []
    n, t = share_sets[0].n, share_sets[0].t
    for s in share_sets:
        if s.scheme is not Scheme.ECSS_PERFECT or s.n != n or s.t != t:
            raise ValueError("batched reconstruction needs perfect-scheme sets with equal n and t")
    words = np.concatenate([_received_words(s) for s in share_sets], axis=0)
    xs = np.arange(1, n + 1, dtype=np.uint64)
    coeffs, status = _kernels.bw_decode_batch(xs, words, t + 1, t)
    out = []
    row = 0
    for s in share_sets:
        block = slice(row, row + s.secret_len)
        row += s.secret_len
        if (status[block] != _kernels.OK).any():
            raise ReconstructionFailure("more than t shares are corrupted")
        out.append(decode_secret([int(c) for c in coeffs[block, 0]]))
    return out


def _mac_recon(shares: ShareSet) -> bytes:
    n, t, length = shares.n, shares.t, shares.secret_len
    parsed = [_values_of(s, length) for s in shares.shares]
    accepted = []
    for i in range(n):
        values = parsed[i]
        if values is None:
            continue
        support = 1
        tags = getattr(shares.shares[i], "tags", None)
        for j in range(n):
            if j == i:
                continue
            keys = getattr(shares.shares[j], "keys", None)
            try:
                key = keys[i]
                tag = tags[j]
                if len(key) == shares.mac_reps and len(tag) == shares.mac_reps and all(
                    mac_tag(k, values) == g for k, g in zip(key, tag)
                ):
                    support += 1
            except (TypeError, IndexError, ValueError):
                continue
        if support >= n - t:
            accepted.append(i + 1)
    if len(accepted) < t + 1:
        raise ReconstructionFailure("fewer than t+1 shares carry enough valid tags")
    elements = []
    for k in range(length):
        pts = [(i, parsed[i - 1][k]) for i in accepted]
        poly = lagrange_interpolate(pts[: t + 1])
        if any(poly.eval_int(x) != y for x, y in pts[t + 1:]):
            raise ReconstructionFailure("accepted shares are inconsistent")
        elements.append(poly.eval_int(0))
    return decode_secret(elements)


def xor_split(value: int, parts: int, bits: int, rng=None) -> Tuple[int, ...]:
    """Split ``value`` into ``parts`` shares whose XOR is ``value``."""
    if parts < 1:
        raise InvalidThreshold("need at least one part")
    rand = _randbelow(rng)
    shares = [rand(1 << bits) for _ in range(parts - 1)]
    last = value
    for s in shares:
        last ^= s
    return tuple(shares) + (last,)


def xor_join(parts: Iterable[int]) -> int:
    acc = 0
    for p in parts:
        acc ^= p
    return acc
