"""Compare the numba kernels with their numpy fallbacks.

Run with ``python3 benchmarks/bench_kernels.py [--batch N] [--trials N] [--json PATH]``.
Both implementations are called directly, so the ``UPLIFT_DISABLE_NUMBA``
flag does not matter here; the script also checks that they agree.
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from uplift import _kernels
from uplift.field import P


def _best_of(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bw_workload(batch: int, n: int = 7, t: int = 2, seed: int = 0):
    """Received words of degree-t polynomials with t corrupted positions each."""
    rng = np.random.default_rng(seed)
    xs = np.arange(1, n + 1, dtype=np.uint64)
    coeffs = rng.integers(0, P, size=(batch, t + 1), dtype=np.uint64)
    words = np.zeros((batch, n), dtype=np.uint64)
    for k in range(t + 1):
        words = _kernels.np_addmod(words, _kernels.np_mulmod(coeffs[:, k:k + 1], _kernels.np_powmod(xs, k)[None, :]))
    for row in range(batch):
        bad = rng.choice(n, size=t, replace=False)
        words[row, bad] = rng.integers(0, P, size=t, dtype=np.uint64)
    return xs, words, coeffs, t


def election_workload(trials: int, n: int = 2000, n_prime: int = 100, beta: float = 0.3, seed: int = 0):
    rng = np.random.default_rng(seed)
    k = -(-n // n_prime)
    corrupted = int(beta * n)
    counts = rng.multinomial(n - corrupted, [1.0 / k] * k, size=trials).astype(np.int64)
    return counts, corrupted


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--batch", type=int, default=20_000, help="received words per decoding batch")
    parser.add_argument("--trials", type=int, default=10_000, help="election trials")
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--json", help="also write the timings here")
    args = parser.parse_args()

    if not hasattr(_kernels, "_nb_bw_batch"):
        raise SystemExit("numba is unavailable or disabled; nothing to compare")

    xs, words, coeffs, t = bw_workload(args.batch)
    counts, corrupted = election_workload(args.trials)

    nb_bw = lambda: _kernels._nb_bw_batch(xs, words, t + 1, t)
    np_bw = lambda: _kernels._np_bw_batch(xs, words, t + 1, t)
    nb_el = lambda: _kernels._nb_lightest_bin_attack(counts, corrupted, 0.6)
    np_el = lambda: _kernels._np_lightest_bin_attack(counts, corrupted, 0.6)

    # compile once and check agreement before timing
    (c_nb, s_nb), (c_np, s_np) = nb_bw(), np_bw()
    assert (s_nb == _kernels.OK).all() and (s_np == _kernels.OK).all()
    assert np.array_equal(c_nb, coeffs) and np.array_equal(c_np, coeffs)
    assert np.allclose(nb_el(), np_el())

    rows = []
    for name, size, fast, slow in (("bw_decode_batch", args.batch, nb_bw, np_bw),
                                   ("lightest_bin_attack", args.trials, nb_el, np_el)):
        t_nb, t_np = _best_of(fast, args.repeats), _best_of(slow, args.repeats)
        rows.append({"kernel": name, "size": size, "numba_s": t_nb, "numpy_s": t_np, "speedup": t_np / t_nb})

    print(f"{'kernel':<22}{'size':>8}{'numba s':>12}{'numpy s':>12}{'speedup':>10}")
    for r in rows:
        print(f"{r['kernel']:<22}{r['size']:>8}{r['numba_s']:>12.4f}{r['numpy_s']:>12.4f}{r['speedup']:>9.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
