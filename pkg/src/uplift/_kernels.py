"""Hot loops: batched Berlekamp-Welch decoding and lightest-bin adversary search.

Each kernel has a numba implementation and a pure-numpy fallback with the
same semantics.  Set ``UPLIFT_DISABLE_NUMBA=1`` to force the fallback.
Field elements are uint64 residues modulo 2^61 - 1; products are formed from
31/30-bit halves so that no intermediate exceeds 64 bits.
"""

from __future__ import annotations

import os

import numpy as np

MOD = np.uint64((1 << 61) - 1)

_disabled = os.environ.get("UPLIFT_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError("numba disabled by environment")
    from numba import njit
    BACKEND = "numba"
except ImportError:
    njit = None
    BACKEND = "numpy"

# status codes returned by bw_decode_batch
OK = 0
FAILED = 1


# ---------------------------------------------------------------- numpy side

def np_mulmod(a, b):
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    mask31 = np.uint64((1 << 31) - 1)
    mask30 = np.uint64((1 << 30) - 1)
    a_hi, a_lo = a >> np.uint64(31), a & mask31
    b_hi, b_lo = b >> np.uint64(31), b & mask31
    mid = a_hi * b_lo + a_lo * b_hi
    s = (a_hi * b_hi << np.uint64(1)) + (mid >> np.uint64(30)) + ((mid & mask30) << np.uint64(31)) + a_lo * b_lo
    s = (s & MOD) + (s >> np.uint64(61))
    return np.where(s >= MOD, s - MOD, s)


def np_addmod(a, b):
    s = np.asarray(a, dtype=np.uint64) + np.asarray(b, dtype=np.uint64)
    return np.where(s >= MOD, s - MOD, s)


def np_submod(a, b):
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    return np.where(a >= b, a - b, a + MOD - b)


def np_powmod(a, e: int):
    a = np.asarray(a, dtype=np.uint64)
    result = np.ones_like(a)
    base = a.copy()
    while e:
        if e & 1:
            result = np_mulmod(result, base)
        base = np_mulmod(base, base)
        e >>= 1
    return result


def _np_bw_batch(xs, ys, degree_bound, max_errors):
    batch, n = ys.shape
    coeffs = np.zeros((batch, degree_bound), dtype=np.uint64)
    status = np.full(batch, FAILED, dtype=np.int8)
    pending = np.arange(batch)
    p_minus_2 = (1 << 61) - 3
    for e in range(max_errors, -1, -1):
        if pending.size == 0:
            break
        nq = degree_bound + e
        ncols = nq + e
        y = ys[pending]
        b = y.shape[0]
        aug = np.zeros((b, n, ncols + 1), dtype=np.uint64)
        xpow = np.ones(n, dtype=np.uint64)
        for c in range(nq):
            aug[:, :, c] = xpow
            xpow = np_mulmod(xpow, xs)
        xpow = np.ones(n, dtype=np.uint64)
        for c in range(e):
            aug[:, :, nq + c] = np_submod(0, np_mulmod(y, xpow))
            xpow = np_mulmod(xpow, xs)
        aug[:, :, ncols] = np_mulmod(y, xpow)
        deficient = np.zeros(b, dtype=bool)
        rows = np.arange(b)
        for c in range(ncols):
            nz = aug[:, c:, c] != 0
            has = nz.any(axis=1)
            deficient |= ~has
            piv = c + np.argmax(nz, axis=1)
            piv = np.where(has, piv, c)
            top = aug[rows, c].copy()
            aug[rows, c] = aug[rows, piv]
            aug[rows, piv] = top
            pinv = np_powmod(np.where(has, aug[:, c, c], 1), p_minus_2)
            aug[:, c] = np_mulmod(aug[:, c], pinv[:, None])
            factor = aug[:, :, c].copy()
            factor[:, c] = 0
            aug = np_submod(aug, np_mulmod(factor[:, :, None], aug[:, c][:, None, :]))
        inconsistent = (aug[:, ncols:, ncols] != 0).any(axis=1) & ~deficient
        settled = ~deficient
        sol = aug[:, :ncols, ncols]
        q = sol[:, :nq]
        locator = np.concatenate([sol[:, nq:], np.ones((b, 1), dtype=np.uint64)], axis=1)
        quot, rem_ok = _np_divide_monic(q, locator, degree_bound)
        ok = settled & ~inconsistent & rem_ok
        if ok.any():
            agree = np.zeros(b, dtype=np.int64)
            for i in range(n):
                val = np.zeros(b, dtype=np.uint64)
                for c in range(degree_bound - 1, -1, -1):
                    val = np_addmod(np_mulmod(val, xs[i]), quot[:, c])
                agree += val == y[:, i]
            ok &= agree >= n - max_errors
        coeffs[pending[ok]] = quot[ok]
        status[pending[ok]] = OK
        pending = pending[deficient]
    return coeffs, status


def _np_divide_monic(num, locator, degree_bound):
    """Divide each row of num by a monic locator; report zero remainder."""
    b, nq = num.shape
    e = locator.shape[1] - 1
    rem = num.copy()
    quot = np.zeros((b, max(nq - e, 0)), dtype=np.uint64)
    for shift in range(nq - e - 1, -1, -1):
        coef = rem[:, shift + e].copy()
        quot[:, shift] = coef
        for i in range(e + 1):
            rem[:, shift + i] = np_submod(rem[:, shift + i], np_mulmod(coef, locator[:, i]))
    rem_ok = ~(rem != 0).any(axis=1)
    out = np.zeros((b, degree_bound), dtype=np.uint64)
    width = min(degree_bound, quot.shape[1])
    out[:, :width] = quot[:, :width]
    if quot.shape[1] > degree_bound:
        rem_ok &= ~(quot[:, degree_bound:] != 0).any(axis=1)
    return out, rem_ok


def _np_lightest_bin_attack(honest_counts, corrupted, beta_prime):
    trials, k = honest_counts.shape
    h = honest_counts.astype(np.int64)
    lower = np.tril(np.ones((k, k), dtype=np.int64), -1).T  # [l, j] = 1 iff l < j
    best = np.zeros(trials, dtype=np.float64)
    for j in range(k):
        tie = lower[:, j]
        lo = np.maximum(h[:, j], 1)
        hi = h[:, j] + corrupted

        def cost(total):
            need = np.maximum(0, total[:, None] + tie[None, :] - h)
            need[:, j] = 0
            return (total - h[:, j]) + need.sum(axis=1)

        feasible = cost(lo) <= corrupted
        # binary search for the largest affordable bin size
        a, b = lo.copy(), hi.copy()
        while (a < b).any():
            mid = (a + b + 1) // 2
            fits = cost(mid) <= corrupted
            a = np.where(fits & (a < b), mid, a)
            b = np.where(~fits & (a < b), mid - 1, b)
        frac = np.where(feasible, (a - h[:, j]) / a, 0.0)
        best = np.maximum(best, frac)
    return best


# ---------------------------------------------------------------- numba side

if njit is not None:

    @njit(cache=True)
    def _mulmod(a, b):
        mask31 = np.uint64(2147483647)
        mask30 = np.uint64(1073741823)
        a_hi = a >> np.uint64(31)
        a_lo = a & mask31
        b_hi = b >> np.uint64(31)
        b_lo = b & mask31
        mid = a_hi * b_lo + a_lo * b_hi
        s = ((a_hi * b_hi) << np.uint64(1)) + (mid >> np.uint64(30)) + ((mid & mask30) << np.uint64(31)) + a_lo * b_lo
        s = (s & MOD) + (s >> np.uint64(61))
        if s >= MOD:
            s -= MOD
        return s

    @njit(cache=True)
    def _submod(a, b):
        if a >= b:
            return a - b
        return a + MOD - b

    @njit(cache=True)
    def _addmod(a, b):
        s = a + b
        if s >= MOD:
            s -= MOD
        return s

    @njit(cache=True)
    def _invmod(a):
        e = np.uint64((1 << 61) - 3)
        result = np.uint64(1)
        base = a
        while e > 0:
            if e & np.uint64(1):
                result = _mulmod(result, base)
            base = _mulmod(base, base)
            e >>= np.uint64(1)
        return result

    @njit(cache=True)
    def _bw_one(xs, y, degree_bound, max_errors, out):
        n = xs.shape[0]
        for e in range(max_errors, -1, -1):
            nq = degree_bound + e
            ncols = nq + e
            aug = np.zeros((n, ncols + 1), dtype=np.uint64)
            for i in range(n):
                xp = np.uint64(1)
                for c in range(nq):
                    aug[i, c] = xp
                    xp = _mulmod(xp, xs[i])
                xp = np.uint64(1)
                for c in range(e):
                    aug[i, nq + c] = _submod(np.uint64(0), _mulmod(y[i], xp))
                    xp = _mulmod(xp, xs[i])
                aug[i, ncols] = _mulmod(y[i], xp)
            deficient = False
            for c in range(ncols):
                piv = -1
                for i in range(c, n):
                    if aug[i, c] != 0:
                        piv = i
                        break
                if piv < 0:
                    deficient = True
                    break
                if piv != c:
                    for col in range(ncols + 1):
                        tmp = aug[c, col]
                        aug[c, col] = aug[piv, col]
                        aug[piv, col] = tmp
                pinv = _invmod(aug[c, c])
                for col in range(ncols + 1):
                    aug[c, col] = _mulmod(aug[c, col], pinv)
                for i in range(n):
                    if i != c and aug[i, c] != 0:
                        f = aug[i, c]
                        for col in range(ncols + 1):
                            aug[i, col] = _submod(aug[i, col], _mulmod(f, aug[c, col]))
            if deficient:
                continue
            for i in range(ncols, n):
                if aug[i, ncols] != 0:
                    return FAILED
            rem = np.zeros(nq, dtype=np.uint64)
            for c in range(nq):
                rem[c] = aug[c, ncols]
            locator = np.ones(e + 1, dtype=np.uint64)
            for c in range(e):
                locator[c] = aug[nq + c, ncols]
            quot = np.zeros(nq - e, dtype=np.uint64)
            for shift in range(nq - e - 1, -1, -1):
                coef = rem[shift + e]
                quot[shift] = coef
                for i in range(e + 1):
                    rem[shift + i] = _submod(rem[shift + i], _mulmod(coef, locator[i]))
            for c in range(nq):
                if rem[c] != 0:
                    return FAILED
            for c in range(degree_bound, nq - e):
                if quot[c] != 0:
                    return FAILED
            agree = 0
            for i in range(n):
                val = np.uint64(0)
                for c in range(degree_bound - 1, -1, -1):
                    val = _addmod(_mulmod(val, xs[i]), quot[c])
                if val == y[i]:
                    agree += 1
            if agree < n - max_errors:
                return FAILED
            for c in range(degree_bound):
                out[c] = quot[c]
            return OK
        return FAILED

    @njit(cache=True)
    def _nb_bw_batch(xs, ys, degree_bound, max_errors):
        batch = ys.shape[0]
        coeffs = np.zeros((batch, degree_bound), dtype=np.uint64)
        status = np.zeros(batch, dtype=np.int8)
        for b in range(batch):
            status[b] = _bw_one(xs, ys[b], degree_bound, max_errors, coeffs[b])
        return coeffs, status

    @njit(cache=True)
    def _nb_lightest_bin_attack(honest_counts, corrupted, beta_prime):
        trials, k = honest_counts.shape
        best = np.zeros(trials, dtype=np.float64)
        for r in range(trials):
            for j in range(k):
                hj = honest_counts[r, j]
                lo = max(hj, 1)
                hi = hj + corrupted
                a = lo - 1
                b = hi
                # largest total in [lo, hi] with cost <= corrupted, else lo - 1
                while a < b:
                    mid = (a + b + 1) // 2
                    cost = mid - hj
                    for l in range(k):
                        if l != j:
                            need = mid - honest_counts[r, l]
                            if l < j:
                                need += 1
                            if need > 0:
                                cost += need
                    if cost <= corrupted:
                        a = mid
                    else:
                        b = mid - 1
                if a >= lo:
                    frac = (a - hj) / a
                    if frac > best[r]:
                        best[r] = frac
        return best


# ---------------------------------------------------------------- public API

def mulmod(a, b):
    """Elementwise (a * b) mod p on uint64 arrays."""
    return np_mulmod(a, b)


def bw_decode_batch(xs, ys, degree_bound: int, max_errors: int):
    """Decode many received words sharing the same evaluation points.

    Returns ``(coeffs, status)`` where ``coeffs[b]`` holds the decoded
    polynomial (lowest degree first) and ``status[b]`` is ``OK`` or ``FAILED``.
    """
    xs = np.ascontiguousarray(xs, dtype=np.uint64)
    ys = np.ascontiguousarray(np.atleast_2d(ys), dtype=np.uint64)
    if ys.shape[1] != xs.shape[0]:
        raise ValueError("each received word needs one value per evaluation point")
    if xs.shape[0] < degree_bound + 2 * max_errors:
        raise ValueError("too few points for the requested error budget")
    if BACKEND == "numba":
        return _nb_bw_batch(xs, ys, degree_bound, max_errors)
    return _np_bw_batch(xs, ys, degree_bound, max_errors)


def lightest_bin_attack(honest_counts, corrupted: int, beta_prime: float = 0.0):
    """Per trial, the largest corrupted fraction an adversary holding
    ``corrupted`` parties can force into the elected (lightest) bin.

    The adversary sees the honest bin counts (rushing) and chooses a target bin
    j and its final size; every other bin must stay strictly heavier if it has
    a lower index and at least as heavy otherwise, since ties go to the lowest
    index.
    """
    counts = np.ascontiguousarray(honest_counts, dtype=np.int64)
    if BACKEND == "numba":
        return _nb_lightest_bin_attack(counts, int(corrupted), float(beta_prime))
    return _np_lightest_bin_attack(counts, int(corrupted), float(beta_prime))
