"""Field arithmetic, interpolation and Berlekamp-Welch decoding."""

import itertools
import os
import random
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uplift import _kernels
from uplift.errors import DecodingFailure, DuplicateAbscissa
from uplift.field import P, FieldElem, Poly, add, bw_decode, interpolate_at_zero, inv, lagrange_interpolate, mul, sub

elems = st.integers(min_value=0, max_value=P - 1)
nonzero = st.integers(min_value=1, max_value=P - 1)


def brute_force_decode(points, degree_bound, max_errors):
    """Reference decoder: interpolate every degree_bound-subset and keep the
    polynomials that agree with all but max_errors points."""
    found = set()
    for subset in itertools.combinations(points, degree_bound):
        poly = lagrange_interpolate(list(subset))
        agree = sum(1 for x, y in points if poly.eval_int(x) == y)
        if agree >= len(points) - max_errors:
            found.add(poly.coeffs)
    return found


def codeword(coeffs, n):
    poly = Poly(tuple(coeffs))
    return [(x, poly.eval_int(x)) for x in range(1, n + 1)]


def corrupt(points, positions, rng):
    out = list(points)
    for i in positions:
        x, y = out[i]
        out[i] = (x, (y + 1 + rng.randrange(P - 1)) % P)
    return out


def test_frozen_values():
    # 2 * 2^60 = 2^61 = 1 (mod 2^61 - 1)
    assert inv(2) == 1 << 60
    assert mul(P - 1, P - 1) == 1
    assert add(P - 1, 1) == 0
    assert sub(0, 1) == P - 1
    assert int(FieldElem(3) / 3) == 1
    assert int(FieldElem(2) ** 61) == 1


@given(elems, elems, elems)
def test_ring_axioms(a, b, c):
    assert mul(a, add(b, c)) == add(mul(a, b), mul(a, c))
    assert mul(a, b) == (a * b) % P
    assert add(a, b) == (a + b) % P
    assert sub(a, b) == (a - b) % P


@given(nonzero)
def test_inverse(a):
    assert mul(a, inv(a)) == 1


def test_zero_has_no_inverse():
    with pytest.raises(ZeroDivisionError):
        inv(0)


@given(st.lists(elems, min_size=1, max_size=6), st.lists(elems, min_size=1, max_size=6))
def test_poly_divmod_roundtrip(num, den):
    a, b = Poly(tuple(num)), Poly(tuple(den))
    if b.is_zero():
        return
    q, r = a.divmod(b)
    assert (q * b + r).coeffs == a.coeffs
    assert r.is_zero() or r.degree < b.degree


@given(st.lists(elems, min_size=1, max_size=6))
def test_interpolation_recovers_polynomial(coeffs):
    poly = Poly(tuple(coeffs))
    points = [(x, poly.eval_int(x)) for x in range(1, len(coeffs) + 1)]
    assert lagrange_interpolate(points).coeffs == poly.coeffs
    assert interpolate_at_zero([x for x, _ in points], [y for _, y in points]) == poly.eval_int(0)


def test_duplicate_abscissa():
    with pytest.raises(DuplicateAbscissa):
        lagrange_interpolate([(1, 2), (1, 3)])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2), st.randoms(use_true_random=False))
def test_bw_matches_brute_force(degree_bound, max_errors, rnd):
    n = degree_bound + 2 * max_errors + rnd.randrange(2)
    coeffs = [rnd.randrange(P) for _ in range(degree_bound)]
    errors = rnd.randrange(max_errors + 1)
    points = corrupt(codeword(coeffs, n), rnd.sample(range(n), errors), rnd)
    expected = brute_force_decode(points, degree_bound, max_errors)
    assert expected == {Poly(tuple(coeffs)).coeffs}
    assert bw_decode(points, degree_bound, max_errors).coeffs == Poly(tuple(coeffs)).coeffs


def test_bw_too_many_errors_fails_or_differs():
    rng = random.Random(5)
    failures = 0
    for _ in range(50):
        coeffs = [rng.randrange(P) for _ in range(3)]
        points = corrupt(codeword(coeffs, 7), rng.sample(range(7), 3), rng)
        oracle = brute_force_decode(points, 3, 2)
        try:
            got = bw_decode(points, 3, 2).coeffs
        except DecodingFailure:
            failures += 1
            assert not oracle
        else:
            # any returned polynomial is a genuine close codeword
            assert got in oracle
    assert failures > 40


def test_bw_rejects_short_input():
    with pytest.raises(ValueError):
        bw_decode(codeword([1, 2], 3), 2, 1)


def batch_words(batch, n, t, seed):
    rng = random.Random(seed)
    coeffs = [[rng.randrange(P) for _ in range(t + 1)] for _ in range(batch)]
    words = []
    for row in coeffs:
        pts = corrupt(codeword(row, n), rng.sample(range(n), rng.randrange(t + 1)), rng)
        words.append([y for _, y in pts])
    xs = np.arange(1, n + 1, dtype=np.uint64)
    return xs, np.array(words, dtype=np.uint64), coeffs


def test_batch_kernel_matches_scalar_decoder():
    n, t = 7, 2
    xs, words, coeffs = batch_words(200, n, t, seed=1)
    got, status = _kernels.bw_decode_batch(xs, words, t + 1, t)
    assert (status == _kernels.OK).all()
    for row, word, ref in zip(got, words, coeffs):
        scalar = bw_decode(list(zip(range(1, n + 1), (int(y) for y in word))), t + 1, t)
        assert [int(c) for c in row] == list(scalar.coeffs) + [0] * (t + 1 - len(scalar.coeffs))
        assert [int(c) for c in row] == ref


def test_batch_kernel_flags_undecodable_rows():
    n, t = 7, 2
    rng = random.Random(9)
    coeffs = [rng.randrange(P) for _ in range(t + 1)]
    bad = corrupt(codeword(coeffs, n), [0, 1, 2, 3], rng)
    words = np.array([[y for _, y in bad]], dtype=np.uint64)
    xs = np.arange(1, n + 1, dtype=np.uint64)
    _, status = _kernels.bw_decode_batch(xs, words, t + 1, t)
    try:
        ref = bw_decode(bad, t + 1, t)
    except DecodingFailure:
        assert status[0] == _kernels.FAILED
    else:
        assert status[0] == _kernels.OK and ref is not None


@pytest.mark.skipif(not hasattr(_kernels, "_nb_bw_batch"), reason="numba disabled")
def test_numba_and_numpy_backends_agree():
    xs, words, _ = batch_words(300, 7, 2, seed=3)
    c_nb, s_nb = _kernels._nb_bw_batch(xs, words, 3, 2)
    c_np, s_np = _kernels._np_bw_batch(xs, words, 3, 2)
    assert np.array_equal(s_nb, s_np)
    assert np.array_equal(c_nb, c_np)


@given(st.lists(elems, min_size=1, max_size=20), st.lists(elems, min_size=1, max_size=20))
def test_vector_mulmod_matches_python(a, b):
    k = min(len(a), len(b))
    got = _kernels.np_mulmod(np.array(a[:k], dtype=np.uint64), np.array(b[:k], dtype=np.uint64))
    assert [int(v) for v in got] == [mul(x, y) for x, y in zip(a[:k], b[:k])]


def test_disabled_numba_gives_same_election_report():
    script = ("import json; from uplift import _kernels; from uplift.experiments import run_experiment; "
              "r, _ = run_experiment('elect', {'n': 400, 'n_prime': 40}, 2, 300); "
              "print(_kernels.BACKEND); print(json.dumps(r, sort_keys=True))")
    outputs = {}
    for flag in ("0", "1"):
        env = dict(os.environ, UPLIFT_DISABLE_NUMBA=flag)
        done = subprocess.run([sys.executable, "-c", script], env=env, capture_output=True, text=True, check=True)
        outputs[flag] = done.stdout.splitlines()
    assert outputs["1"][0] == "numpy"
    assert outputs["0"][1] == outputs["1"][1]
