"""Arithmetic over the Mersenne prime field GF(2^61 - 1).

Values are plain Python ints internally; ``FieldElem`` is a thin immutable
wrapper for callers that want operator syntax.  Polynomials store their
coefficients lowest degree first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union

from .errors import DecodingFailure, DuplicateAbscissa

P = (1 << 61) - 1


def reduce(x: int) -> int:
    return x % P


def add(a: int, b: int) -> int:
    s = a + b
    return s - P if s >= P else s


def sub(a: int, b: int) -> int:
    s = a - b
    return s + P if s < 0 else s


def mul(a: int, b: int) -> int:
    x = a * b
    r = (x >> 61) + (x & P)
    return r - P if r >= P else r


def inv(a: int) -> int:
    a %= P
    if a == 0:
        raise ZeroDivisionError("zero has no inverse in GF(p)")
    return pow(a, P - 2, P)


@dataclass(frozen=True)
class FieldElem:
    value: int

    def __post_init__(self):
        if not 0 <= self.value < P:
            object.__setattr__(self, "value", self.value % P)

    @staticmethod
    def coerce(x: "FieldLike") -> "FieldElem":
        return x if isinstance(x, FieldElem) else FieldElem(int(x) % P)

    def __int__(self) -> int:
        return self.value

    def __add__(self, other: "FieldLike") -> "FieldElem":
        return FieldElem(add(self.value, _val(other)))

    __radd__ = __add__

    def __sub__(self, other: "FieldLike") -> "FieldElem":
        return FieldElem(sub(self.value, _val(other)))

    def __rsub__(self, other: "FieldLike") -> "FieldElem":
        return FieldElem(sub(_val(other), self.value))

    def __mul__(self, other: "FieldLike") -> "FieldElem":
        return FieldElem(mul(self.value, _val(other)))

    __rmul__ = __mul__

    def __neg__(self) -> "FieldElem":
        return FieldElem((P - self.value) % P)

    def inverse(self) -> "FieldElem":
        return FieldElem(inv(self.value))

    def __truediv__(self, other: "FieldLike") -> "FieldElem":
        return FieldElem(mul(self.value, inv(_val(other))))

    def __pow__(self, e: int) -> "FieldElem":
        if e < 0:
            return FieldElem(pow(inv(self.value), -e, P))
        return FieldElem(pow(self.value, e, P))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FieldElem):
            return self.value == other.value
        if isinstance(other, int):
            return self.value == other % P
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.value)

    def __repr__(self) -> str:
        return f"FieldElem({self.value})"


FieldLike = Union[FieldElem, int]


def _val(x: FieldLike) -> int:
    return x.value if isinstance(x, FieldElem) else int(x) % P


def _strip(coeffs: Iterable[int]) -> Tuple[int, ...]:
    c = [x % P for x in coeffs]
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class Poly:
    """Polynomial over GF(p); the zero polynomial has an empty coefficient tuple."""

    coeffs: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _strip(_val(c) for c in self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, x: FieldLike) -> FieldElem:
        return FieldElem(self.eval_int(_val(x)))

    def eval_int(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = add(mul(acc, x), c)
        return acc

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return Poly(tuple(add(x, b[i]) if i < len(b) else x for i, x in enumerate(a)))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + Poly(tuple((P - c) % P for c in other.coeffs))

    def __mul__(self, other: "Poly") -> "Poly":
        if self.is_zero() or other.is_zero():
            return Poly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = (out[i + j] + a * b) % P
        return Poly(tuple(out))

    def divmod(self, divisor: "Poly") -> Tuple["Poly", "Poly"]:
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dc = divisor.coeffs
        lead_inv = inv(dc[-1])
        quot = [0] * max(0, len(rem) - len(dc) + 1)
        for shift in range(len(rem) - len(dc), -1, -1):
            coef = mul(rem[shift + len(dc) - 1], lead_inv)
            quot[shift] = coef
            if coef:
                for i, d in enumerate(dc):
                    rem[shift + i] = sub(rem[shift + i], mul(coef, d))
        return Poly(tuple(quot)), Poly(tuple(rem))


def _points_int(points: Sequence[Tuple[FieldLike, FieldLike]]) -> Tuple[list, list]:
    xs = [_val(x) for x, _ in points]
    ys = [_val(y) for _, y in points]
    if len(set(xs)) != len(xs):
        raise DuplicateAbscissa("x-coordinates must be distinct")
    return xs, ys


def lagrange_interpolate(points: Sequence[Tuple[FieldLike, FieldLike]]) -> Poly:
    """Unique polynomial of degree < len(points) through the given points."""
    if not points:
        raise ValueError("need at least one point")
    xs, ys = _points_int(points)
    n = len(xs)
    result = [0] * n
    for i in range(n):
        # basis numerator prod_{j != i} (X - x_j), built incrementally
        basis = [1]
        denom = 1
        for j in range(n):
            if j == i:
                continue
            nxt = [0] * (len(basis) + 1)
            for k, c in enumerate(basis):
                nxt[k] = sub(nxt[k], mul(c, xs[j]))
                nxt[k + 1] = add(nxt[k + 1], c)
            basis = nxt
            denom = mul(denom, sub(xs[i], xs[j]))
        scale = mul(ys[i], inv(denom))
        for k, c in enumerate(basis):
            result[k] = add(result[k], mul(c, scale))
    return Poly(tuple(result))


def interpolate_at_zero(xs: Sequence[int], ys: Sequence[int]) -> int:
    """Value at 0 of the interpolating polynomial; cheaper than building it."""
    acc = 0
    for i, xi in enumerate(xs):
        num, den = 1, 1
        for j, xj in enumerate(xs):
            if i != j:
                num = mul(num, xj)
                den = mul(den, sub(xj, xi))
        acc = add(acc, mul(ys[i], mul(num, inv(den))))
    return acc


def _solve(matrix: list, rhs: list, ncols: int):
    """Gaussian elimination.  Returns the solution, "deficient" or "inconsistent"."""
    rows = [row[:] + [b] for row, b in zip(matrix, rhs)]
    nrows = len(rows)
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if rows[i][c]), None)
        if pivot is None:
            return "deficient"
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pinv = inv(rows[r][c])
        rows[r] = [mul(v, pinv) for v in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [sub(v, mul(f, w)) for v, w in zip(rows[i], rows[r])]
        r += 1
    if any(rows[i][ncols] for i in range(r, nrows)):
        return "inconsistent"
    return [rows[i][ncols] for i in range(ncols)]


def bw_decode(points: Sequence[Tuple[FieldLike, FieldLike]], degree_bound: int, max_errors: int) -> Poly:
    """Berlekamp-Welch unique decoding.

    Returns the polynomial of degree < ``degree_bound`` agreeing with all but at
    most ``max_errors`` points.  Raises ``DecodingFailure`` when no such
    polynomial is found; a returned polynomial is always re-checked against the
    points so the decoder is never silently wrong.
    """
    xs, ys = _points_int(points)
    n = len(xs)
    if degree_bound < 1 or max_errors < 0:
        raise ValueError("degree_bound must be >= 1 and max_errors >= 0")
    if n < degree_bound + 2 * max_errors:
        raise ValueError("too few points for the requested error budget")
    for e in range(max_errors, -1, -1):
        # unknowns: Q_0..Q_{k+e-1}, E_0..E_{e-1}; E is monic of degree e
        nq = degree_bound + e
        matrix, rhs = [], []
        for x, y in zip(xs, ys):
            row = []
            xp = 1
            for _ in range(nq):
                row.append(xp)
                xp = mul(xp, x)
            xp = 1
            for _ in range(e):
                row.append(sub(0, mul(y, xp)))
                xp = mul(xp, x)
            matrix.append(row)
            rhs.append(mul(y, pow(x, e, P)))
        sol = _solve(matrix, rhs, nq + e)
        if sol == "deficient":
            continue
        if sol == "inconsistent":
            raise DecodingFailure("no codeword within the error budget")
        q = Poly(tuple(sol[:nq]))
        locator = Poly(tuple(sol[nq:]) + (1,))
        f, rem = q.divmod(locator)
        if not rem.is_zero() or f.degree >= degree_bound:
            raise DecodingFailure("error locator does not divide the numerator")
        agree = sum(1 for x, y in zip(xs, ys) if f.eval_int(x) == y)
        if agree < n - max_errors:
            raise DecodingFailure("decoded polynomial disagrees with too many points")
        return f
    raise DecodingFailure("system rank deficient for every error count")
