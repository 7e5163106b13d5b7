"""Linearized polynomials ``f(X) = sum_i a_i X^(2^i)`` over GF(2^n).

These are the F2-linear maps of the field written in the monomial basis
``X, X^2, X^4, ...``; composition (not multiplication) is the natural product.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence

from .f2field import BinMatrix, GF2n, InconsistentSystem, rank_of_rows, solve

__all__ = [
    "LinearizedPoly",
    "NotDivisible",
    "compose",
    "evaluate",
    "interpolate",
    "kernel_dimension",
    "left_divide",
]


class NotDivisible(ArithmeticError):
    """No exact left quotient exists."""


class LinearizedPoly:
    """``a_0 X + a_1 X^2 + ... + a_d X^(2^d)`` with trailing zeros stripped."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: GF2n, coeffs: Iterable[int] = ()) -> None:
        c = [field.element(a) for a in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.field = field
        self.coeffs: tuple[int, ...] = tuple(c)

    @classmethod
    def identity(cls, field: GF2n) -> LinearizedPoly:
        return cls(field, (1,))

    @classmethod
    def monomial(cls, field: GF2n, i: int, a: int = 1) -> LinearizedPoly:
        """``a X^(2^i)``."""
        return cls(field, (0,) * i + (a,))

    @property
    def qdegree(self) -> int | float:
        """Index of the top coefficient; ``-inf`` for the zero polynomial."""
        return len(self.coeffs) - 1 if self.coeffs else -math.inf

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, x: int) -> int:
        return evaluate(self, x)

    def __add__(self, other: LinearizedPoly) -> LinearizedPoly:
        _check_same(self, other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return LinearizedPoly(self.field, [x ^ (b[i] if i < len(b) else 0) for i, x in enumerate(a)])

    __sub__ = __add__

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, LinearizedPoly)
            and self.field == other.field
            and self.coeffs == other.coeffs
        )

    def __hash__(self) -> int:
        return hash((self.field, self.coeffs))

    def __repr__(self) -> str:
        if not self.coeffs:
            return "LinearizedPoly(0)"
        terms = [f"{a}*X^{1 << i}" for i, a in enumerate(self.coeffs) if a]
        return "LinearizedPoly(" + " + ".join(terms) + ")"

    def padded(self, length: int) -> tuple[int, ...]:
        """Coefficients zero-padded to ``length`` entries."""
        if len(self.coeffs) > length:
            raise ValueError(f"q-degree {self.qdegree} does not fit in {length} coefficients")
        return self.coeffs + (0,) * (length - len(self.coeffs))

    def map_matrix(self) -> BinMatrix:
        """Matrix of ``x -> f(x)`` in the polynomial basis (column ``b`` is ``f(x^b)``)."""
        f = self.field
        return BinMatrix.from_columns([evaluate(self, 1 << b) for b in range(f.n)], f.n)


def _check_same(f: LinearizedPoly, g: LinearizedPoly) -> None:
    if f.field != g.field:
        raise ValueError(f"polynomials over different fields: {f.field} vs {g.field}")


def evaluate(f: LinearizedPoly, x: int) -> int:
    """``sum_i a_i x^(2^i)``."""
    field = f.field
    acc = 0
    for a in f.coeffs:
        if a:
            acc ^= field.mul(a, x)
        x = field.square(x)
    return acc


def compose(f: LinearizedPoly, g: LinearizedPoly) -> LinearizedPoly:
    """``h = f o g`` with ``h_k = sum_{i+j=k} f_i g_j^(2^i)``."""
    _check_same(f, g)
    if f.is_zero() or g.is_zero():
        return LinearizedPoly(f.field)
    field = f.field
    out = [0] * (len(f.coeffs) + len(g.coeffs) - 1)
    twisted = list(g.coeffs)
    for i, fi in enumerate(f.coeffs):
        if fi:
            for j, gj in enumerate(twisted):
                out[i + j] ^= field.mul(fi, gj)
        twisted = [field.square(c) for c in twisted]
    return LinearizedPoly(field, out)


def left_divide(numerator: LinearizedPoly, divisor: LinearizedPoly) -> LinearizedPoly:
    """Find ``f`` with ``compose(divisor, f) == numerator``.

    Raises
    ------
    NotDivisible
        If no such ``f`` exists.
    """
    _check_same(numerator, divisor)
    if divisor.is_zero():
        raise ZeroDivisionError("divisor is the zero polynomial")
    if numerator.is_zero():
        return LinearizedPoly(numerator.field)
    field = numerator.field
    n = field.n
    d_num, d_div = len(numerator.coeffs) - 1, len(divisor.coeffs) - 1
    if d_num < d_div:
        raise NotDivisible("numerator has lower q-degree than divisor")
    n_unknown = d_num - d_div + 1
    # column for unknown bit (j, b): coefficients of divisor o (x^b X^(2^j))
    columns = []
    for j in range(n_unknown):
        for xb in field.xtimes(1):
            col = 0
            v = xb
            for i, di in enumerate(divisor.coeffs):
                if di:
                    col ^= field.mul(di, v) << ((i + j) * n)
                v = field.square(v)
            columns.append(col)
    rhs = 0
    for k, a in enumerate(numerator.coeffs):
        rhs |= a << (k * n)
    m = BinMatrix.from_columns(columns, (d_num + 1) * n)
    try:
        x, _ = solve(m, rhs)
    except InconsistentSystem:
        raise NotDivisible("no exact left quotient") from None
    return LinearizedPoly(field, [(x >> (j * n)) & field.mask for j in range(n_unknown)])


def kernel_dimension(f: LinearizedPoly) -> int:
    """F2-dimension of ``{x : f(x) = 0}``."""
    if f.is_zero():
        raise ValueError("the zero polynomial vanishes on the whole field")
    n = f.field.n
    return n - rank_of_rows([evaluate(f, 1 << b) for b in range(n)])


def interpolate(field: GF2n, points: Sequence[tuple[int, int]], k: int) -> LinearizedPoly:
    """The unique ``f`` of q-degree ``< k`` through ``k`` F2-independent points."""
    if len(points) != k:
        raise ValueError(f"expected {k} points, got {len(points)}")
    xs = [x for x, _ in points]
    if rank_of_rows(xs) != k:
        raise ValueError("interpolation points are F2-linearly dependent")
    n = field.n
    frob = [field.conjugates(x)[:k] for x in xs]
    columns = []
    for j in range(k):
        for b in range(n):
            col = 0
            for i in range(k):
                col |= field.mul(1 << b, frob[i][j]) << (i * n)
            columns.append(col)
    rhs = 0
    for i, (_, y) in enumerate(points):
        rhs |= field.element(y) << (i * n)
    x, kernel = solve(BinMatrix.from_columns(columns, k * n), rhs)
    assert not kernel, "independent points determine the interpolant"
    return LinearizedPoly(field, [(x >> (j * n)) & field.mask for j in range(k)])
