"""Arithmetic in GF(2^n) and linear algebra over F2.

Field elements are plain ``int`` bit masks in the polynomial basis of a
:class:`GF2n` context: bit ``i`` is the coefficient of ``x^i``.  Bit vectors
and matrix rows are ``int`` masks as well, bit ``j`` being entry ``j``.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from functools import cached_property

from . import _kernels, _purecore

__all__ = [
    "MODULI",
    "BinMatrix",
    "F2Span",
    "GF2n",
    "InconsistentSystem",
    "NormalBasis",
    "UnsupportedParameter",
    "find_dependency",
    "find_normal_basis",
    "find_self_dual_normal_basis",
    "is_irreducible",
    "rank",
    "rank_of_rows",
    "search_modulus",
    "solve",
]


class UnsupportedParameter(ValueError):
    """Raised when a construction is asked for parameters it does not cover."""


class InconsistentSystem(ValueError):
    """Raised by :func:`solve` when ``m @ x = rhs`` has no solution."""


# Lowest-weight, then numerically smallest, irreducible polynomial of each degree.
MODULI: dict[int, int] = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011011,
    9: 0b1000000011,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000000001001,
    13: 0b10000000011011,
    14: 0b100000000100001,
    15: 0b1000000000000011,
    16: 0b10000000000101011,
}


# ---------- F2[x] helpers (polynomials as int masks)


def _pmod(a: int, m: int) -> int:
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


def _pgcd(a: int, b: int) -> int:
    while b:
        a, b = b, _pmod(a, b)
    return a


def is_irreducible(f: int) -> bool:
    """Test irreducibility of ``f`` over F2.

    ``f`` of degree ``n`` is irreducible iff ``gcd(f, x^(2^i) - x) = 1`` for
    every ``1 <= i <= n/2``.
    """
    n = f.bit_length() - 1
    if n < 1:
        return False
    if n == 1:
        return True
    p = 0b10
    for _ in range(1, n // 2 + 1):
        p = _mulmod(p, p, f)
        if _pgcd(f, p ^ 0b10) != 1:
            return False
    return True


def _mulmod(a: int, b: int, m: int) -> int:
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a = _pmod(a << 1, m)
    return r


def search_modulus(n: int) -> int:
    """Search for the lowest-weight, numerically smallest irreducible of degree n."""
    from itertools import combinations

    if n < 1:
        raise ValueError(f"degree must be positive, got {n}")
    for w in range(n):
        found = []
        for middle in combinations(range(1, n), w):
            f = (1 << n) | 1
            for b in middle:
                f |= 1 << b
            if is_irreducible(f):
                found.append(f)
        if found:
            return min(found)
    raise AssertionError("unreachable: irreducible polynomials exist in every degree")


# ---------- the field


class GF2n:
    """The field GF(2^n), elements being ``int`` masks below ``2**n``.

    Parameters
    ----------
    n : int
        Extension degree, ``1 <= n <= 63``.
    modulus : int, optional
        Degree-``n`` irreducible polynomial as an ``(n+1)``-bit mask.  Defaults
        to ``MODULI[n]`` (or a search for ``n > 16``).
    """

    def __init__(self, n: int, modulus: int | None = None) -> None:
        if not 1 <= n <= 63:
            raise UnsupportedParameter(f"extension degree must be in [1, 63], got {n}")
        if modulus is None:
            modulus = MODULI.get(n) or search_modulus(n)
        elif modulus.bit_length() - 1 != n or not is_irreducible(modulus):
            raise ValueError(f"modulus {modulus:#b} is not an irreducible polynomial of degree {n}")
        self.n = n
        self.modulus = modulus
        self.order = 1 << n
        self.mask = self.order - 1
        # Tr(a) = parity(a & trace_mask), bit i holding Tr(x^i)
        tm = 0
        for i in range(n):
            tm |= self._trace_slow(1 << i) << i
        self.trace_mask = tm

    def __repr__(self) -> str:
        return f"GF2n({self.n}, modulus={self.modulus:#b})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GF2n) and (self.n, self.modulus) == (other.n, other.modulus)

    def __hash__(self) -> int:
        return hash((GF2n, self.n, self.modulus))

    def element(self, value: int) -> int:
        """Validate ``value`` as an element of this field."""
        if not 0 <= value < self.order:
            raise ValueError(f"{value} is not an element of GF(2^{self.n})")
        return value

    def elements(self) -> range:
        return range(self.order)

    def mul(self, a: int, b: int) -> int:
        return _kernels.gf_mul(a, b, self.modulus, self.n)

    def square(self, a: int) -> int:
        return _kernels.gf_mul(a, a, self.modulus, self.n)

    def pow(self, a: int, e: int) -> int:
        r = 1
        while e:
            if e & 1:
                r = self.mul(r, a)
            a = self.square(a)
            e >>= 1
        return r

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return self.pow(a, self.order - 2)

    def frobenius(self, a: int, j: int = 1) -> int:
        """Return ``a^(2^j)``."""
        if j < 0:
            raise ValueError("Frobenius iteration count must be non-negative")
        for _ in range(j % self.n):
            a = _kernels.gf_mul(a, a, self.modulus, self.n)
        return a

    def conjugates(self, a: int) -> list[int]:
        """``[a, a^2, ..., a^(2^(n-1))]``."""
        out = [a]
        for _ in range(self.n - 1):
            out.append(self.square(out[-1]))
        return out

    def _trace_slow(self, a: int) -> int:
        t = 0
        for c in self.conjugates(a):
            t ^= c
        assert t in (0, 1), "trace must land in F2"
        return t

    def trace(self, a: int) -> int:
        return (a & self.trace_mask).bit_count() & 1

    def xtimes(self, a: int) -> list[int]:
        """``[a, x*a, x^2*a, ..., x^(n-1)*a]``, the images of the polynomial basis."""
        out = [a]
        top = self.order
        for _ in range(self.n - 1):
            a <<= 1
            if a & top:
                a ^= self.modulus
            out.append(a)
        return out

    def trace_form(self, h: int) -> int:
        """Mask ``t`` with ``Tr(a * h) = parity(a & t)`` for all ``a``."""
        t = 0
        for i, v in enumerate(self.xtimes(h)):
            t |= self.trace(v) << i
        return t


# ---------- bit matrices


def _rref(rows: Iterable[int], ncols: int) -> tuple[dict[int, int], bool]:
    """Reduced row echelon form as ``{pivot column: row}``.

    Each pivot column is set only in its own row.  Bits at or above ``ncols``
    ride along (augmented columns) and never become pivots; the flag reports
    whether some row reduced to a nonzero augmented part alone.
    """
    pivots: dict[int, int] = {}
    mask = (1 << ncols) - 1
    inconsistent = False
    for r in rows:
        for c, p in pivots.items():
            if (r >> c) & 1:
                r ^= p
        low = r & mask
        if not low:
            inconsistent = inconsistent or bool(r)
            continue
        c = (low & -low).bit_length() - 1
        for c2, p in pivots.items():
            if (p >> c) & 1:
                pivots[c2] = p ^ r
        pivots[c] = r
    return pivots, inconsistent


def rank_of_rows(rows: Sequence[int]) -> int:
    """F2 rank of a list of bit rows of any width."""
    if all(r < 1 << 64 for r in rows):
        return _kernels.rank_u64(rows)
    return _purecore.rank_u64(rows)


@dataclass(frozen=True)
class BinMatrix:
    """A dense binary matrix; ``rows[i]`` bit ``j`` is entry ``(i, j)``."""

    nrows: int
    ncols: int
    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.rows) != self.nrows:
            raise ValueError(f"expected {self.nrows} rows, got {len(self.rows)}")
        limit = 1 << self.ncols
        if any(not 0 <= r < limit for r in self.rows):
            raise ValueError(f"row wider than {self.ncols} columns")

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> BinMatrix:
        return cls(nrows, ncols, (0,) * nrows)

    @classmethod
    def identity(cls, n: int) -> BinMatrix:
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def from_lists(cls, entries: Sequence[Sequence[int]]) -> BinMatrix:
        ncols = len(entries[0]) if entries else 0
        rows = []
        for row in entries:
            if len(row) != ncols:
                raise ValueError("ragged rows")
            rows.append(sum((b & 1) << j for j, b in enumerate(row)))
        return cls(len(entries), ncols, tuple(rows))

    @classmethod
    def from_columns(cls, columns: Sequence[int], nrows: int) -> BinMatrix:
        rows = [0] * nrows
        for j, col in enumerate(columns):
            for i in range(nrows):
                if (col >> i) & 1:
                    rows[i] |= 1 << j
        return cls(nrows, len(columns), tuple(rows))

    def to_lists(self) -> list[list[int]]:
        return [[(r >> j) & 1 for j in range(self.ncols)] for r in self.rows]

    def columns(self) -> list[int]:
        cols = [0] * self.ncols
        for i, r in enumerate(self.rows):
            j = 0
            while r:
                if r & 1:
                    cols[j] |= 1 << i
                r >>= 1
                j += 1
        return cols

    def column(self, j: int) -> int:
        return sum(((r >> j) & 1) << i for i, r in enumerate(self.rows))

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return (self.rows[i] >> j) & 1

    @property
    def T(self) -> BinMatrix:
        return BinMatrix(self.ncols, self.nrows, tuple(self.columns()))

    def __add__(self, other: BinMatrix) -> BinMatrix:
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch")
        return BinMatrix(self.nrows, self.ncols, tuple(a ^ b for a, b in zip(self.rows, other.rows)))

    __sub__ = __add__

    def __matmul__(self, other: BinMatrix) -> BinMatrix:
        if self.ncols != other.nrows:
            raise ValueError(f"cannot multiply {self.nrows}x{self.ncols} by {other.nrows}x{other.ncols}")
        out = []
        for r in self.rows:
            acc = 0
            k = 0
            while r:
                if r & 1:
                    acc ^= other.rows[k]
                r >>= 1
                k += 1
            out.append(acc)
        return BinMatrix(self.nrows, other.ncols, tuple(out))

    def apply(self, vector: int) -> int:
        """Matrix-vector product; ``vector`` bit ``j`` is entry ``j``."""
        return sum(((r & vector).bit_count() & 1) << i for i, r in enumerate(self.rows))

    def select_columns(self, cols: Iterable[int]) -> BinMatrix:
        cols = list(cols)
        rows = tuple(sum(((r >> c) & 1) << j for j, c in enumerate(cols)) for r in self.rows)
        return BinMatrix(self.nrows, len(cols), rows)

    def rank(self) -> int:
        return rank_of_rows(self.rows)

    def inverse(self) -> BinMatrix:
        if self.nrows != self.ncols:
            raise ValueError("only square matrices are invertible")
        n = self.nrows
        aug = [r | (1 << (n + i)) for i, r in enumerate(self.rows)]
        piv, _ = _rref(aug, n)
        if len(piv) != n:
            raise ZeroDivisionError("matrix is singular")
        return BinMatrix(n, n, tuple(piv[c] >> n for c in range(n)))

    def is_invertible(self) -> bool:
        return self.nrows == self.ncols and self.rank() == self.nrows

    def __str__(self) -> str:
        return "\n".join("".join(str(b) for b in row) for row in self.to_lists())


def rank(m: BinMatrix) -> int:
    """F2 rank of ``m``."""
    return m.rank()


def solve(m: BinMatrix, rhs: int) -> tuple[int, list[int]]:
    """Solve ``m @ x = rhs`` over F2.

    Returns
    -------
    x : int
        One solution (free variables set to zero).
    kernel : list of int
        A basis of the null space of ``m``.

    Raises
    ------
    InconsistentSystem
        If no solution exists.
    """
    if rhs >> m.nrows:
        raise ValueError(f"right-hand side wider than {m.nrows} rows")
    n = m.ncols
    piv, inconsistent = _rref((r | (((rhs >> i) & 1) << n) for i, r in enumerate(m.rows)), n)
    if inconsistent:
        raise InconsistentSystem("system has no solution")
    x = 0
    for c, r in piv.items():
        if (r >> n) & 1:
            x |= 1 << c
    kernel = []
    for f in range(n):
        if f in piv:
            continue
        v = 1 << f
        for c, r in piv.items():
            if (r >> f) & 1:
                v |= 1 << c
        kernel.append(v)
    return x, kernel


def find_dependency(vectors: Iterable[int], width: int) -> int | None:
    """Return a nonzero mask ``s`` with ``XOR_{i in s} vectors[i] == 0``, if one exists.

    Scans ``vectors`` in order and stops at the first linear dependency.
    """
    basis: dict[int, int] = {}
    for i, v in enumerate(vectors):
        v |= 1 << (width + i)
        while True:
            low = v & ((1 << width) - 1)
            if not low:
                return v >> width
            h = low.bit_length() - 1
            b = basis.get(h)
            if b is None:
                basis[h] = v
                break
            v ^= b
    return None


class F2Span:
    """Membership oracle for the F2 span of a fixed set of vectors."""

    def __init__(self, vectors: Iterable[int]) -> None:
        self._basis: dict[int, int] = {}
        for v in vectors:
            v = self.reduce(v)
            if v:
                self._basis[v.bit_length() - 1] = v

    def reduce(self, v: int) -> int:
        basis = self._basis
        while v:
            b = basis.get(v.bit_length() - 1)
            if b is None:
                return v
            v ^= b
        return 0

    def __contains__(self, v: int) -> bool:
        return self.reduce(v) == 0

    @property
    def dimension(self) -> int:
        return len(self._basis)


# ---------- normal bases


@dataclass(frozen=True)
class NormalBasis:
    """The basis ``[alpha, alpha^2, ..., alpha^(2^(n-1))]`` of GF(2^n) over F2."""

    field: GF2n
    alpha: int
    elements: tuple[int, ...] = field(init=False)
    self_dual: bool = field(init=False)

    def __post_init__(self) -> None:
        f = self.field
        elems = tuple(f.conjugates(f.element(self.alpha)))
        if rank_of_rows(elems) != f.n:
            raise ValueError(f"{self.alpha} does not generate a normal basis")
        object.__setattr__(self, "elements", elems)
        gram = gram_matrix(f, elems)
        object.__setattr__(self, "self_dual", gram == BinMatrix.identity(f.n))

    @property
    def n(self) -> int:
        return self.field.n

    @cached_property
    def _coords(self) -> tuple[int, ...]:
        # column b: coordinates of x^b
        inv = BinMatrix.from_columns(self.elements, self.n).inverse()
        return tuple(inv.columns())

    def element_to_column(self, a: int) -> int:
        """Coordinates of ``a``: bit ``i`` multiplies ``alpha^(2^i)``."""
        out = 0
        coords = self._coords
        b = 0
        while a:
            if a & 1:
                out ^= coords[b]
            a >>= 1
            b += 1
        return out

    def column_to_element(self, c: int) -> int:
        out = 0
        for e in self.elements:
            if c & 1:
                out ^= e
            c >>= 1
        return out

    def shift(self, t: int) -> NormalBasis:
        """The basis generated by ``alpha^(2^t)``; the same set, rotated."""
        return NormalBasis(self.field, self.elements[t % self.n])


def gram_matrix(f: GF2n, elements: Sequence[int]) -> BinMatrix:
    """``[Tr(e_i e_j)]`` over the given elements."""
    return BinMatrix.from_lists([[f.trace(f.mul(a, b)) for b in elements] for a in elements])


def find_normal_basis(f: GF2n) -> NormalBasis:
    """Lowest element (in coefficient order) generating a normal basis."""
    for a in range(1, f.order):
        if rank_of_rows(f.conjugates(a)) == f.n:
            return NormalBasis(f, a)
    raise AssertionError("every finite field has a normal basis")


def _self_dual_candidates(f: GF2n) -> Iterator[int]:
    # Tr(a^(2^i) a^(2^j)) = Tr(a * a^(2^(j-i))), so only n distinct entries exist.
    for a in range(1, f.order):
        if f.trace(a) != 1:
            continue
        conj = f.conjugates(a)
        if all(f.trace(f.mul(a, c)) == 0 for c in conj[1:]):
            yield a


def find_self_dual_normal_basis(f: GF2n) -> NormalBasis:
    """Lowest ``alpha`` whose conjugates form a trace-orthonormal basis.

    Only odd extension degrees are supported.
    """
    if f.n % 2 == 0:
        raise UnsupportedParameter(f"self-dual normal basis search requires odd n, got n={f.n}")
    for a in _self_dual_candidates(f):
        basis = NormalBasis(f, a)
        if basis.self_dual:
            return basis
    raise AssertionError(f"no self-dual normal basis found for n={f.n}")
