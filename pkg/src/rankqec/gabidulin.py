"""Gabidulin codes: evaluations of linearized polynomials at a basis of GF(2^n).

A codeword is a length-``n`` tuple of field elements.  Its matrix view puts the
coordinates of symbol ``j`` (in the reference normal basis) in column ``j``; the
rank weight is the F2-dimension of the span of the symbols, which does not
depend on the basis used for the matrix view.
"""

from __future__ import annotations

from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property, lru_cache

from . import _kernels
from .f2field import (
    BinMatrix,
    F2Span,
    GF2n,
    InconsistentSystem,
    NormalBasis,
    UnsupportedParameter,
    find_dependency,
    rank_of_rows,
    solve,
)
from .linpoly import LinearizedPoly, NotDivisible, interpolate, left_divide

__all__ = [
    "DecodingFailure",
    "GabidulinCode",
    "InvalidSyndrome",
    "SyndromeDecoder",
    "decode_bounded",
    "decode_exhaustive",
    "dual",
    "encode",
    "encode_systematic",
    "inner",
    "matrix_to_word",
    "min_rank_distance_exhaustive",
    "rank_weight",
    "syndrome",
    "syndrome_decode",
    "word_to_matrix",
]

Word = tuple[int, ...]

# 2^22 codewords is the largest exhaustive scan we agree to run.
SCAN_LIMIT_BITS = 22


class DecodingFailure(Exception):
    """No codeword lies within the requested rank distance."""


class InvalidSyndrome(DecodingFailure):
    """The syndrome is not produced by any error word."""


@dataclass(frozen=True)
class GabidulinCode:
    """``Gab(alpha^(2^shift), k)`` over the normal basis ``basis``.

    The evaluation vector is the normal basis rotated by ``shift``; ``basis``
    itself stays the reference for matrix views of codewords.
    """

    basis: NormalBasis
    k: int
    shift: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.k <= self.basis.n:
            raise ValueError(f"dimension must satisfy 1 <= k <= n={self.basis.n}, got {self.k}")
        object.__setattr__(self, "shift", self.shift % self.basis.n)

    @property
    def field(self) -> GF2n:
        return self.basis.field

    @property
    def n(self) -> int:
        return self.basis.n

    @cached_property
    def eval_basis(self) -> Word:
        e = self.basis.elements
        return e[self.shift :] + e[: self.shift]

    @cached_property
    def generator_rows(self) -> tuple[Word, ...]:
        """Row ``i`` is the evaluation vector raised to ``2^i``."""
        f = self.field
        rows = [self.eval_basis]
        for _ in range(self.k - 1):
            rows.append(tuple(f.square(b) for b in rows[-1]))
        return tuple(rows)

    @cached_property
    def f2_generators(self) -> tuple[Word, ...]:
        """F2 basis of the code: entry ``i*n + b`` is ``x^b`` times row ``i``."""
        out = []
        for row in self.generator_rows:
            cols = [self.field.xtimes(a) for a in row]
            out.extend(tuple(c[b] for c in cols) for b in range(self.n))
        return tuple(out)

    @cached_property
    def _span(self) -> F2Span:
        return F2Span(pack(self.n, w) for w in self.f2_generators)

    def __contains__(self, word: Sequence[int]) -> bool:
        return pack(self.n, word) in self._span

    def __repr__(self) -> str:
        return f"Gab(n={self.n}, k={self.k}, shift={self.shift})"


def pack(n: int, word: Sequence[int]) -> int:
    return sum(a << (i * n) for i, a in enumerate(word))


def unpack(n: int, v: int, length: int) -> Word:
    mask = (1 << n) - 1
    return tuple((v >> (i * n)) & mask for i in range(length))


def add(u: Sequence[int], v: Sequence[int]) -> Word:
    return tuple(a ^ b for a, b in zip(u, v, strict=True))


def _check_word(code: GabidulinCode, word: Sequence[int]) -> Word:
    if len(word) != code.n:
        raise ValueError(f"word length {len(word)} != code length {code.n}")
    return tuple(code.field.element(a) for a in word)


def encode(code: GabidulinCode, message: Sequence[int]) -> Word:
    """``[f(b_1), ..., f(b_n)]`` for ``f`` with coefficients ``message``."""
    if len(message) != code.k:
        raise ValueError(f"message length {len(message)} != k={code.k}")
    f = code.field
    out = [0] * code.n
    for a, row in zip(message, code.generator_rows):
        f.element(a)
        if a:
            for j, g in enumerate(row):
                out[j] ^= f.mul(a, g)
    return tuple(out)


def encode_systematic(code: GabidulinCode, info: BinMatrix) -> Word:
    """Codeword whose first ``k`` symbols are the columns of ``info`` (n x k)."""
    if (info.nrows, info.ncols) != (code.n, code.k):
        raise ValueError(f"info must be {code.n}x{code.k}, got {info.nrows}x{info.ncols}")
    ys = [code.basis.column_to_element(c) for c in info.columns()]
    f = interpolate(code.field, list(zip(code.eval_basis[: code.k], ys)), code.k)
    return encode(code, f.padded(code.k))


def word_to_matrix(word: Sequence[int], basis: NormalBasis) -> BinMatrix:
    return BinMatrix.from_columns([basis.element_to_column(a) for a in word], basis.n)


def matrix_to_word(m: BinMatrix, basis: NormalBasis) -> Word:
    return tuple(basis.column_to_element(c) for c in m.columns())


def rank_weight(word: Sequence[int]) -> int:
    """F2 rank of the matrix view, i.e. the dimension of the span of the symbols."""
    return rank_of_rows(word)


def inner(field: GF2n, u: Sequence[int], v: Sequence[int]) -> int:
    """``<u, v> = sum_i Tr(u_i v_i)``."""
    acc = 0
    for a, b in zip(u, v, strict=True):
        acc ^= field.trace(field.mul(a, b))
    return acc


def dual(code: GabidulinCode) -> GabidulinCode:
    """``Gab(alpha, r)`` has dual ``Gab(alpha^(2^r), n - r)`` for self-dual ``alpha``."""
    if not code.basis.self_dual:
        raise UnsupportedParameter("duality requires a self-dual normal basis")
    if code.k == code.n:
        raise UnsupportedParameter("the full space has a zero-dimensional dual")
    return GabidulinCode(code.basis, code.n - code.k, code.shift + code.k)


def _scan(code: GabidulinCode, target: Word, skip_zero: bool, workers: int) -> tuple[int, int]:
    nbits = code.n * code.k
    if nbits > SCAN_LIMIT_BITS:
        raise ValueError(
            f"exhaustive scan over 2^{nbits} = {1 << nbits} codewords exceeds the "
            f"2^{SCAN_LIMIT_BITS} limit"
        )
    gens = code.f2_generators
    total = 1 << nbits
    workers = max(1, min(workers, total))
    if workers == 1:
        return _kernels.rank_scan(gens, target, 0, total, skip_zero)
    bounds = [total * w // workers for w in range(workers + 1)]
    with ThreadPoolExecutor(workers) as pool:
        parts = pool.map(
            lambda lo_hi: _kernels.rank_scan(gens, target, lo_hi[0], lo_hi[1], skip_zero),
            zip(bounds, bounds[1:]),
        )
        found = [p for p in parts if p[1] >= 0]
    return min(found)


def min_rank_distance_exhaustive(code: GabidulinCode, workers: int = 1) -> int:
    """Minimum rank weight over all nonzero codewords (brute force)."""
    best, _ = _scan(code, (0,) * code.n, True, workers)
    return best


def _message_word(code: GabidulinCode, msg: int) -> Word:
    out = [0] * code.n
    b = 0
    while msg:
        if msg & 1:
            for j, a in enumerate(code.f2_generators[b]):
                out[j] ^= a
        msg >>= 1
        b += 1
    return tuple(out)


def decode_exhaustive(
    code: GabidulinCode, received: Sequence[int], workers: int = 1
) -> tuple[Word, int]:
    """Nearest codeword in rank distance, and that distance.

    Ties go to the numerically smallest message, whose F2 coordinate ``i*n + b``
    is bit ``b`` of coefficient ``a_i``.
    """
    received = _check_word(code, received)
    dist, msg = _scan(code, received, False, workers)
    return _message_word(code, msg), dist


def decode_bounded(
    code: GabidulinCode, received: Sequence[int], t_max: int
) -> tuple[Word, Word]:
    """Return ``(codeword, error)`` with ``rank_weight(error) <= t_max``.

    Finds a nonzero pair ``(V, N)`` with ``qdeg V <= t_max``,
    ``qdeg N <= k - 1 + t_max`` and ``V(r_i) = N(b_i)`` for every position, then
    recovers the message polynomial as the left quotient of ``N`` by ``V``.

    Raises
    ------
    DecodingFailure
        If no codeword lies within rank distance ``t_max``.
    """
    n, k = code.n, code.k
    if not 0 <= t_max <= (n - k) // 2:
        raise ValueError(f"t_max must lie in [0, {(n - k) // 2}], got {t_max}")
    received = _check_word(code, received)
    if received in code:
        return received, (0,) * n
    if t_max == 0:
        raise DecodingFailure("received word is not a codeword")
    f = code.field
    t = t_max
    r_frob = [f.conjugates(r) for r in received]
    b_frob = [f.conjugates(b) for b in code.eval_basis]
    columns = []
    for powers, count in ((r_frob, t + 1), (b_frob, k + t)):
        for j in range(count):
            per_pos = [f.xtimes(p[j]) for p in powers]
            for b in range(n):
                columns.append(sum(v[b] << (i * n) for i, v in enumerate(per_pos)))
    dep = find_dependency(columns, n * n)
    if dep is None:
        raise DecodingFailure(f"no key-equation solution at rank {t}")
    coeffs = unpack(n, dep, 2 * t + k + 1)
    v_poly = LinearizedPoly(f, coeffs[: t + 1])
    n_poly = LinearizedPoly(f, coeffs[t + 1 :])
    if v_poly.is_zero():
        raise DecodingFailure("degenerate key-equation solution")
    try:
        msg = left_divide(n_poly, v_poly)
    except NotDivisible:
        raise DecodingFailure("error rank exceeds the decoding radius") from None
    if len(msg.coeffs) > k:
        raise DecodingFailure("quotient exceeds the code dimension")
    cw = encode(code, msg.padded(k))
    err = add(received, cw)
    if rank_weight(err) > t_max:
        raise DecodingFailure("error rank exceeds the decoding radius")
    return cw, err


def syndrome(field: GF2n, check_rows: Sequence[Sequence[int]], word: Sequence[int]) -> int:
    """Bit ``g`` is ``<word, check_rows[g]>``."""
    return sum(inner(field, word, h) << g for g, h in enumerate(check_rows))


class SyndromeDecoder:
    """Minimum-rank error recovery from trace-inner-product syndromes.

    ``check_rows`` must span the dual of ``kernel_code`` (as F2 functionals via
    the trace inner product).
    """

    def __init__(self, kernel_code: GabidulinCode, check_rows: Sequence[Sequence[int]]) -> None:
        f = kernel_code.field
        n = kernel_code.n
        self.kernel_code = kernel_code
        self.check_rows = tuple(tuple(h) for h in check_rows)
        self.t_max = (n - kernel_code.k) // 2
        rows = tuple(sum(f.trace_form(a) << (i * n) for i, a in enumerate(h)) for h in self.check_rows)
        self._matrix = BinMatrix(len(rows), n * n, rows)
        # particular solutions are linear in the right-hand side
        lifts = []
        for g in range(len(rows)):
            try:
                x, _ = solve(self._matrix, 1 << g)
            except InconsistentSystem:
                x = None
            lifts.append(x)
        self._lifts = lifts

    def lift(self, syn: int) -> Word:
        """Some word (not necessarily of low rank) with the given syndrome."""
        n = self.kernel_code.n
        x = 0
        g = 0
        s = syn
        while s:
            if s & 1:
                if self._lifts[g] is None:
                    raise InvalidSyndrome(f"syndrome bit {g} is not attainable")
                x ^= self._lifts[g]
            s >>= 1
            g += 1
        if self._matrix.apply(x) != syn:
            raise InvalidSyndrome("syndrome is not attainable")
        return unpack(n, x, n)

    def decode(self, syn: int) -> Word:
        if syn >> len(self.check_rows):
            raise ValueError("syndrome longer than the number of checks")
        if syn == 0:
            return (0,) * self.kernel_code.n
        e0 = self.lift(syn)
        _, err = decode_bounded(self.kernel_code, e0, self.t_max)
        return err


@lru_cache(maxsize=64)
def _cached_decoder(kernel_code: GabidulinCode, check_rows: tuple[Word, ...]) -> SyndromeDecoder:
    return SyndromeDecoder(kernel_code, check_rows)


def syndrome_decode(
    kernel_code: GabidulinCode, check_rows: Sequence[Sequence[int]], syn: int
) -> Word:
    """Minimal-rank error with syndrome ``syn`` with respect to ``check_rows``."""
    rows = tuple(tuple(h) for h in check_rows)
    return _cached_decoder(kernel_code, rows).decode(syn)
