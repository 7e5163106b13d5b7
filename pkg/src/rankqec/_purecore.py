"""Pure-Python implementations of the hot kernels.

Used when the compiled ``_core`` extension is unavailable, or when
``RANKQEC_PURE_PYTHON=1`` is set.  Both backends expose the same three
functions and must agree bit for bit.
"""

from __future__ import annotations

from collections.abc import Sequence


def gf_mul(a: int, b: int, modulus: int, n: int) -> int:
    """Multiply two GF(2^n) elements given as polynomial-basis bit masks."""
    top = 1 << n
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= modulus
    return r


def rank_u64(rows: Sequence[int]) -> int:
    """F2 rank of a list of bit rows."""
    basis: dict[int, int] = {}
    for v in rows:
        while v:
            h = v.bit_length() - 1
            b = basis.get(h)
            if b is None:
                basis[h] = v
                break
            v ^= b
    return len(basis)


def rank_scan(
    gens: Sequence[Sequence[int]],
    target: Sequence[int],
    start: int,
    stop: int,
    skip_zero: bool,
) -> tuple[int, int]:
    """Minimise ``rank(target + sum_{b in msg} gens[b])`` over Gray-code indices.

    Index ``i`` in ``[start, stop)`` visits message ``i ^ (i >> 1)``.  Returns
    ``(best_rank, best_message)`` with ties broken towards the smaller message,
    or ``(-1, -1)`` when the range is empty.
    """
    width = len(target)
    if start >= stop:
        return -1, -1
    g0 = start ^ (start >> 1)
    cw = list(target)
    b = 0
    while g0 >> b:
        if (g0 >> b) & 1:
            row = gens[b]
            for j in range(width):
                cw[j] ^= row[j]
        b += 1
    best_rank, best_msg = width + 1, -1
    for i in range(start, stop):
        if i != start:
            bit = (i & -i).bit_length() - 1
            row = gens[bit]
            for j in range(width):
                cw[j] ^= row[j]
        msg = i ^ (i >> 1)
        if skip_zero and msg == 0:
            continue
        rk = rank_u64(cw)
        if rk < best_rank or (rk == best_rank and msg < best_msg):
            best_rank, best_msg = rk, msg
    if best_msg < 0:
        return -1, -1
    return best_rank, best_msg
