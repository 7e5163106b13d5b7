# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: GF(2^n) multiply, F2 rank of <=64-bit rows, and the
Gray-code minimum-rank scan behind the exhaustive Gabidulin oracles."""

from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free


cdef extern from *:
    int __builtin_clzll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


cdef inline int _rank(const uint64_t* rows, int m, uint64_t* basis) noexcept nogil:
    cdef int i, h, r = 0
    cdef uint64_t v
    for i in range(64):
        basis[i] = 0
    for i in range(m):
        v = rows[i]
        while v:
            h = 63 - __builtin_clzll(v)
            if basis[h] == 0:
                basis[h] = v
                r += 1
                break
            v ^= basis[h]
    return r


def gf_mul(uint64_t a, uint64_t b, uint64_t modulus, int n):
    cdef uint64_t top = (<uint64_t>1) << n
    cdef uint64_t r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= modulus
    return r


def rank_u64(rows):
    cdef int m = len(rows)
    cdef uint64_t basis[64]
    cdef uint64_t* buf = <uint64_t*> malloc(max(m, 1) * sizeof(uint64_t))
    cdef int i, r
    if buf == NULL:
        raise MemoryError()
    try:
        for i in range(m):
            buf[i] = rows[i]
        r = _rank(buf, m, basis)
    finally:
        free(buf)
    return r


def rank_scan(gens, target, uint64_t start, uint64_t stop, bint skip_zero):
    cdef int width = len(target)
    cdef int ngens = len(gens)
    cdef uint64_t* g = <uint64_t*> malloc(max(ngens * width, 1) * sizeof(uint64_t))
    cdef uint64_t* cw = <uint64_t*> malloc(max(width, 1) * sizeof(uint64_t))
    cdef uint64_t basis[64]
    cdef uint64_t i, msg, g0, best_msg = 0
    cdef int j, b, bit, rk, best_rank = width + 1
    cdef bint found = False
    if g == NULL or cw == NULL:
        free(g)
        free(cw)
        raise MemoryError()
    try:
        if start >= stop:
            return -1, -1
        for b in range(ngens):
            row = gens[b]
            for j in range(width):
                g[b * width + j] = row[j]
        for j in range(width):
            cw[j] = target[j]
        g0 = start ^ (start >> 1)
        b = 0
        while b < 64 and (g0 >> b):
            if (g0 >> b) & 1:
                for j in range(width):
                    cw[j] ^= g[b * width + j]
            b += 1
        with nogil:
            i = start
            while i < stop:
                if i != start:
                    bit = __builtin_ctzll(i)
                    for j in range(width):
                        cw[j] ^= g[bit * width + j]
                msg = i ^ (i >> 1)
                if not (skip_zero and msg == 0):
                    rk = _rank(cw, width, basis)
                    if rk < best_rank or (rk == best_rank and msg < best_msg):
                        best_rank = rk
                        best_msg = msg
                        found = True
                i += 1
        if not found:
            return -1, -1
        return best_rank, best_msg
    finally:
        free(g)
        free(cw)
