from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from rankqec.f2field import (
    MODULI,
    BinMatrix,
    F2Span,
    GF2n,
    InconsistentSystem,
    NormalBasis,
    UnsupportedParameter,
    find_dependency,
    find_normal_basis,
    find_self_dual_normal_basis,
    gram_matrix,
    is_irreducible,
    rank,
    rank_of_rows,
    search_modulus,
    solve,
)

# Lowest self-dual generator per odd degree, found by the oracle scan below and frozen.
SELF_DUAL_ALPHA = {3: 3, 5: 3, 7: 13, 9: 15, 11: 97, 13: 25}

GF8 = GF2n(3)


def elem(n: int):
    return st.integers(0, (1 << n) - 1)


# ---------- moduli


@pytest.mark.parametrize("n", range(1, 17))
def test_moduli_irreducible_by_trial_division(n):
    assert oracles.irreducible_by_trial_division(MODULI[n])
    assert MODULI[n].bit_length() - 1 == n


@pytest.mark.parametrize("n", range(2, 12))
def test_moduli_are_lowest_weight_then_smallest(n):
    def key(f):
        return (f.bit_count(), f)

    cands = [f for f in range(1 << n, 1 << (n + 1)) if f & 1 and oracles.irreducible_by_trial_division(f)]
    assert MODULI[n] == min(cands, key=key)


def test_irreducibility_agrees_with_trial_division():
    for f in range(2, 1 << 10):
        assert is_irreducible(f) == oracles.irreducible_by_trial_division(f), bin(f)


def test_search_modulus_beyond_table():
    m = search_modulus(17)
    assert m == 0b100000000000001001
    assert is_irreducible(m)
    assert GF2n(17).modulus == m


def test_field_rejects_bad_modulus_and_degree():
    with pytest.raises(ValueError):
        GF2n(3, 0b1111)
    with pytest.raises(UnsupportedParameter):
        GF2n(0)
    with pytest.raises(ValueError):
        GF8.element(8)


# ---------- arithmetic


def test_gf8_worked_product():
    g = 0b010
    assert GF8.mul(g, GF8.square(g)) == 0b011


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 8])
def test_mul_matches_schoolbook_exhaustively(n):
    f = GF2n(n)
    for a in range(f.order):
        for b in range(f.order):
            assert f.mul(a, b) == oracles.poly_mul_mod(a, b, f.modulus)


@given(st.integers(5, 16).flatmap(lambda n: st.tuples(st.just(n), elem(n), elem(n), elem(n))))
def test_field_axioms(args):
    n, a, b, c = args
    f = GF2n(n)
    assert f.mul(a, b) == f.mul(b, a)
    assert f.mul(a, f.mul(b, c)) == f.mul(f.mul(a, b), c)
    assert f.mul(a, b ^ c) == f.mul(a, b) ^ f.mul(a, c)
    assert f.mul(1, a) == a
    assert f.mul(a, b) == oracles.poly_mul_mod(a, b, f.modulus)
    if a:
        assert f.mul(a, f.inv(a)) == 1


def test_inverse_of_zero():
    with pytest.raises(ZeroDivisionError):
        GF8.inv(0)


@given(st.integers(2, 13).flatmap(lambda n: st.tuples(st.just(n), elem(n), elem(n), st.integers(0, 40))))
def test_frobenius(args):
    n, a, b, j = args
    f = GF2n(n)
    assert f.frobenius(a, 0) == a
    assert f.frobenius(a, n) == a
    assert f.frobenius(a ^ b, 1) == f.frobenius(a, 1) ^ f.frobenius(b, 1)
    assert f.frobenius(a, j) == oracles.frob(a, j % n, f.modulus)
    assert f.pow(a, 1 << (j % n)) == f.frobenius(a, j)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6, 7])
def test_trace_matches_conjugate_sum(n):
    f = GF2n(n)
    for a in f.elements():
        assert f.trace(a) == oracles.trace(a, f.modulus)


def test_trace_basic_values():
    assert GF8.trace(0) == 0
    for n in (3, 5, 7, 9):
        assert GF2n(n).trace(1) == 1
    counts = [sum(GF8.trace(a) == v for a in GF8.elements()) for v in (0, 1)]
    assert counts == [4, 4]


@given(elem(9), elem(9))
def test_trace_form(a, h):
    f = GF2n(9)
    assert (a & f.trace_form(h)).bit_count() % 2 == f.trace(f.mul(a, h))


# ---------- normal bases


def _oracle_self_dual(n: int) -> int:
    f = GF2n(n)
    for a in range(1, f.order):
        conj = [oracles.frob(a, i, f.modulus) for i in range(n)]
        if all(
            oracles.trace(oracles.poly_mul_mod(x, y, f.modulus), f.modulus) == (i == j)
            for i, x in enumerate(conj)
            for j, y in enumerate(conj)
        ):
            return a
    raise AssertionError


@pytest.mark.parametrize("n", [3, 5, 7])
def test_self_dual_alpha_matches_oracle_scan(n):
    assert _oracle_self_dual(n) == SELF_DUAL_ALPHA[n]


@pytest.mark.parametrize("n", sorted(SELF_DUAL_ALPHA))
def test_self_dual_basis_trace_conditions(n):
    f = GF2n(n)
    b = find_self_dual_normal_basis(f)
    assert b.alpha == SELF_DUAL_ALPHA[n]
    assert b.self_dual
    for i, x in enumerate(b.elements):
        for j, y in enumerate(b.elements):
            assert oracles.trace(oracles.poly_mul_mod(x, y, f.modulus), f.modulus) == (i == j)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_self_dual_requires_odd_degree(n):
    with pytest.raises(UnsupportedParameter):
        find_self_dual_normal_basis(GF2n(n))


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_normal_basis_for_even_degree(n):
    b = find_normal_basis(GF2n(n))
    assert oracles.rank_lists([[(e >> i) & 1 for i in range(n)] for e in b.elements]) == n
    # No self-dual normal basis exists when 4 divides n.
    if n % 4 == 0:
        f = b.field
        assert not any(NormalBasis(f, a).self_dual for a in range(1, f.order) if rank_of_rows(f.conjugates(a)) == n)


def test_non_normal_element_rejected():
    with pytest.raises(ValueError):
        NormalBasis(GF8, 1)


def test_coordinates_roundtrip_gf8():
    b = find_self_dual_normal_basis(GF8)
    assert b.element_to_column(b.alpha) == 1
    assert b.element_to_column(0) == 0
    for a in GF8.elements():
        assert b.column_to_element(b.element_to_column(a)) == a
    for i, e in enumerate(b.elements):
        assert b.element_to_column(e) == 1 << i


@given(elem(11))
def test_self_dual_coordinates_are_traces(a):
    # In a trace-orthonormal basis, coordinate i of a is Tr(a * e_i).
    b = find_self_dual_normal_basis(GF2n(11))
    col = b.element_to_column(a)
    for i, e in enumerate(b.elements):
        assert (col >> i) & 1 == b.field.trace(b.field.mul(a, e))


def test_shift_rotates_elements():
    b = find_self_dual_normal_basis(GF2n(5))
    s = b.shift(2)
    assert s.elements == b.elements[2:] + b.elements[:2]
    assert s.self_dual
    assert b.shift(5) == b


def test_gram_matrix_identity_for_self_dual():
    b = find_self_dual_normal_basis(GF2n(7))
    assert gram_matrix(b.field, b.elements) == BinMatrix.identity(7)


# ---------- bit matrices


def _random_matrix(rng: random.Random, r: int, c: int) -> BinMatrix:
    return BinMatrix(r, c, tuple(rng.getrandbits(c) for _ in range(r)))


def test_rank_basic_cases():
    assert rank(BinMatrix.zeros(4, 5)) == 0
    assert rank(BinMatrix.identity(6)) == 6
    col, row = 0b1011, 0b110
    outer = BinMatrix(4, 3, tuple(row if (col >> i) & 1 else 0 for i in range(4)))
    assert rank(outer) == 1


@given(st.integers(0, 2**32 - 1), st.integers(1, 12), st.integers(1, 12))
def test_rank_matches_oracle(seed, r, c):
    m = _random_matrix(random.Random(seed), r, c)
    assert m.rank() == oracles.rank_lists(m.to_lists())
    assert m.T.rank() == m.rank()


def test_rank_of_wide_rows_uses_fallback():
    rows = [1 << 70, (1 << 70) | 1, 1, 3 << 100]
    assert rank_of_rows(rows) == 3


@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.integers(1, 8), st.integers(1, 8))
def test_matmul_matches_oracle(seed, a, b, c):
    rng = random.Random(seed)
    x, y = _random_matrix(rng, a, b), _random_matrix(rng, b, c)
    assert (x @ y).to_lists() == oracles.gf2_matmul(x.to_lists(), y.to_lists())
    v = rng.getrandbits(b)
    assert x.apply(v) == (x @ BinMatrix.from_columns([v], b)).column(0)


def test_matrix_views():
    m = BinMatrix.from_lists([[1, 0, 1], [0, 1, 1]])
    assert m[0, 2] == 1 and m[1, 0] == 0
    assert m.T.to_lists() == [[1, 0], [0, 1], [1, 1]]
    assert BinMatrix.from_columns(m.columns(), 2) == m
    assert m.select_columns([2, 0]).to_lists() == [[1, 1], [1, 0]]
    assert (m + m) == BinMatrix.zeros(2, 3)
    assert str(m) == "101\n011"
    with pytest.raises(ValueError):
        BinMatrix(1, 2, (0b100,))


@given(st.integers(0, 2**32 - 1), st.integers(1, 10))
def test_inverse(seed, n):
    m = _random_matrix(random.Random(seed), n, n)
    if m.rank() < n:
        assert not m.is_invertible()
        with pytest.raises(ZeroDivisionError):
            m.inverse()
    else:
        assert m @ m.inverse() == BinMatrix.identity(n)


def test_solve_trivial_cases():
    x, ker = solve(BinMatrix.identity(5), 0b10110)
    assert x == 0b10110 and ker == []
    with pytest.raises(InconsistentSystem):
        solve(BinMatrix.zeros(3, 3), 0b1)


@given(st.integers(0, 2**32 - 1), st.integers(1, 10), st.integers(1, 10))
def test_solve_random_solvable(seed, r, c):
    rng = random.Random(seed)
    m = _random_matrix(rng, r, c)
    rhs = m.apply(rng.getrandbits(c))
    x, ker = solve(m, rhs)
    assert m.apply(x) == rhs
    assert len(ker) == c - m.rank()
    for k in ker:
        assert m.apply(k) == 0
    assert rank_of_rows(ker) == len(ker)


@given(st.lists(st.integers(0, 255), min_size=1, max_size=12))
def test_find_dependency(vectors):
    dep = find_dependency(vectors, 8)
    if rank_of_rows(vectors) == len(vectors):
        assert dep is None
    else:
        assert dep
        acc = 0
        for i, v in enumerate(vectors):
            if (dep >> i) & 1:
                acc ^= v
        assert acc == 0


@given(st.lists(st.integers(0, 2**10 - 1), max_size=8), st.integers(0, 2**10 - 1))
def test_span_membership(vectors, probe):
    span = F2Span(vectors)
    assert span.dimension == rank_of_rows(vectors)
    assert (probe in span) == (rank_of_rows(vectors + [probe]) == rank_of_rows(vectors))
    for v in vectors:
        assert v in span
