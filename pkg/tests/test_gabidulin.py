from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from rankqec.f2field import BinMatrix, GF2n, UnsupportedParameter, find_normal_basis, find_self_dual_normal_basis
from rankqec.gabidulin import (
    DecodingFailure,
    GabidulinCode,
    InvalidSyndrome,
    SyndromeDecoder,
    add,
    decode_bounded,
    decode_exhaustive,
    dual,
    encode,
    encode_systematic,
    inner,
    matrix_to_word,
    min_rank_distance_exhaustive,
    pack,
    rank_weight,
    syndrome,
    syndrome_decode,
    unpack,
    word_to_matrix,
)


def basis(n: int):
    return find_self_dual_normal_basis(GF2n(n))


def random_codeword(code: GabidulinCode, rng: random.Random):
    return encode(code, [rng.randrange(code.field.order) for _ in range(code.k)])


# ---------- encoding


def test_identity_message_gives_basis():
    code = GabidulinCode(basis(5), 3)
    assert encode(code, [1, 0, 0]) == code.basis.elements
    assert encode(code, [0, 0, 0]) == (0,) * 5


def test_n3_k1_codewords_are_scalar_multiples():
    code = GabidulinCode(basis(3), 1)
    f = code.field
    words = {encode(code, [a]) for a in range(8)}
    assert words == {tuple(f.mul(a, b) for b in code.basis.elements) for a in range(8)}
    assert len(words) == 8


@pytest.mark.parametrize("nk", [(3, 1), (3, 2), (5, 2)])
def test_codewords_match_oracle_enumeration(nk):
    n, k = nk
    code = GabidulinCode(basis(n), k)
    f = code.field
    expect = {tuple(w) for w in oracles.gabidulin_codewords(list(code.basis.elements), k, f.modulus)}
    got = {encode(code, [(m >> (n * i)) & f.mask for i in range(k)]) for m in range(1 << (n * k))}
    assert got == expect


def test_membership():
    rng = random.Random(1)
    code = GabidulinCode(basis(7), 3)
    for _ in range(50):
        c = random_codeword(code, rng)
        assert c in code
        e = oracles.random_rank_error(rng, 7, 7, 1)
        assert add(c, e) not in code


def test_bad_arguments():
    b = basis(5)
    with pytest.raises(ValueError):
        GabidulinCode(b, 0)
    with pytest.raises(ValueError):
        GabidulinCode(b, 6)
    code = GabidulinCode(b, 2)
    with pytest.raises(ValueError):
        encode(code, [1])
    with pytest.raises(ValueError):
        encode(code, [1, 32])
    with pytest.raises(ValueError):
        decode_bounded(code, (0,) * 4, 1)
    with pytest.raises(ValueError):
        decode_bounded(code, (0,) * 5, 2)


@given(st.integers(0, 2**32 - 1))
def test_systematic_encoding(seed):
    rng = random.Random(seed)
    code = GabidulinCode(basis(7), 3)
    info = BinMatrix(7, 3, tuple(rng.getrandbits(3) for _ in range(7)))
    cw = encode_systematic(code, info)
    assert cw in code
    assert word_to_matrix(cw, code.basis).select_columns(range(3)) == info
    assert encode_systematic(code, word_to_matrix(cw, code.basis).select_columns(range(3))) == cw


def test_systematic_zero_info():
    code = GabidulinCode(basis(5), 2)
    assert encode_systematic(code, BinMatrix.zeros(5, 2)) == (0,) * 5


# ---------- rank weight and matrix views


def test_rank_weight_cases():
    b = basis(5)
    assert rank_weight(b.elements) == 5
    assert rank_weight((0,) * 5) == 0


@given(st.lists(st.integers(0, 127), min_size=7, max_size=7))
def test_rank_weight_is_basis_independent(word):
    b = basis(7)
    assert rank_weight(word) == word_to_matrix(word, b).rank() == oracles.word_rank(word, 7)
    assert matrix_to_word(word_to_matrix(word, b), b) == tuple(word)
    nb = find_normal_basis(GF2n(7))
    assert word_to_matrix(word, nb).rank() == rank_weight(word)


def test_pack_roundtrip():
    w = (3, 0, 31, 7, 1)
    assert unpack(5, pack(5, w), 5) == w


# ---------- distance


@pytest.mark.parametrize("nk", [(3, 1), (3, 2), (5, 2)])
def test_min_distance_matches_oracle(nk):
    n, k = nk
    code = GabidulinCode(basis(n), k)
    d = oracles.min_rank_distance(list(code.basis.elements), k, code.field.modulus)
    assert d == n - k + 1
    assert min_rank_distance_exhaustive(code) == d


def test_min_distance_parallel_split():
    code = GabidulinCode(basis(5), 3)
    assert min_rank_distance_exhaustive(code, workers=3) == 3


def test_min_distance_non_self_dual_basis():
    code = GabidulinCode(find_normal_basis(GF2n(4)), 2)
    assert min_rank_distance_exhaustive(code) == 3


def test_scan_limit():
    with pytest.raises(ValueError, match="limit"):
        min_rank_distance_exhaustive(GabidulinCode(basis(9), 3))


# ---------- duality


def test_dual_parameters():
    code = GabidulinCode(basis(5), 1)
    d = dual(code)
    assert (d.k, d.shift) == (4, 1)
    assert d.eval_basis[0] == code.field.square(code.basis.alpha)
    for r in range(1, 5):
        c = GabidulinCode(code.basis, r)
        assert dual(dual(c)) == c


def test_dual_inner_products_vanish_n5_r2():
    code = GabidulinCode(basis(5), 2)
    d = dual(code)
    assert len(code.generator_rows) * len(d.generator_rows) == 6
    for u in code.generator_rows:
        for v in d.generator_rows:
            assert inner(code.field, u, v) == 0


@pytest.mark.parametrize("n", [3, 5, 7])
def test_dual_is_full_orthogonal_complement(n):
    b = basis(n)
    for r in range(1, n):
        code, d = GabidulinCode(b, r), dual(GabidulinCode(b, r))
        gens = [pack(n, w) for w in code.f2_generators + d.f2_generators]
        lists = [[(g >> j) & 1 for j in range(n * n)] for g in gens]
        assert oracles.rank_lists(lists) == n * n
        for u in code.f2_generators:
            for v in d.f2_generators:
                assert inner(b.field, u, v) == 0


def test_dual_requires_self_dual_basis():
    with pytest.raises(UnsupportedParameter):
        dual(GabidulinCode(find_normal_basis(GF2n(4)), 2))
    with pytest.raises(UnsupportedParameter):
        dual(GabidulinCode(basis(3), 3))


# ---------- decoding


def test_decode_codeword_is_fixed_point():
    rng = random.Random(0)
    code = GabidulinCode(basis(7), 3)
    c = random_codeword(code, rng)
    for t in range(3):
        assert decode_bounded(code, c, t) == (c, (0,) * 7)
    assert decode_exhaustive(code, c) == (c, 0)


def test_decode_zero_radius_rejects_noncodeword():
    code = GabidulinCode(basis(5), 2)
    with pytest.raises(DecodingFailure):
        decode_bounded(code, (1, 0, 0, 0, 0), 0)


@pytest.mark.parametrize("nk", [(5, 2), (7, 3), (9, 3), (11, 5)])
def test_decode_planted_errors(nk):
    n, k = nk
    rng = random.Random(n * 100 + k)
    code = GabidulinCode(basis(n), k)
    radius = (n - k) // 2
    for trial in range(60):
        t = trial % (radius + 1)
        c = random_codeword(code, rng)
        e = tuple(oracles.random_rank_error(rng, n, n, t)) if t else (0,) * n
        cw, err = decode_bounded(code, add(c, e), radius)
        assert cw == c and err == e


def test_bounded_matches_exhaustive_on_rank_one_errors():
    rng = random.Random(11)
    code = GabidulinCode(basis(5), 2)
    for u in range(1, 32):
        for v in range(1, 32):
            e = tuple(u if (v >> j) & 1 else 0 for j in range(5))
            c = random_codeword(code, rng)
            r = add(c, e)
            cw, _ = decode_bounded(code, r, 1)
            assert decode_exhaustive(code, r) == (cw, 1)
            assert cw == c


def test_exhaustive_is_minimal_against_random_codewords():
    rng = random.Random(3)
    code = GabidulinCode(basis(5), 2)
    for _ in range(20):
        r = tuple(rng.randrange(32) for _ in range(5))
        c, d = decode_exhaustive(code, r)
        assert c in code and rank_weight(add(c, r)) == d
        for _ in range(100):
            assert rank_weight(add(random_codeword(code, rng), r)) >= d


def test_beyond_radius_never_returns_far_codeword():
    rng = random.Random(4)
    code = GabidulinCode(basis(7), 3)
    for _ in range(100):
        r = add(random_codeword(code, rng), oracles.random_rank_error(rng, 7, 7, 3))
        try:
            cw, err = decode_bounded(code, r, 2)
        except DecodingFailure:
            continue
        assert cw in code and rank_weight(err) <= 2 and add(cw, err) == r


# ---------- syndrome decoding


def _kernel_and_checks(n: int, k: int):
    code = GabidulinCode(basis(n), k)
    return code, dual(code).f2_generators


def test_syndrome_of_codeword_is_zero():
    rng = random.Random(8)
    code, checks = _kernel_and_checks(5, 3)
    for _ in range(20):
        assert syndrome(code.field, checks, random_codeword(code, rng)) == 0
    assert SyndromeDecoder(code, checks).decode(0) == (0,) * 5


def test_syndrome_decode_rank_one_n5():
    rng = random.Random(9)
    code, checks = _kernel_and_checks(5, 3)
    for _ in range(100):
        e = tuple(oracles.random_rank_error(rng, 5, 5, 1))
        assert syndrome_decode(code, checks, syndrome(code.field, checks, e)) == e


@pytest.mark.parametrize("nk", [(7, 3), (9, 5)])
def test_syndrome_decode_within_radius(nk):
    n, k = nk
    rng = random.Random(n)
    code, checks = _kernel_and_checks(n, k)
    dec = SyndromeDecoder(code, checks)
    for trial in range(80):
        t = trial % (dec.t_max + 1)
        e = tuple(oracles.random_rank_error(rng, n, n, t)) if t else (0,) * n
        syn = syndrome(code.field, checks, e)
        lifted = dec.lift(syn)
        assert syndrome(code.field, checks, lifted) == syn
        assert dec.decode(syn) == e


def test_syndrome_invalid_inputs():
    code, checks = _kernel_and_checks(5, 3)
    dec = SyndromeDecoder(code, checks)
    with pytest.raises(ValueError):
        dec.decode(1 << len(checks))
    # Repeating a check row makes the parity of that pair unattainable.
    dup = SyndromeDecoder(code, list(checks) + [checks[0]])
    with pytest.raises(InvalidSyndrome):
        dup.lift(1)
