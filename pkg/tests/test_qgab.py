from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from rankqec.f2field import GF2n, NormalBasis, UnsupportedParameter, find_normal_basis, find_self_dual_normal_basis
from rankqec.gabidulin import GabidulinCode, encode, inner
from rankqec.pauli import Circuit, StackedError, StackedNoiseModel, random_circuit
from rankqec.qgab import (
    QuantumGabidulinCode,
    SideDecodingFailure,
    Syndrome,
    build,
    commutes,
    conjugate_code,
    e2e_correct,
    e2e_trial,
    standard_code,
    x_error,
    z_error,
)

# Exhaustive scan over the 2^12-element centralizer, frozen.
DISTANCE_3_1_1 = 2


def basis(n: int) -> NormalBasis:
    return find_self_dual_normal_basis(GF2n(n))


def single_qubit(n: int, layer: int, cell: int, letter: str) -> StackedError:
    rows = ["I" * n] * n
    rows[layer] = "I" * cell + letter + "I" * (n - cell - 1)
    return StackedError.from_strings(rows)


def random_rank_stacked(rng: random.Random, n: int, t: int) -> StackedError:
    """Stacked error whose X and Z parts each have rank <= t."""
    xs = oracles.random_rank_error(rng, n, n, t) if t else [0] * n
    zs = oracles.random_rank_error(rng, n, n, t) if t else [0] * n
    return StackedError(n, n, tuple(xs), tuple(zs))


# ---------- construction


def test_small_code_shape():
    code = build(basis(3), 1, 1)
    assert code.num_qubits == 9
    assert (len(code.x_generators), len(code.z_generators)) == (3, 3)
    assert code.pairwise_commuting()


def test_n5_code_shape():
    code = standard_code(5, 2, 2)
    assert code.num_qubits == 25
    assert (len(code.x_generators), len(code.z_generators)) == (10, 10)


@pytest.mark.parametrize("rs", [(2, 3), (3, 2), (5, 0), (0, 5)])
def test_rate_constraint(rs):
    with pytest.raises(UnsupportedParameter):
        QuantumGabidulinCode(basis(5), *rs)


def test_requires_self_dual_basis():
    with pytest.raises(UnsupportedParameter):
        QuantumGabidulinCode(find_normal_basis(GF2n(6)), 1, 1)


@pytest.mark.parametrize("nr, k", [((3, 1), 3), ((5, 1), 15), ((5, 2), 5), ((7, 3), 7)])
def test_logical_count(nr, k):
    n, r = nr
    code = standard_code(n, r, r)
    assert code.logical_count() == k == n * (n - 2 * r)
    width = 2 * n * n
    rows = [[(g.vector() >> j) & 1 for j in range(width)] for g in code.generators]
    assert n * n - oracles.rank_lists(rows) == k


def test_asymmetric_logical_count():
    code = standard_code(7, 2, 3)
    assert code.logical_count() == 49 - 7 * 5
    assert code.pairwise_commuting()


# ---------- commutation


def test_commutation_trivial_cases():
    b = basis(5)
    assert commutes(b, b.elements, (0,) * 5)
    e1 = (b.alpha, 0, 0, 0, 0)
    assert not commutes(b, e1, e1)
    assert inner(b.field, b.elements, b.elements) == 1


@settings(max_examples=200)
@given(st.sampled_from([3, 5, 7]), st.integers(0, 2**32 - 1))
def test_symplectic_matches_trace_inner_product(n, seed):
    rng = random.Random(seed)
    b = basis(n)
    beta = [rng.randrange(1 << n) for _ in range(n)]
    gamma = [rng.randrange(1 << n) for _ in range(n)]
    symp = x_error(b, beta).symplectic(z_error(b, gamma))
    assert symp == inner(b.field, beta, gamma)
    assert commutes(b, beta, gamma) == (symp == 0)


# ---------- syndromes and stabilizers


def test_syndrome_of_identity_and_stabilizers():
    rng = random.Random(1)
    code = standard_code(5, 2, 2)
    assert code.syndrome(StackedError.identity(5, 5)).is_trivial()
    for _ in range(20):
        e = StackedError.identity(5, 5)
        for g in rng.sample(code.generators, 3):
            e = e * g
        assert code.syndrome(e).is_trivial()
        assert code.is_stabilizer(e)
    assert code.is_stabilizer(StackedError.identity(5, 5))


def test_css_containment():
    code = standard_code(7, 3, 3)
    for g in code.x_generators:
        assert code.syndrome(g).is_trivial()
    gab = GabidulinCode(code.basis, 3)
    rng = random.Random(2)
    for _ in range(20):
        beta = encode(gab, [rng.randrange(128) for _ in range(3)])
        assert code.syndrome(x_error(code.basis, beta)).is_trivial()


def test_single_qubit_errors_detected_n3():
    code = standard_code(3, 1, 1)
    for layer in range(3):
        for cell in range(3):
            for letter in "XYZ":
                e = single_qubit(3, layer, cell, letter)
                assert not code.syndrome(e).is_trivial()
                assert not code.is_stabilizer(e)


def test_syndrome_shape_check():
    with pytest.raises(ValueError):
        standard_code(3, 1, 1).syndrome(StackedError.identity(2, 3))
    assert Syndrome(0b101, 0b1).weight == 3


# ---------- distance


def test_distance_3_1_1():
    code = standard_code(3, 1, 1)
    assert len(code.centralizer_basis()) == 12
    d = code.min_rank_distance_exhaustive()
    assert d == DISTANCE_3_1_1
    assert d >= code.r + 1


def test_distance_is_a_true_minimum():
    code = standard_code(3, 1, 1)
    d = code.min_rank_distance_exhaustive()
    basis_vecs = code.centralizer_basis()
    ranks = []
    for mask in range(1, 1 << len(basis_vecs)):
        v = 0
        for i, b in enumerate(basis_vecs):
            if (mask >> i) & 1:
                v ^= b
        e = StackedError.from_vector(3, 3, v)
        assert code.syndrome(e).is_trivial()
        if not code.is_stabilizer(e):
            ranks.append(e.rank())
    assert min(ranks) == d


# ---------- decoding


def test_zero_syndrome_gives_identity():
    code = standard_code(5, 2, 2)
    assert code.decode(Syndrome(0, 0)).is_identity()


def test_pure_x_errors_recovered():
    rng = random.Random(3)
    code = standard_code(5, 2, 2)
    for _ in range(200):
        e = StackedError(5, 5, tuple(oracles.random_rank_error(rng, 5, 5, 1)), (0,) * 5)
        assert code.decode(code.syndrome(e)) == e


@pytest.mark.parametrize("nr", [(5, 2), (7, 2), (9, 4)])
def test_mixed_errors_recovered(nr):
    n, r = nr
    rng = random.Random(n)
    code = standard_code(n, r, r)
    for trial in range(60):
        t = trial % (r // 2 + 1)
        e = random_rank_stacked(rng, n, t)
        assert code.decode(code.syndrome(e)) == e


def test_side_failure_is_reported():
    code = standard_code(7, 2, 2)
    rng = random.Random(4)
    failures = 0
    for _ in range(60):
        e = random_rank_stacked(rng, 7, 3)
        try:
            corr = code.decode(code.syndrome(e))
        except SideDecodingFailure as exc:
            assert exc.side in ("X", "Z")
            failures += 1
            continue
        assert code.syndrome(corr) == code.syndrome(e)
    assert failures > 0


# ---------- conjugated codes


def test_empty_circuit_leaves_code_unchanged():
    code = standard_code(5, 2, 2)
    conj = conjugate_code(code, Circuit(5, ()))
    assert conj.generators == code.generators


def test_conjugated_generators_commute_and_match_direct_conjugation():
    from rankqec.pauli import conjugate_circuit

    code = standard_code(5, 2, 2)
    c = random_circuit(5, 40, random.Random(5))
    conj = conjugate_code(code, c)
    assert conj.pairwise_commuting()
    assert conj.generators == tuple(conjugate_circuit(c, g) for g in code.generators)
    assert conj.logical_count() == code.logical_count()


def test_conjugation_preserves_distance_3_1_1():
    code = standard_code(3, 1, 1)
    c = random_circuit(3, 20, random.Random(6))
    assert conjugate_code(code, c).min_rank_distance_exhaustive() == code.min_rank_distance_exhaustive()


# ---------- end to end


def test_e2e_without_faults():
    out = e2e_trial(1, 9, 4, 40, 0)
    assert out.t == 0 and out.rank == 0 and out.success and out.exact and out.syndrome_weight == 0


def test_e2e_requires_symmetric_code():
    with pytest.raises(UnsupportedParameter):
        e2e_correct(standard_code(7, 2, 3), random_circuit(7, 5, random.Random(0)), StackedNoiseModel(0.0))


def test_e2e_single_fault_n17():
    for seed in range(8):
        out = e2e_trial(seed, 17, 8, 100, 1)
        assert out.t == 1
        assert out.pullback_ok and out.success and out.exact
        assert 1 <= out.rank <= 4


def test_e2e_pullback_holds_beyond_bound():
    fails = 0
    for seed in range(6):
        out = e2e_trial(seed, 9, 4, 60, 8)
        assert out.pullback_ok
        if not out.success:
            fails += 1
        if out.x_fail or out.z_fail:
            assert not out.success
    assert fails > 0


def test_e2e_random_faults_are_seeded():
    assert e2e_trial(3, 9, 4, 50, None, 0.05) == e2e_trial(3, 9, 4, 50, None, 0.05)
