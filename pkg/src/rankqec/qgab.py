"""Quantum Gabidulin codes on an ``n x n`` stacked memory.

``QGab(alpha, r, s)`` is the CSS code with X stabilizers ``X(beta)`` for
``beta`` in ``Gab(alpha, r)`` and Z stabilizers ``Z(gamma)`` for ``gamma`` in
``Gab(alpha^(2^r), s)``.  A vector ``beta`` of GF(2^n)^n becomes a stacked
Pauli by writing ``beta_j`` in the self-dual basis as the column of cell ``j``.
"""

from __future__ import annotations

import random
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property, lru_cache

from .f2field import (
    BinMatrix,
    F2Span,
    GF2n,
    NormalBasis,
    UnsupportedParameter,
    find_self_dual_normal_basis,
    rank_of_rows,
    solve,
)
from .gabidulin import DecodingFailure, GabidulinCode, SyndromeDecoder, inner
from .pauli import (
    Circuit,
    StackedError,
    StackedNoiseModel,
    conjugate_circuit,
    random_circuit,
    run_stacked,
)

__all__ = [
    "ConjugatedCode",
    "E2EOutcome",
    "QuantumGabidulinCode",
    "SideDecodingFailure",
    "StabilizerCode",
    "Syndrome",
    "build",
    "commutes",
    "conjugate_code",
    "e2e_correct",
    "e2e_trial",
    "standard_code",
    "x_error",
    "z_error",
]

# 2^24 centralizer elements is the largest exhaustive scan we agree to run.
CENTRALIZER_LIMIT_BITS = 24


class SideDecodingFailure(DecodingFailure):
    def __init__(self, side: str, message: str) -> None:
        super().__init__(f"{side}-side decoding failed: {message}")
        self.side = side


@dataclass(frozen=True)
class Syndrome:
    """``x_syndrome`` bit ``g`` pairs with Z generator ``g``; ``z_syndrome`` with X generator ``g``."""

    x_syndrome: int
    z_syndrome: int

    @property
    def weight(self) -> int:
        return self.x_syndrome.bit_count() + self.z_syndrome.bit_count()

    def is_trivial(self) -> bool:
        return not (self.x_syndrome or self.z_syndrome)


def x_error(basis: NormalBasis, beta: Sequence[int]) -> StackedError:
    """``X(beta)``: cell ``j`` carries the coordinates of ``beta_j``."""
    n = basis.n
    return StackedError(n, len(beta), tuple(basis.element_to_column(b) for b in beta), (0,) * len(beta))


def z_error(basis: NormalBasis, gamma: Sequence[int]) -> StackedError:
    n = basis.n
    return StackedError(n, len(gamma), (0,) * len(gamma), tuple(basis.element_to_column(g) for g in gamma))


class StabilizerCode:
    """A stabilizer group on a stacked memory, split into X-like and Z-like generators."""

    def __init__(
        self,
        layers: int,
        cells: int,
        x_generators: Sequence[StackedError],
        z_generators: Sequence[StackedError],
    ) -> None:
        self.layers = layers
        self.cells = cells
        self.x_generators = tuple(x_generators)
        self.z_generators = tuple(z_generators)

    @property
    def generators(self) -> tuple[StackedError, ...]:
        return self.x_generators + self.z_generators

    @property
    def num_qubits(self) -> int:
        return self.layers * self.cells

    @cached_property
    def _span(self) -> F2Span:
        return F2Span(g.vector() for g in self.generators)

    def generator_rank(self) -> int:
        return rank_of_rows([g.vector() for g in self.generators])

    def logical_count(self) -> int:
        """``num_qubits`` minus the number of independent generators."""
        return self.num_qubits - self.generator_rank()

    def syndrome(self, e: StackedError) -> Syndrome:
        xs = sum(g.symplectic(e) << i for i, g in enumerate(self.z_generators))
        zs = sum(g.symplectic(e) << i for i, g in enumerate(self.x_generators))
        return Syndrome(xs, zs)

    def is_stabilizer(self, e: StackedError) -> bool:
        return e.vector() in self._span

    def pairwise_commuting(self) -> bool:
        gens = self.generators
        return all(a.symplectic(b) == 0 for i, a in enumerate(gens) for b in gens[i + 1 :])

    def centralizer_basis(self) -> list[int]:
        """Symplectic vectors spanning the Paulis that commute with every generator."""
        half = self.num_qubits
        mask = (1 << half) - 1
        # <v, g> = parity(v & swap(g)), swap exchanging the X and Z halves
        rows = tuple((v >> half) | ((v & mask) << half) for v in (g.vector() for g in self.generators))
        _, kernel = solve(BinMatrix(len(rows), 2 * half, rows), 0)
        return kernel

    def min_rank_distance_exhaustive(self) -> int:
        """Minimum stacked rank over centralizer elements that are not stabilizers."""
        basis = self.centralizer_basis()
        if len(basis) > CENTRALIZER_LIMIT_BITS:
            raise ValueError(
                f"centralizer has 2^{len(basis)} = {1 << len(basis)} elements, above the "
                f"2^{CENTRALIZER_LIMIT_BITS} limit"
            )
        best = None
        v = 0
        span = self._span
        for i in range(1, 1 << len(basis)):
            v ^= basis[(i & -i).bit_length() - 1]
            if v in span:
                continue
            rk = StackedError.from_vector(self.layers, self.cells, v).rank()
            if best is None or rk < best:
                best = rk
        if best is None:
            raise ValueError("the code encodes no logical qubits")
        return best


class QuantumGabidulinCode(StabilizerCode):
    """``QGab(alpha, r, s)`` on ``n^2`` qubits (``n`` layers of ``n`` cells)."""

    def __init__(self, basis: NormalBasis, r: int, s: int) -> None:
        n = basis.n
        if not basis.self_dual:
            raise UnsupportedParameter("quantum Gabidulin codes need a self-dual normal basis")
        if r < 0 or s < 0 or r + s >= n:
            raise UnsupportedParameter(f"need r, s >= 0 and r + s < n, got r={r}, s={s}, n={n}")
        self.basis = basis
        self.r = r
        self.s = s
        self.x_vectors = GabidulinCode(basis, r).f2_generators if r else ()
        self.z_vectors = GabidulinCode(basis, s, r).f2_generators if s else ()
        super().__init__(
            n,
            n,
            [x_error(basis, b) for b in self.x_vectors],
            [z_error(basis, g) for g in self.z_vectors],
        )

    @property
    def n(self) -> int:
        return self.basis.n

    def __repr__(self) -> str:
        return f"QGab(n={self.n}, r={self.r}, s={self.s})"

    @cached_property
    def x_kernel_code(self) -> GabidulinCode:
        """X errors with trivial syndrome: the dual of ``Gab(alpha^(2^r), s)``."""
        return GabidulinCode(self.basis, self.n - self.s, self.r + self.s)

    @cached_property
    def z_kernel_code(self) -> GabidulinCode:
        """Z errors with trivial syndrome: the dual of ``Gab(alpha, r)``."""
        return GabidulinCode(self.basis, self.n - self.r, self.r)

    @cached_property
    def _x_decoder(self) -> SyndromeDecoder:
        return SyndromeDecoder(self.x_kernel_code, self.z_vectors)

    @cached_property
    def _z_decoder(self) -> SyndromeDecoder:
        return SyndromeDecoder(self.z_kernel_code, self.x_vectors)

    def syndrome(self, e: StackedError) -> Syndrome:
        if (e.layers, e.cells) != (self.n, self.n):
            raise ValueError(f"expected a {self.n}x{self.n} stacked error")
        return super().syndrome(e)

    def decode_x(self, x_syndrome: int) -> tuple[int, ...]:
        """X-content correction (cell columns) from the Z-generator syndrome bits."""
        try:
            word = self._x_decoder.decode(x_syndrome)
        except DecodingFailure as exc:
            raise SideDecodingFailure("X", str(exc)) from None
        return tuple(self.basis.element_to_column(a) for a in word)

    def decode_z(self, z_syndrome: int) -> tuple[int, ...]:
        try:
            word = self._z_decoder.decode(z_syndrome)
        except DecodingFailure as exc:
            raise SideDecodingFailure("Z", str(exc)) from None
        return tuple(self.basis.element_to_column(a) for a in word)

    def decode(self, syn: Syndrome) -> StackedError:
        """Minimum-rank correction, decoding the X and Z content separately.

        Exact whenever the X part has rank at most ``s // 2`` and the Z part at
        most ``r // 2``.
        """
        return StackedError(self.n, self.n, self.decode_x(syn.x_syndrome), self.decode_z(syn.z_syndrome))


def build(basis: NormalBasis, r: int, s: int) -> QuantumGabidulinCode:
    """Construct ``QGab(alpha, r, s)`` and verify that its generators commute."""
    code = QuantumGabidulinCode(basis, r, s)
    for b in code.x_vectors:
        for g in code.z_vectors:
            commutes(basis, b, g)
    if not code.pairwise_commuting():
        raise AssertionError("quantum Gabidulin generators fail to commute")
    return code


@lru_cache(maxsize=16)
def standard_code(n: int, r: int, s: int) -> QuantumGabidulinCode:
    """``QGab`` over the lowest self-dual normal basis of GF(2^n) with its default modulus."""
    return build(find_self_dual_normal_basis(GF2n(n)), r, s)


def commutes(basis: NormalBasis, beta: Sequence[int], gamma: Sequence[int]) -> bool:
    """Whether ``X(beta)`` and ``Z(gamma)`` commute, computed two independent ways."""
    symp = x_error(basis, beta).symplectic(z_error(basis, gamma))
    ip = inner(basis.field, beta, gamma)
    if symp != ip:
        raise RuntimeError(f"symplectic product {symp} disagrees with trace inner product {ip}")
    return symp == 0


class ConjugatedCode(StabilizerCode):
    """The code obtained by conjugating every layer of every generator by a circuit."""

    def __init__(self, base: StabilizerCode, circuit: Circuit) -> None:
        if circuit.width != base.cells:
            raise ValueError(f"circuit width {circuit.width} != {base.cells} cells")
        self.base = base
        self.circuit = circuit
        gens = base.generators
        ell = base.layers
        # all generators as one tall stacked error, conjugated in a single pass
        xs = [0] * base.cells
        zs = [0] * base.cells
        for k, g in enumerate(gens):
            for j in range(base.cells):
                xs[j] |= g.xcols[j] << (k * ell)
                zs[j] |= g.zcols[j] << (k * ell)
        tall = conjugate_circuit(circuit, StackedError(ell * len(gens), base.cells, tuple(xs), tuple(zs)))
        mask = (1 << ell) - 1
        moved = [
            StackedError(
                ell,
                base.cells,
                tuple((c >> (k * ell)) & mask for c in tall.xcols),
                tuple((c >> (k * ell)) & mask for c in tall.zcols),
            )
            for k in range(len(gens))
        ]
        nx = len(base.x_generators)
        super().__init__(ell, base.cells, moved[:nx], moved[nx:])


def conjugate_code(code: StabilizerCode, circuit: Circuit) -> ConjugatedCode:
    return ConjugatedCode(code, circuit)


@dataclass(frozen=True)
class E2EOutcome:
    t: int
    rank: int
    syndrome_weight: int
    success: bool
    x_fail: bool
    z_fail: bool
    pullback_ok: bool
    exact: bool


def e2e_correct(
    code: QuantumGabidulinCode,
    circuit: Circuit,
    model: StackedNoiseModel,
    faults: int | None = None,
) -> E2EOutcome:
    """Run the stacked circuit, measure the output code's syndrome, decode, and check.

    With ``faults`` given, exactly that many faults are injected after
    uniformly chosen distinct gates (seeded by ``model.seed``); otherwise each
    gate faults with probability ``model.p``.  Decoding happens in the input
    code's frame: the syndrome under the conjugated generators equals the
    syndrome of the pulled-back error under the original ones.
    """
    if code.r != code.s:
        raise UnsupportedParameter("the end-to-end protocol is defined for s = r")
    forced = None
    if faults is not None:
        if faults > len(circuit):
            raise ValueError(f"cannot place {faults} faults in {len(circuit)} gates")
        forced = random.Random(model.seed).sample(range(len(circuit)), faults)
    run = run_stacked(circuit, code.n, model, forced)
    Q = run.final
    out_code = conjugate_code(code, circuit)
    syn = out_code.syndrome(Q)
    pulled = conjugate_circuit(circuit.inverse(), Q)
    pullback_ok = code.syndrome(pulled) == syn
    x_fail = z_fail = False
    xcols = zcols = (0,) * code.n
    try:
        xcols = code.decode_x(syn.x_syndrome)
    except SideDecodingFailure:
        x_fail = True
    try:
        zcols = code.decode_z(syn.z_syndrome)
    except SideDecodingFailure:
        z_fail = True
    correction = StackedError(code.n, code.n, xcols, zcols)
    pushed = conjugate_circuit(circuit, correction)
    success = not (x_fail or z_fail) and out_code.is_stabilizer(pushed * Q)
    return E2EOutcome(
        t=run.t,
        rank=Q.rank(),
        syndrome_weight=syn.weight,
        success=success,
        x_fail=x_fail,
        z_fail=z_fail,
        pullback_ok=pullback_ok,
        exact=pushed == Q,
    )


def e2e_trial(seed: int, n: int, r: int, gates: int, faults: int | None, p: float = 0.0) -> E2EOutcome:
    """One end-to-end trial on a fresh random circuit of ``gates`` gates."""
    rng = random.Random(seed)
    circuit = random_circuit(n, gates, rng)
    return e2e_correct(standard_code(n, r, r), circuit, StackedNoiseModel(p, rng.getrandbits(63)), faults)
