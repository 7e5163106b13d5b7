"""Pauli frames, Clifford conjugation and the stacked-memory noise model.

Phases are dropped throughout.  A :class:`StackedError` on an ``l x n``
memory is stored column-wise: ``xcols[j]`` holds the X bits of cell ``j``
across layers (bit ``i`` = layer ``i``), likewise ``zcols``.  A gate acting on
cells updates whole columns at once, so every layer is conjugated in one step.
"""

from __future__ import annotations

import random
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .f2field import rank_of_rows
from .seeds import derive_seed

__all__ = [
    "GATE_ARITY",
    "Circuit",
    "CircuitFormatError",
    "CliffordGate",
    "StackedBoundReport",
    "PauliOp",
    "StackedError",
    "StackedNoiseModel",
    "StackedRun",
    "check_stacked_bound",
    "conjugate",
    "conjugate_circuit",
    "conjugate_stacked",
    "dump_circuit",
    "load_circuit",
    "parse_circuit",
    "push_faults_left",
    "random_circuit",
    "run_stacked",
    "sample_gate_fault",
    "stacked_rank",
]

GATE_ARITY = {"H": 1, "S": 1, "X": 1, "Y": 1, "Z": 1, "CNOT": 2, "CZ": 2, "SWAP": 2}
_LETTER = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {v: k for k, v in _LETTER.items()}


def _apply(kind: str, q: tuple[int, ...], xs: list[int], zs: list[int]) -> None:
    """Conjugate in place; entries of ``xs``/``zs`` may be bits or packed columns."""
    if kind == "CNOT":
        c, t = q
        xs[t] ^= xs[c]
        zs[c] ^= zs[t]
    elif kind == "H":
        a = q[0]
        xs[a], zs[a] = zs[a], xs[a]
    elif kind == "S":
        a = q[0]
        zs[a] ^= xs[a]
    elif kind == "CZ":
        a, b = q
        za = zs[a] ^ xs[b]
        zs[b] ^= xs[a]
        zs[a] = za
    elif kind == "SWAP":
        a, b = q
        xs[a], xs[b] = xs[b], xs[a]
        zs[a], zs[b] = zs[b], zs[a]
    # X, Y, Z only change the phase


@dataclass(frozen=True)
class PauliOp:
    """An ``width``-qubit Pauli; letter on qubit ``i`` from bit ``i`` of ``x`` and ``z``."""

    width: int
    x: int = 0
    z: int = 0

    def __post_init__(self) -> None:
        if self.x >> self.width or self.z >> self.width:
            raise ValueError(f"bit vectors exceed width {self.width}")

    @classmethod
    def from_string(cls, letters: str) -> PauliOp:
        x = z = 0
        for i, ch in enumerate(letters):
            try:
                bx, bz = _BITS[ch]
            except KeyError:
                raise ValueError(f"unknown Pauli letter {ch!r}") from None
            x |= bx << i
            z |= bz << i
        return cls(len(letters), x, z)

    def __str__(self) -> str:
        return "".join(_LETTER[(self.x >> i) & 1, (self.z >> i) & 1] for i in range(self.width))

    def __mul__(self, other: PauliOp) -> PauliOp:
        if self.width != other.width:
            raise ValueError("width mismatch")
        return PauliOp(self.width, self.x ^ other.x, self.z ^ other.z)

    def symplectic(self, other: PauliOp) -> int:
        """0 if the operators commute, 1 if they anticommute."""
        return ((self.x & other.z) ^ (self.z & other.x)).bit_count() & 1

    def is_identity(self) -> bool:
        return not (self.x or self.z)

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()


@dataclass(frozen=True)
class CliffordGate:
    kind: str
    qubits: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind not in GATE_ARITY:
            raise ValueError(f"unknown gate {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if len(self.qubits) != GATE_ARITY[self.kind]:
            raise ValueError(f"{self.kind} acts on {GATE_ARITY[self.kind]} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.kind} needs distinct qubits, got {self.qubits}")
        if min(self.qubits) < 0:
            raise ValueError("negative qubit index")

    def __str__(self) -> str:
        return " ".join([self.kind, *map(str, self.qubits)])


@dataclass(frozen=True)
class Circuit:
    width: int
    gates: tuple[CliffordGate, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.width:
                raise ValueError(f"gate {g} exceeds circuit width {self.width}")

    def __len__(self) -> int:
        return len(self.gates)

    def inverse(self) -> Circuit:
        # every gate in the set is its own inverse up to phase (S^dag acts like S on frames)
        return Circuit(self.width, self.gates[::-1])


def conjugate(g: CliffordGate, p: PauliOp) -> PauliOp:
    """``g p g^dag`` with the phase dropped."""
    if max(g.qubits) >= p.width:
        raise ValueError(f"gate {g} exceeds Pauli width {p.width}")
    xs = [(p.x >> i) & 1 for i in range(p.width)]
    zs = [(p.z >> i) & 1 for i in range(p.width)]
    _apply(g.kind, g.qubits, xs, zs)
    return PauliOp(p.width, sum(b << i for i, b in enumerate(xs)), sum(b << i for i, b in enumerate(zs)))


@dataclass(frozen=True)
class StackedError:
    """An ``layers x cells`` matrix of Pauli letters, stored by columns."""

    layers: int
    cells: int
    xcols: tuple[int, ...]
    zcols: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.xcols) != self.cells or len(self.zcols) != self.cells:
            raise ValueError(f"expected {self.cells} columns")
        lim = 1 << self.layers
        if any(c >= lim or c < 0 for c in self.xcols + self.zcols):
            raise ValueError(f"column exceeds {self.layers} layers")

    @classmethod
    def identity(cls, layers: int, cells: int) -> StackedError:
        return cls(layers, cells, (0,) * cells, (0,) * cells)

    @classmethod
    def from_rows(cls, rows: Sequence[PauliOp]) -> StackedError:
        if not rows:
            raise ValueError("need at least one layer")
        cells = rows[0].width
        xs, zs = [0] * cells, [0] * cells
        for i, row in enumerate(rows):
            if row.width != cells:
                raise ValueError("rows have different widths")
            for j in range(cells):
                xs[j] |= ((row.x >> j) & 1) << i
                zs[j] |= ((row.z >> j) & 1) << i
        return cls(len(rows), cells, tuple(xs), tuple(zs))

    @classmethod
    def from_strings(cls, rows: Sequence[str]) -> StackedError:
        return cls.from_rows([PauliOp.from_string(r) for r in rows])

    @classmethod
    def from_vector(cls, layers: int, cells: int, v: int) -> StackedError:
        """Inverse of :meth:`vector`."""
        mask = (1 << layers) - 1
        xs = tuple((v >> (j * layers)) & mask for j in range(cells))
        off = layers * cells
        zs = tuple((v >> (off + j * layers)) & mask for j in range(cells))
        return cls(layers, cells, xs, zs)

    @property
    def rows(self) -> list[PauliOp]:
        out = []
        for i in range(self.layers):
            x = sum(((c >> i) & 1) << j for j, c in enumerate(self.xcols))
            z = sum(((c >> i) & 1) << j for j, c in enumerate(self.zcols))
            out.append(PauliOp(self.cells, x, z))
        return out

    def __str__(self) -> str:
        return "\n".join(str(r) for r in self.rows)

    def _check(self, other: StackedError) -> None:
        if (self.layers, self.cells) != (other.layers, other.cells):
            raise ValueError("stacked errors have different shapes")

    def __mul__(self, other: StackedError) -> StackedError:
        self._check(other)
        return StackedError(
            self.layers,
            self.cells,
            tuple(a ^ b for a, b in zip(self.xcols, other.xcols)),
            tuple(a ^ b for a, b in zip(self.zcols, other.zcols)),
        )

    def symplectic(self, other: StackedError) -> int:
        self._check(other)
        acc = 0
        for xa, za, xb, zb in zip(self.xcols, self.zcols, other.xcols, other.zcols):
            acc ^= (xa & zb) ^ (za & xb)
        return acc.bit_count() & 1

    def vector(self) -> int:
        """Symplectic vector: X bits at ``j*layers + i``, Z bits offset by ``layers*cells``."""
        v = 0
        for j, c in enumerate(self.xcols):
            v |= c << (j * self.layers)
        off = self.layers * self.cells
        for j, c in enumerate(self.zcols):
            v |= c << (off + j * self.layers)
        return v

    def is_identity(self) -> bool:
        return not any(self.xcols) and not any(self.zcols)

    @property
    def weight(self) -> int:
        return sum((x | z).bit_count() for x, z in zip(self.xcols, self.zcols))

    def x_part(self) -> StackedError:
        return StackedError(self.layers, self.cells, self.xcols, (0,) * self.cells)

    def z_part(self) -> StackedError:
        return StackedError(self.layers, self.cells, (0,) * self.cells, self.zcols)

    def rank(self) -> int:
        return stacked_rank(self)


def stacked_rank(e: StackedError) -> int:
    """F2-dimension of the span of the layer rows (row rank = column rank)."""
    return rank_of_rows(e.xcols + e.zcols)


def conjugate_stacked(g: CliffordGate, e: StackedError) -> StackedError:
    """Conjugate every layer of ``e`` by ``g``."""
    if max(g.qubits) >= e.cells:
        raise ValueError(f"gate {g} exceeds {e.cells} cells")
    xs, zs = list(e.xcols), list(e.zcols)
    _apply(g.kind, g.qubits, xs, zs)
    return StackedError(e.layers, e.cells, tuple(xs), tuple(zs))


def conjugate_circuit(c: Circuit, e: StackedError) -> StackedError:
    """Push ``e`` through every gate of ``c`` in order."""
    if c.width != e.cells:
        raise ValueError(f"circuit width {c.width} != {e.cells} cells")
    xs, zs = list(e.xcols), list(e.zcols)
    for g in c.gates:
        _apply(g.kind, g.qubits, xs, zs)
    return StackedError(e.layers, e.cells, tuple(xs), tuple(zs))


# ---------- noise


@dataclass(frozen=True)
class StackedNoiseModel:
    p: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"fault probability must be in [0, 1], got {self.p}")


def _draw_fault(g: CliffordGate, layers: int, cells: int, rng: random.Random) -> StackedError:
    nbits = 2 * layers * len(g.qubits)
    v = 0
    while not v:
        v = rng.getrandbits(nbits)
    mask = (1 << layers) - 1
    xs, zs = [0] * cells, [0] * cells
    for k, q in enumerate(g.qubits):
        xs[q] = (v >> (2 * k * layers)) & mask
        zs[q] = (v >> ((2 * k + 1) * layers)) & mask
    return StackedError(layers, cells, tuple(xs), tuple(zs))


def sample_gate_fault(
    g: CliffordGate, layers: int, cells: int, p: float, rng: random.Random
) -> StackedError | None:
    """With probability ``p``, a uniform non-identity Pauli on the gate's cells."""
    if rng.random() >= p:
        return None
    return _draw_fault(g, layers, cells, rng)


@dataclass
class StackedRun:
    final: StackedError
    faults: list[tuple[int, StackedError]] = field(default_factory=list)

    @property
    def t(self) -> int:
        return len(self.faults)


def run_stacked(
    c: Circuit,
    layers: int,
    model: StackedNoiseModel,
    forced: Iterable[int] | None = None,
) -> StackedRun:
    """Propagate a Pauli frame through the stacked implementation of ``c``.

    After each gate the accumulated error is conjugated by it and any fault is
    multiplied in.  With ``forced`` given, faults occur exactly after those
    gate indices (and ``model.p`` is ignored).
    """
    rng = random.Random(model.seed)
    n = c.width
    xs, zs = [0] * n, [0] * n
    faults = []
    forced_set = None if forced is None else set(forced)
    p = model.p
    for idx, g in enumerate(c.gates):
        _apply(g.kind, g.qubits, xs, zs)
        if forced_set is None:
            if rng.random() >= p:
                continue
        elif idx not in forced_set:
            continue
        fault = _draw_fault(g, layers, n, rng)
        for q in g.qubits:
            xs[q] ^= fault.xcols[q]
            zs[q] ^= fault.zcols[q]
        faults.append((idx, fault))
    return StackedRun(StackedError(layers, n, tuple(xs), tuple(zs)), faults)


def push_faults_left(c: Circuit, layers: int, faults: Sequence[tuple[int, StackedError]]) -> StackedError:
    """Product of each fault conjugated by the gates after it (computed one fault at a time)."""
    total = StackedError.identity(layers, c.width)
    for idx, fault in faults:
        moved = fault
        for g in c.gates[idx + 1 :]:
            moved = conjugate_stacked(g, moved)
        total = total * moved
    return total


def random_circuit(n: int, s: int, rng: random.Random, kinds: Sequence[str] = tuple(GATE_ARITY)) -> Circuit:
    if n < 1:
        raise ValueError("circuit needs at least one qubit")
    kinds = [k for k in kinds if GATE_ARITY[k] <= n]
    gates = []
    for _ in range(s):
        kind = rng.choice(kinds)
        gates.append(CliffordGate(kind, tuple(rng.sample(range(n), GATE_ARITY[kind]))))
    return Circuit(n, tuple(gates))


@dataclass
class StackedBoundReport:
    rows: list[dict[str, int]]

    @property
    def violations(self) -> int:
        return sum(r["rank"] > r["bound"] for r in self.rows)

    @property
    def subadditivity_violations(self) -> int:
        return sum(r["rank"] > r["fault_rank_sum"] for r in self.rows)

    @property
    def max_excess(self) -> int:
        return max((r["rank"] - r["bound"] for r in self.rows), default=0)


def stacked_bound_trial(seed: int, p: float, max_n: int = 16, max_s: int = 200) -> dict[str, int]:
    """One random circuit with ``layers = n`` under stacked noise."""
    rng = random.Random(seed)
    n = rng.randint(2, max_n)
    s = rng.randint(1, max_s)
    circuit = random_circuit(n, s, rng)
    run = run_stacked(circuit, n, StackedNoiseModel(p, rng.getrandbits(63)))
    return {
        "seed": seed,
        "n": n,
        "s": s,
        "t": run.t,
        "rank": stacked_rank(run.final),
        "bound": 4 * run.t,
        "fault_rank_sum": sum(stacked_rank(f) for _, f in run.faults),
    }


def check_stacked_bound(trials: int, seed: int, p: float, max_n: int = 16, max_s: int = 200) -> StackedBoundReport:
    rows = []
    for trial in range(trials):
        row = stacked_bound_trial(derive_seed(seed, "stacked-bound", trial), p, max_n, max_s)
        rows.append({"trial": trial, **row})
    return StackedBoundReport(rows)


# ---------- text format


class CircuitFormatError(ValueError):
    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def parse_circuit(text: str) -> Circuit:
    """Parse ``n <width>`` followed by one gate per line (``H 3``, ``CNOT 0 4``, ...)."""
    width = None
    gates = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if width is None:
            if tok[0] != "n" or len(tok) != 2 or not tok[1].isdigit() or int(tok[1]) < 1:
                raise CircuitFormatError(lineno, "circuit must start with 'n <width>'")
            width = int(tok[1])
            continue
        kind = tok[0].upper()
        if kind not in GATE_ARITY:
            raise CircuitFormatError(lineno, f"unknown gate {tok[0]!r}")
        if not all(t.isdigit() for t in tok[1:]):
            raise CircuitFormatError(lineno, "qubit indices must be non-negative integers")
        qubits = tuple(int(t) for t in tok[1:])
        try:
            gate = CliffordGate(kind, qubits)
        except ValueError as exc:
            raise CircuitFormatError(lineno, str(exc)) from None
        if max(qubits) >= width:
            raise CircuitFormatError(lineno, f"qubit index out of range for width {width}")
        gates.append(gate)
    if width is None:
        raise CircuitFormatError(0, "empty circuit file")
    return Circuit(width, tuple(gates))


def load_circuit(path: str | Path) -> Circuit:
    return parse_circuit(Path(path).read_text())


def dump_circuit(c: Circuit) -> str:
    return "\n".join([f"n {c.width}", *map(str, c.gates)]) + "\n"
