"""Linear network coding over F2 with faulty edges.

A :class:`Network` is a DAG whose vertices forward F2-linear combinations of
their incoming bits; with ``n`` inputs and ``n`` outputs it computes
``x -> A x``.  Simulation is bit-sliced: every wire carries an ``m``-bit int,
bit ``c`` belonging to transmitted column ``c``.

Text format (one item per line, ``#`` starts a comment)::

    vertex <id> <input|inner|output>
    edge <id> <src> <dst> <form-bits>
    outmap <vertex> <bits>

Inputs and outputs are ordered by declaration; form bit ``k`` weights the
``k``-th incoming edge of the source vertex, incoming edges being ordered by
declaration.
"""

from __future__ import annotations

import random
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from graphlib import CycleError, TopologicalSorter
from pathlib import Path

from .f2field import BinMatrix, UnsupportedParameter
from .gabidulin import GabidulinCode, decode_bounded, encode_systematic, matrix_to_word, word_to_matrix
from .seeds import derive_seed

__all__ = [
    "Edge",
    "FaultPlan",
    "InvalidNetwork",
    "RankBoundReport",
    "Network",
    "NetworkFormatError",
    "TransmissionRecord",
    "check_rank_bound",
    "dump_network",
    "fault_contributions",
    "load_network",
    "parse_network",
    "processing_matrices",
    "protocol_receive",
    "protocol_send",
    "random_layered_network",
    "random_invertible_network",
    "sample_faulty_edges",
    "transfer_matrix",
    "transmit",
]

KINDS = ("input", "inner", "output")


class InvalidNetwork(ValueError):
    pass


class NetworkFormatError(ValueError):
    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Edge:
    id: str
    src: str
    dst: str
    form: tuple[int, ...]


@dataclass(frozen=True)
class Network:
    vertices: Mapping[str, str]
    edges: tuple[Edge, ...]
    outmaps: Mapping[str, tuple[int, ...]]

    def __post_init__(self) -> None:
        for v, kind in self.vertices.items():
            if kind not in KINDS:
                raise InvalidNetwork(f"vertex {v!r} has unknown kind {kind!r}")
        ids = set()
        for e in self.edges:
            if e.id in ids:
                raise InvalidNetwork(f"duplicate edge id {e.id!r}")
            ids.add(e.id)
            for end in (e.src, e.dst):
                if end not in self.vertices:
                    raise InvalidNetwork(f"edge {e.id!r} references unknown vertex {end!r}")
            if self.vertices[e.dst] == "input":
                raise InvalidNetwork(f"edge {e.id!r} enters input vertex {e.dst!r}")
            if self.vertices[e.src] == "output":
                raise InvalidNetwork(f"edge {e.id!r} leaves output vertex {e.src!r}")
            if len(e.form) != self.arity(e.src):
                raise InvalidNetwork(
                    f"edge {e.id!r}: form has {len(e.form)} bits, source arity is {self.arity(e.src)}"
                )
        if len(self.inputs) != len(self.outputs):
            raise InvalidNetwork(f"{len(self.inputs)} inputs but {len(self.outputs)} outputs")
        for v in self.outputs:
            if v not in self.outmaps:
                raise InvalidNetwork(f"output vertex {v!r} has no outmap")
            if len(self.outmaps[v]) != self.arity(v):
                raise InvalidNetwork(f"outmap of {v!r} has wrong length")
        for v in self.outmaps:
            if self.vertices.get(v) != "output":
                raise InvalidNetwork(f"outmap given for non-output vertex {v!r}")
        for v, kind in self.vertices.items():
            if kind == "inner" and not (self.incoming[v] and self.outgoing[v]):
                raise InvalidNetwork(f"inner vertex {v!r} needs incoming and outgoing edges")
        self.order  # noqa: B018 - validates acyclicity

    @cached_property
    def inputs(self) -> tuple[str, ...]:
        return tuple(v for v, k in self.vertices.items() if k == "input")

    @cached_property
    def outputs(self) -> tuple[str, ...]:
        return tuple(v for v, k in self.vertices.items() if k == "output")

    @property
    def n(self) -> int:
        return len(self.inputs)

    @cached_property
    def incoming(self) -> dict[str, tuple[Edge, ...]]:
        out: dict[str, list[Edge]] = {v: [] for v in self.vertices}
        for e in self.edges:
            out[e.dst].append(e)
        return {v: tuple(es) for v, es in out.items()}

    @cached_property
    def outgoing(self) -> dict[str, tuple[Edge, ...]]:
        out: dict[str, list[Edge]] = {v: [] for v in self.vertices}
        for e in self.edges:
            out[e.src].append(e)
        return {v: tuple(es) for v, es in out.items()}

    def arity(self, v: str) -> int:
        """``delta`` of the linear forms leaving ``v``."""
        return 1 if self.vertices[v] == "input" else len(self.incoming[v])

    @cached_property
    def order(self) -> tuple[str, ...]:
        ts: TopologicalSorter[str] = TopologicalSorter()
        for v in self.vertices:
            ts.add(v, *(e.src for e in self.incoming[v]))
        try:
            return tuple(ts.static_order())
        except CycleError as exc:
            raise InvalidNetwork(f"network has a cycle: {exc.args[1]}") from None

    @cached_property
    def edge_index(self) -> dict[str, int]:
        return {e.id: i for i, e in enumerate(self.edges)}


def _combine(form: Sequence[int], values: Sequence[int]) -> int:
    acc = 0
    for bit, v in zip(form, values):
        if bit:
            acc ^= v
    return acc


def _propagate(net: Network, x_rows: Sequence[int], flips: Mapping[str, int]) -> list[int]:
    """Bit-sliced simulation; ``x_rows[i]`` carries input ``i`` for every column."""
    wire: dict[str, int] = {}
    inputs = dict(zip(net.inputs, x_rows))
    outs: dict[str, int] = {}
    for v in net.order:
        kind = net.vertices[v]
        received = [inputs[v]] if kind == "input" else [wire[e.id] for e in net.incoming[v]]
        if kind == "output":
            outs[v] = _combine(net.outmaps[v], received)
            continue
        for e in net.outgoing[v]:
            wire[e.id] = _combine(e.form, received) ^ flips.get(e.id, 0)
    return [outs[v] for v in net.outputs]


def transfer_matrix(net: Network) -> BinMatrix:
    """``A`` such that fault-free transmission maps ``x`` to ``A x``."""
    n = net.n
    rows = _propagate(net, [1 << i for i in range(n)], {})
    return BinMatrix(n, n, tuple(rows))


def processing_matrices(net: Network) -> tuple[list[BinMatrix], BinMatrix, BinMatrix]:
    """Per-vertex processing as matrices on the state ``(inputs, edges, outputs)``.

    Returns ``(steps, embed, project)`` with
    ``transfer_matrix(net) == project @ steps[-1] @ ... @ steps[0] @ embed``.
    """
    n, ne = net.n, len(net.edges)
    size = n + ne + n
    in_pos = {v: i for i, v in enumerate(net.inputs)}
    out_pos = {v: n + ne + i for i, v in enumerate(net.outputs)}
    edge_pos = {e.id: n + i for i, e in enumerate(net.edges)}
    steps = []
    for v in net.order:
        rows = [1 << i for i in range(size)]
        kind = net.vertices[v]
        src = [in_pos[v]] if kind == "input" else [edge_pos[e.id] for e in net.incoming[v]]
        targets = (
            [(out_pos[v], net.outmaps[v])]
            if kind == "output"
            else [(edge_pos[e.id], e.form) for e in net.outgoing[v]]
        )
        for pos, form in targets:
            rows[pos] = sum(1 << s for s, bit in zip(src, form) if bit)
        steps.append(BinMatrix(size, size, tuple(rows)))
    embed = BinMatrix(size, n, tuple((1 << i) if i < n else 0 for i in range(size)))
    project = BinMatrix(n, size, tuple(1 << (n + ne + i) for i in range(n)))
    return steps, embed, project


@dataclass(frozen=True)
class FaultPlan:
    faulty_edges: tuple[str, ...] = ()
    p: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"flip probability must be in [0, 1], got {self.p}")


@dataclass(frozen=True)
class TransmissionRecord:
    X: BinMatrix
    Y: BinMatrix
    Z: BinMatrix
    flips: dict[str, int] = field(default_factory=dict)

    @property
    def difference_rank(self) -> int:
        return (self.Y - self.Z).rank()


def _flip_masks(plan: FaultPlan, m: int, rng: random.Random) -> dict[str, int]:
    full = (1 << m) - 1
    masks = {}
    for e in plan.faulty_edges:
        if plan.p >= 1.0:
            masks[e] = full
        elif plan.p <= 0.0:
            masks[e] = 0
        else:
            masks[e] = sum(1 << c for c in range(m) if rng.random() < plan.p)
    return masks


def transmit(net: Network, X: BinMatrix, plan: FaultPlan) -> TransmissionRecord:
    """Send the columns of ``X`` through ``net``; each bit on a faulty edge flips w.p. ``p``."""
    if X.nrows != net.n:
        raise ValueError(f"X must have {net.n} rows, got {X.nrows}")
    unknown = [e for e in plan.faulty_edges if e not in net.edge_index]
    if unknown:
        raise ValueError(f"fault plan names unknown edges {unknown}")
    flips = _flip_masks(plan, X.ncols, random.Random(plan.seed))
    Y = BinMatrix(net.n, X.ncols, tuple(_propagate(net, X.rows, {})))
    Z = BinMatrix(net.n, X.ncols, tuple(_propagate(net, X.rows, flips)))
    return TransmissionRecord(X, Y, Z, flips)


def fault_contributions(net: Network, record: TransmissionRecord) -> dict[str, BinMatrix]:
    """Per faulty edge, the outer product of its propagated flip and its flip row.

    Their sum equals ``Z - Y``; each term has rank at most one.
    """
    steps, _, project = processing_matrices(net)
    n, ne = net.n, len(net.edges)
    size = n + ne + n
    step_of = {}
    for j, v in enumerate(net.order):
        for e in net.outgoing[v]:
            step_of[e.id] = j
    m = record.X.ncols
    out = {}
    for eid, row in record.flips.items():
        j = step_of[eid]
        suffix = BinMatrix.identity(size)
        for s in steps[j + 1 :]:
            suffix = s @ suffix
        eps = (project @ suffix).column(n + net.edge_index[eid])
        out[eid] = BinMatrix(n, m, tuple(row if (eps >> i) & 1 else 0 for i in range(n)))
    return out


@dataclass
class RankBoundReport:
    bound: int
    ranks: list[int]
    seeds: list[int]
    m: int

    @property
    def max_rank(self) -> int:
        return max(self.ranks, default=0)

    @property
    def violations(self) -> int:
        return sum(r > self.bound for r in self.ranks)

    def rows(self) -> list[dict[str, int]]:
        return [
            {"seed": s, "t": self.bound, "m": self.m, "rank": r, "recovered": ""}
            for s, r in zip(self.seeds, self.ranks)
        ]


def check_rank_bound(net: Network, trials: int, m: int, plan: FaultPlan) -> RankBoundReport:
    """Transmit ``trials`` random ``n x m`` blocks and record ``rank(Y - Z)``."""
    ranks, seeds = [], []
    for trial in range(trials):
        seed = derive_seed(plan.seed, "rank-bound", trial)
        rng = random.Random(seed)
        X = BinMatrix(net.n, m, tuple(rng.getrandbits(m) for _ in range(net.n)))
        rec = transmit(net, X, FaultPlan(plan.faulty_edges, plan.p, seed))
        ranks.append(rec.difference_rank)
        seeds.append(seed)
    return RankBoundReport(len(plan.faulty_edges), ranks, seeds, m)


# ---------- the Gabidulin-coded transmission protocol


def protocol_send(
    net: Network, X: BinMatrix, code: GabidulinCode, plan: FaultPlan
) -> tuple[BinMatrix, BinMatrix, BinMatrix]:
    """Encode ``X`` (n x k) systematically, transmit it, return ``(Zbar, Ybar, Xbar)``."""
    A = transfer_matrix(net)
    if not A.is_invertible():
        raise UnsupportedParameter("transfer matrix is singular")
    if code.n != net.n:
        raise ValueError(f"code length {code.n} != network width {net.n}")
    Xbar = word_to_matrix(encode_systematic(code, X), code.basis)
    rec = transmit(net, Xbar, plan)
    return rec.Z, rec.Y, Xbar


def protocol_receive(Zbar: BinMatrix, A: BinMatrix, code: GabidulinCode) -> BinMatrix:
    """Recover ``A X`` from a received block; raises ``DecodingFailure``."""
    received = matrix_to_word(A.inverse() @ Zbar, code.basis)
    cw, _ = decode_bounded(code, received, (code.n - code.k) // 2)
    Ybar = A @ word_to_matrix(cw, code.basis)
    return Ybar.select_columns(range(code.k))


# ---------- random networks


def random_layered_network(
    n: int,
    width: int,
    depth: int,
    rng: random.Random,
    density: float = 0.5,
) -> Network:
    """Layered DAG: ``n`` inputs, ``depth`` layers of ``width`` inner vertices, ``n`` outputs.

    Each vertex connects to each vertex of the next layer with probability
    ``density``; connectivity is patched so every non-input vertex has an
    incoming edge and every non-output vertex an outgoing one.  Linear forms
    and output maps are random nonzero vectors.
    """
    layers = [[f"i{j}" for j in range(n)]]
    layers += [[f"v{d}_{j}" for j in range(width)] for d in range(depth)]
    layers.append([f"o{j}" for j in range(n)])
    vertices = {}
    for d, layer in enumerate(layers):
        kind = "input" if d == 0 else "output" if d == len(layers) - 1 else "inner"
        for v in layer:
            vertices[v] = kind
    pairs: list[tuple[str, str]] = []
    for src_layer, dst_layer in zip(layers, layers[1:]):
        links = {(a, b) for a in src_layer for b in dst_layer if rng.random() < density}
        for a in src_layer:
            if not any(x == a for x, _ in links):
                links.add((a, rng.choice(dst_layer)))
        for b in dst_layer:
            if not any(y == b for _, y in links):
                links.add((rng.choice(src_layer), b))
        pairs.extend(sorted(links, key=lambda ab: (src_layer.index(ab[0]), dst_layer.index(ab[1]))))
    indeg = {v: 0 for v in vertices}
    for _, b in pairs:
        indeg[b] += 1

    def nonzero(k: int) -> tuple[int, ...]:
        while True:
            bits = tuple(rng.getrandbits(1) for _ in range(k))
            if any(bits):
                return bits

    edges = tuple(
        Edge(f"e{i}", a, b, (1,) if vertices[a] == "input" else nonzero(indeg[a]))
        for i, (a, b) in enumerate(pairs)
    )
    outmaps = {v: nonzero(indeg[v]) for v in layers[-1]}
    return Network(vertices, edges, outmaps)


def random_invertible_network(
    n: int, width: int, depth: int, rng: random.Random, density: float = 0.5, max_tries: int = 10_000
) -> Network:
    """Resample :func:`random_layered_network` until the transfer matrix is invertible."""
    for _ in range(max_tries):
        net = random_layered_network(n, width, depth, rng, density)
        if transfer_matrix(net).is_invertible():
            return net
    raise RuntimeError(f"no invertible network found in {max_tries} tries")


# ---------- text format


def parse_network(text: str) -> Network:
    vertices: dict[str, str] = {}
    edges: list[Edge] = []
    outmaps: dict[str, tuple[int, ...]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        head = tok[0]
        if head == "vertex":
            if len(tok) != 3:
                raise NetworkFormatError(lineno, "expected 'vertex <id> <kind>'")
            if tok[2] not in KINDS:
                raise NetworkFormatError(lineno, f"unknown vertex kind {tok[2]!r}")
            if tok[1] in vertices:
                raise NetworkFormatError(lineno, f"duplicate vertex {tok[1]!r}")
            vertices[tok[1]] = tok[2]
        elif head == "edge":
            if len(tok) != 5:
                raise NetworkFormatError(lineno, "expected 'edge <id> <src> <dst> <form-bits>'")
            edges.append(Edge(tok[1], tok[2], tok[3], _bits(tok[4], lineno)))
        elif head == "outmap":
            if len(tok) != 3:
                raise NetworkFormatError(lineno, "expected 'outmap <vertex> <bits>'")
            outmaps[tok[1]] = _bits(tok[2], lineno)
        else:
            raise NetworkFormatError(lineno, f"unknown directive {head!r}")
    return Network(vertices, tuple(edges), outmaps)


def _bits(s: str, lineno: int) -> tuple[int, ...]:
    if not s or set(s) - {"0", "1"}:
        raise NetworkFormatError(lineno, f"bit string expected, got {s!r}")
    return tuple(int(c) for c in s)


def load_network(path: str | Path) -> Network:
    return parse_network(Path(path).read_text())


def dump_network(net: Network) -> str:
    lines = [f"vertex {v} {k}" for v, k in net.vertices.items()]
    lines += [f"edge {e.id} {e.src} {e.dst} {''.join(map(str, e.form))}" for e in net.edges]
    lines += [f"outmap {v} {''.join(map(str, b))}" for v, b in net.outmaps.items()]
    return "\n".join(lines) + "\n"


def sample_faulty_edges(net: Network, t: int, rng: random.Random) -> tuple[str, ...]:
    if t > len(net.edges):
        raise ValueError(f"cannot choose {t} faulty edges among {len(net.edges)}")
    return tuple(e.id for e in rng.sample(list(net.edges), t))
