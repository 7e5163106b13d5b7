"""Command-line experiment runner.

Every experiment writes one CSV row per trial (or per parameter point) and
exits nonzero iff a hard invariant was violated.  Per-trial seeds are derived
from ``(--seed, experiment, trial index)``, so results do not depend on the
number of workers.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import random
import sys
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Any

from . import gabidulin, netcode, pauli, qgab
from .f2field import (
    BinMatrix,
    GF2n,
    UnsupportedParameter,
    find_normal_basis,
    find_self_dual_normal_basis,
    gram_matrix,
    rank_of_rows,
)
from .seeds import derive_seed

log = logging.getLogger("rankqec")

WORKERS_ENV = "RANKQEC_WORKERS"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    name: str
    params: dict[str, Any]
    seed: int = 0
    out: Path | None = None
    workers: int = 1


@dataclass
class TrialRecord:
    experiment: str
    values: dict[str, Any]
    passed: bool = True


@dataclass
class ExperimentResult:
    columns: list[str]
    records: list[TrialRecord] = field(default_factory=list)

    @property
    def violations(self) -> int:
        return sum(not r.passed for r in self.records)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.columns, lineterminator="\n")
        w.writeheader()
        for r in self.records:
            w.writerow(r.values)
        return buf.getvalue()


def _pmap(fn: Callable[[Any], Any], items: Sequence[Any], workers: int) -> list[Any]:
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (8 * workers))
    with ProcessPoolExecutor(workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def _field(n: int) -> GF2n:
    return GF2n(n)


def _self_dual(n: int):
    try:
        return find_self_dual_normal_basis(_field(n))
    except UnsupportedParameter as exc:
        raise ConfigError(str(exc)) from None


# ---------- experiments


def exp_basis(cfg: ExperimentConfig) -> ExperimentResult:
    res = ExperimentResult(["n", "modulus", "alpha", "conditions", "ok"])
    for n in cfg.params["n"]:
        basis = _self_dual(n)
        gram = gram_matrix(basis.field, basis.elements)
        ok = gram == BinMatrix.identity(n)
        res.records.append(
            TrialRecord(
                cfg.name,
                {"n": n, "modulus": f"{basis.field.modulus:#x}", "alpha": basis.alpha, "conditions": n * n, "ok": int(ok)},
                ok,
            )
        )
        print(f"n={n} alpha={basis.alpha}: {n * n} trace conditions {'hold' if ok else 'FAIL'}", file=sys.stderr)
    return res


def exp_gab_distance(cfg: ExperimentConfig) -> ExperimentResult:
    res = ExperimentResult(["n", "k", "distance", "expected", "ok"])
    ks = cfg.params["k"]
    ns = cfg.params["n"]
    if len(ks) != len(ns):
        raise ConfigError("--n and --k must list the same number of values")
    for n, k in zip(ns, ks):
        code = gabidulin.GabidulinCode(_self_dual(n) if n % 2 else find_normal_basis(_field(n)), k)
        d = gabidulin.min_rank_distance_exhaustive(code, cfg.workers)
        ok = d == n - k + 1
        res.records.append(TrialRecord(cfg.name, {"n": n, "k": k, "distance": d, "expected": n - k + 1, "ok": int(ok)}, ok))
        log.info("Gab(n=%d, k=%d): minimum rank distance %d (expected %d)", n, k, d, n - k + 1)
    return res


def exp_gab_dual(cfg: ExperimentConfig) -> ExperimentResult:
    res = ExperimentResult(["n", "r", "dual_shift", "dual_k", "f2_rank", "cross_nonzero", "ok"])
    for n in cfg.params["n"]:
        basis = _self_dual(n)
        rs = cfg.params.get("r") or range(1, n)
        for r in rs:
            code = gabidulin.GabidulinCode(basis, r)
            d = gabidulin.dual(code)
            rank = rank_of_rows(
                [gabidulin.pack(n, w) for w in code.f2_generators + d.f2_generators]
            )
            cross = sum(
                gabidulin.inner(basis.field, a, b) for a in code.generator_rows for b in d.generator_rows
            )
            ok = rank == n * n and cross == 0 and d.k == n - r and d.shift == r % n
            res.records.append(
                TrialRecord(
                    cfg.name,
                    {"n": n, "r": r, "dual_shift": d.shift, "dual_k": d.k, "f2_rank": rank, "cross_nonzero": cross, "ok": int(ok)},
                    ok,
                )
            )
    return res


def netcode_protocol_trial(
    seed: int, n: int, k: int, t: int, p: float, width: int, depth: int, density: float, network: str | None
) -> dict[str, Any]:
    rng = random.Random(seed)
    net = netcode.parse_network(network) if network else netcode.random_invertible_network(n, width, depth, rng, density)
    code = gabidulin.GabidulinCode(_basis_for(net.n), k)
    A = netcode.transfer_matrix(net)
    X = BinMatrix(net.n, k, tuple(rng.getrandbits(k) for _ in range(net.n)))
    plan = netcode.FaultPlan(netcode.sample_faulty_edges(net, t, rng), p, rng.getrandbits(63))
    Zbar, Ybar, _ = netcode.protocol_send(net, X, code, plan)
    rank = (Ybar - Zbar).rank()
    try:
        Y = netcode.protocol_receive(Zbar, A, code)
    except gabidulin.DecodingFailure:
        outcome = "detected"
    else:
        outcome = "recovered" if Y == A @ X else "miscorrected"
    return {"seed": seed, "t": t, "m": net.n, "rank": rank, "recovered": int(outcome == "recovered"), "outcome": outcome}


def netcode_rank_trial(
    seed: int, n: int, t: int, m: int, p: float, width: int, depth: int, density: float, network: str | None
) -> dict[str, Any]:
    rng = random.Random(seed)
    net = netcode.parse_network(network) if network else netcode.random_layered_network(n, width, depth, rng, density)
    X = BinMatrix(net.n, m, tuple(rng.getrandbits(m) for _ in range(net.n)))
    plan = netcode.FaultPlan(netcode.sample_faulty_edges(net, t, rng), p, rng.getrandbits(63))
    rec = netcode.transmit(net, X, plan)
    return {"seed": seed, "t": t, "m": m, "rank": rec.difference_rank, "recovered": "", "outcome": ""}


def _basis_for(n: int):
    f = _field(n)
    return find_self_dual_normal_basis(f) if n % 2 else find_normal_basis(f)


def exp_netcode(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    res = ExperimentResult(["trial", "seed", "t", "m", "rank", "recovered", "outcome"])
    network = None
    n = p["n"]
    if p.get("network"):
        network = Path(p["network"]).read_text()
        net = netcode.parse_network(network)
        n = net.n
        if p["mode"] == "protocol" and not netcode.transfer_matrix(net).is_invertible():
            raise ConfigError("protocol mode needs an invertible transfer matrix")
    common = dict(p=p["p"], width=p["width"] or n, depth=p["depth"], density=p["density"], network=network)
    jobs: list[tuple[int, Callable[[int], dict[str, Any]], int]] = []
    idx = 0
    for t in p["faulty"]:
        if p["mode"] == "protocol":
            fn = partial(netcode_protocol_trial, n=n, k=p["k"], t=t, **common)
            for _ in range(p["trials"]):
                jobs.append((idx, fn, t))
                idx += 1
        else:
            for m in p["m"] or [n]:
                fn = partial(netcode_rank_trial, n=n, t=t, m=m, **common)
                for _ in range(p["trials"]):
                    jobs.append((idx, fn, t))
                    idx += 1
    seeds = [derive_seed(cfg.seed, cfg.name, i) for i, _, _ in jobs]
    rows = _pmap(_call, [(fn, s) for (_, fn, _), s in zip(jobs, seeds)], cfg.workers)
    radius = (n - p["k"]) // 2 if p["mode"] == "protocol" else None
    for (i, _, t), row in zip(jobs, rows):
        ok = row["rank"] <= t
        if radius is not None and t <= radius:
            ok = ok and row["recovered"] == 1
        res.records.append(TrialRecord(cfg.name, {"trial": i, **row}, ok))
    return res


def _call(job: tuple[Callable[[int], Any], int]) -> Any:
    fn, seed = job
    return fn(seed)


def stacked_trial(seed: int, p: float, max_n: int, max_s: int, circuit: str | None, layers: int | None, forced: int | None) -> dict[str, Any]:
    if circuit is None and forced is None:
        row = pauli.stacked_bound_trial(seed, p, max_n, max_s)
        return {k: row[k] for k in ("seed", "t", "rank", "bound")}
    rng = random.Random(seed)
    if circuit is not None:
        c = pauli.parse_circuit(circuit)
    else:
        c = pauli.random_circuit(rng.randint(2, max_n), rng.randint(1, max_s), rng)
    ell = layers or c.width
    model = pauli.StackedNoiseModel(p, rng.getrandbits(63))
    where = None if forced is None else rng.sample(range(len(c)), min(forced, len(c)))
    run = pauli.run_stacked(c, ell, model, where)
    return {"seed": seed, "t": run.t, "rank": run.final.rank(), "bound": 4 * run.t}


def exp_stacked(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    circuit = Path(p["circuit"]).read_text() if p.get("circuit") else None
    fn = partial(stacked_trial, p=p["p"], max_n=p["max_n"], max_s=p["max_s"], circuit=circuit, layers=p["layers"], forced=p["forced"])
    seeds = [derive_seed(cfg.seed, cfg.name, i) for i in range(p["trials"])]
    rows = _pmap(fn, seeds, cfg.workers)
    res = ExperimentResult(["seed", "trial", "t", "rank", "bound"])
    for i, row in enumerate(rows):
        res.records.append(TrialRecord(cfg.name, {"trial": i, **row}, row["rank"] <= row["bound"]))
    return res


def exp_qgab_params(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    res = ExperimentResult(["n", "r", "s", "physical", "generator_rank", "logical", "expected", "ok"])
    n, r = p["n"], p["r"]
    s = r if p["s"] is None else p["s"]
    code = _qcode(n, r, s)
    logical = code.logical_count()
    expected = n * n - n * (r + s)
    ok = logical == expected
    res.records.append(
        TrialRecord(
            cfg.name,
            {"n": n, "r": r, "s": s, "physical": n * n, "generator_rank": code.generator_rank(), "logical": logical, "expected": expected, "ok": int(ok)},
            ok,
        )
    )
    log.info("QGab(n=%d, r=%d, s=%d): k = %d logical qubits on %d", n, r, s, logical, n * n)
    return res


def _qcode(n: int, r: int, s: int) -> qgab.QuantumGabidulinCode:
    try:
        return qgab.build(_self_dual(n), r, s)
    except UnsupportedParameter as exc:
        raise ConfigError(str(exc)) from None


def exp_qgab_distance(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    n, r = p["n"], p["r"]
    s = r if p["s"] is None else p["s"]
    code = _qcode(n, r, s)
    res = ExperimentResult(["n", "r", "s", "circuit_gates", "distance", "lower_bound", "ok"])
    d = code.min_rank_distance_exhaustive()
    bound = min(r, s) + 1
    res.records.append(TrialRecord(cfg.name, {"n": n, "r": r, "s": s, "circuit_gates": 0, "distance": d, "lower_bound": bound, "ok": int(d >= bound)}, d >= bound))
    if p["gates"]:
        c = pauli.random_circuit(n, p["gates"], random.Random(derive_seed(cfg.seed, cfg.name, 0)))
        d2 = qgab.conjugate_code(code, c).min_rank_distance_exhaustive()
        res.records.append(TrialRecord(cfg.name, {"n": n, "r": r, "s": s, "circuit_gates": p["gates"], "distance": d2, "lower_bound": bound, "ok": int(d2 == d)}, d2 == d))
    return res


def exp_qgab_e2e(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    n, r = p["n"], p["r"]
    _qcode(n, r, r)
    circuit = Path(p["circuit"]).read_text() if p.get("circuit") else None
    if p["faults"] is None and p["p"] is None:
        raise ConfigError("give --faults or --p")
    fn = partial(_e2e_row, n=n, r=r, gates=p["gates"], faults=p["faults"], p=p["p"] or 0.0, circuit=circuit)
    seeds = [derive_seed(cfg.seed, cfg.name, i) for i in range(p["trials"])]
    rows = _pmap(fn, seeds, cfg.workers)
    res = ExperimentResult(["seed", "trial", "t", "rank", "syndrome_weight", "success", "x_fail", "z_fail"])
    bound = r // 8
    for i, (row, pullback_ok) in enumerate(rows):
        ok = pullback_ok and (row["success"] == 1 or row["t"] > bound)
        res.records.append(TrialRecord(cfg.name, {"trial": i, **row}, ok))
    return res


def _e2e_row(seed: int, n: int, r: int, gates: int, faults: int | None, p: float, circuit: str | None) -> tuple[dict[str, Any], bool]:
    if circuit is None:
        out = qgab.e2e_trial(seed, n, r, gates, faults, p)
    else:
        c = pauli.parse_circuit(circuit)
        out = qgab.e2e_correct(qgab.standard_code(n, r, r), c, pauli.StackedNoiseModel(p, seed), faults)
    row = {
        "seed": seed,
        "t": out.t,
        "rank": out.rank,
        "syndrome_weight": out.syndrome_weight,
        "success": int(out.success),
        "x_fail": int(out.x_fail),
        "z_fail": int(out.z_fail),
    }
    return row, out.pullback_ok


EXPERIMENTS: dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
    "basis": exp_basis,
    "gab-distance": exp_gab_distance,
    "gab-dual": exp_gab_dual,
    "netcode-sim": exp_netcode,
    "stacked-sim": exp_stacked,
    "qgab-params": exp_qgab_params,
    "qgab-distance": exp_qgab_distance,
    "qgab-e2e": exp_qgab_e2e,
}


def run(cfg: ExperimentConfig) -> int:
    """Run one experiment, write its CSV, and return the exit status."""
    for key in ("network", "circuit"):
        path = cfg.params.get(key)
        if path and not Path(path).is_file():
            log.error("%s file not found: %s", key, path)
            return 2
    try:
        _validate(cfg)
        result = EXPERIMENTS[cfg.name](cfg)
    except (ConfigError, netcode.NetworkFormatError, netcode.InvalidNetwork, pauli.CircuitFormatError) as exc:
        log.error("%s: %s", cfg.name, exc)
        return 2
    text = result.to_csv()
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        cfg.out.write_text(text)
    if result.violations:
        log.error("%s: %d of %d rows violate a hard invariant", cfg.name, result.violations, len(result.records))
        return 1
    log.info("%s: %d rows, no violations", cfg.name, len(result.records))
    return 0


def _validate(cfg: ExperimentConfig) -> None:
    p = cfg.params
    if p.get("trials") is not None and p["trials"] < 0:
        raise ConfigError("--trials must be non-negative")
    if "p" in p and p["p"] is not None and not 0.0 <= p["p"] <= 1.0:
        raise ConfigError("--p must be in [0, 1]")
    if cfg.name == "netcode-sim" and p["mode"] == "protocol":
        if not p.get("network") and p["n"] % 2 == 0:
            log.warning("even n: using a (non self-dual) normal basis for the Gabidulin code")
        if not 1 <= p["k"] <= p["n"]:
            raise ConfigError("need 1 <= k <= n")
    if cfg.name == "qgab-e2e" and p["gates"] < 1 and not p.get("circuit"):
        raise ConfigError("--gates must be positive")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rankqec", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, help_: str, trials: int = 1) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        sp.add_argument("--trials", type=int, default=trials, help=f"trials (default {trials})")
        sp.add_argument("--out", type=Path, help="CSV output path (default stdout)")
        sp.add_argument(
            "--workers",
            type=int,
            default=int(os.environ.get(WORKERS_ENV, "1")),
            help=f"worker processes (default ${WORKERS_ENV} or 1)",
        )
        return sp

    sp = add("basis", "find a self-dual normal basis and verify its trace conditions")
    sp.add_argument("--n", type=int, nargs="+", required=True, help="odd extension degree(s)")

    sp = add("gab-distance", "exhaustive minimum rank distance of Gab(alpha, k)")
    sp.add_argument("--n", type=int, nargs="+", required=True)
    sp.add_argument("--k", type=int, nargs="+", required=True)

    sp = add("gab-dual", "check that Gab(alpha, r) and Gab(alpha^(2^r), n-r) are dual")
    sp.add_argument("--n", type=int, nargs="+", required=True, help="odd extension degree(s)")
    sp.add_argument("--r", type=int, nargs="*", help="dimensions to check (default all 1..n-1)")

    sp = add("netcode-sim", "faulty-edge network coding: rank bound or Gabidulin-protected protocol", trials=1000)
    sp.add_argument("--mode", choices=("protocol", "rank-bound"), default="protocol")
    sp.add_argument("--n", type=int, default=7, help="inputs/outputs of random networks (default 7)")
    sp.add_argument("--k", type=int, default=3, help="Gabidulin dimension (protocol mode, default 3)")
    sp.add_argument("--faulty", type=int, nargs="+", default=[1], help="number(s) of faulty edges")
    sp.add_argument("--m", type=int, nargs="*", help="columns per transmission (rank-bound mode, default n)")
    sp.add_argument("--p", type=float, default=0.5, help="flip probability per bit on faulty edges (default 0.5)")
    sp.add_argument("--width", type=int, default=0, help="inner layer width (default n)")
    sp.add_argument("--depth", type=int, default=2, help="number of inner layers (default 2)")
    sp.add_argument("--density", type=float, default=0.5, help="edge probability between layers")
    sp.add_argument("--network", help="network file instead of random networks")

    sp = add("stacked-sim", "stacked circuit noise: rank(Q) <= 4t", trials=1000)
    sp.add_argument("--p", type=float, default=0.01, help="gate fault probability (default 0.01)")
    sp.add_argument("--max-n", dest="max_n", type=int, default=16)
    sp.add_argument("--max-s", dest="max_s", type=int, default=200)
    sp.add_argument("--circuit", help="circuit file instead of random circuits")
    sp.add_argument("--layers", type=int, help="stack depth (default: circuit width)")
    sp.add_argument("--forced", type=int, help="inject exactly this many faults")

    sp = add("qgab-params", "logical qubit count of QGab(alpha, r, s)")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--s", type=int, help="defaults to r")

    sp = add("qgab-distance", "exhaustive minimum rank distance of QGab(alpha, r, s)")
    sp.add_argument("--n", type=int, default=3)
    sp.add_argument("--r", type=int, default=1)
    sp.add_argument("--s", type=int, help="defaults to r")
    sp.add_argument("--gates", type=int, default=0, help="also scan the code conjugated by a random circuit")

    sp = add("qgab-e2e", "stacked Clifford circuit protected by QGab(alpha, r, r)", trials=100)
    sp.add_argument("--n", type=int, default=17)
    sp.add_argument("--r", type=int, default=8)
    sp.add_argument("--gates", type=int, default=100, help="random circuit size (default 100)")
    sp.add_argument("--faults", type=int, help="inject exactly this many faults")
    sp.add_argument("--p", type=float, help="gate fault probability (instead of --faults)")
    sp.add_argument("--circuit", help="circuit file instead of random circuits")
    return ap


_COMMON = {"command", "seed", "out", "workers", "verbose"}


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    params = {k: v for k, v in vars(ns).items() if k not in _COMMON}
    return ExperimentConfig(ns.command, params, ns.seed, ns.out, max(1, ns.workers))


def main(argv: Iterable[str] | None = None) -> int:
    ns = build_parser().parse_args(None if argv is None else list(argv))
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(message)s")
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
