"""Compare the compiled kernels with the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py``.  Each row reports the best
of several repeats; the scan rows time a fixed slice of the Gray-code range
so the Python side finishes quickly.
"""

from __future__ import annotations

import argparse
import random
import timeit

from rankqec import _purecore
from rankqec.f2field import GF2n, find_self_dual_normal_basis
from rankqec.gabidulin import GabidulinCode

try:
    from rankqec import _core
except ImportError:
    _core = None


def cases(rng: random.Random):
    f = GF2n(17)
    pairs = [(rng.randrange(f.order), rng.randrange(f.order)) for _ in range(2000)]
    yield "gf_mul x2000 (n=17)", lambda m: [m.gf_mul(a, b, f.modulus, 17) for a, b in pairs]

    mats = [[rng.getrandbits(17) for _ in range(17)] for _ in range(500)]
    yield "rank_u64 x500 (17x17)", lambda m: [m.rank_u64(r) for r in mats]

    for n, k, span in ((5, 2, 1 << 10), (7, 3, 1 << 14)):
        code = GabidulinCode(find_self_dual_normal_basis(GF2n(n)), k)
        gens, zero = code.f2_generators, (0,) * n
        yield (
            f"rank_scan Gab({n},{k}) 2^{span.bit_length() - 1} words",
            lambda m, gens=gens, zero=zero, span=span: m.rank_scan(gens, zero, 0, span, True),
        )


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _core is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")
    print(f"{'kernel':40s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, fn in cases(random.Random(0)):
        assert fn(_purecore) == fn(_core), name
        py = min(timeit.repeat(lambda: fn(_purecore), number=1, repeat=args.repeat))
        cy = min(timeit.repeat(lambda: fn(_core), number=1, repeat=args.repeat))
        print(f"{name:40s} {py * 1e3:10.2f} {cy * 1e3:10.2f} {py / cy:7.1f}x")


if __name__ == "__main__":
    main()
