"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N] [--full]

Both backends are driven with identical inputs and their outputs are compared
before any timing is reported. ``--full`` adds the 2x2x2 matrix-product tree,
which takes a few minutes in pure Python.
"""

from __future__ import annotations

import argparse
import random
import sys
import time

from gf2rank import _pykernels
from gf2rank.search import _generators
from gf2rank.targets import parse_target

try:
    from gf2rank import _ckernels
except ImportError:
    sys.exit("compiled kernels not built; run `pip install -e . --no-build-isolation` first")


def tree_case(tid, r):
    t = parse_target(tid)
    flats = _generators(t.space, None)
    cand = _pykernels.reduce_all(flats, t.space.echelon)
    return tid, lambda k: k.bdez_tree(t.space.echelon, cand, r - t.space.dim, flats)


def hrob_case(n_spaces=2000, seed=1):
    # random 4-dimensional subspaces of 4x4 forms against all rank-one flats
    rng = random.Random(seed)
    flats = [
        sum(1 << (i * 4 + j) for i in range(4) for j in range(4) if a >> i & 1 and b >> j & 1)
        for a in range(1, 16)
        for b in range(1, 16)
    ]
    spaces = [_pykernels.echelon_of(rng.sample(flats, 4)) for _ in range(n_spaces)]

    def run(k):
        return [k.has_rank_one_basis(s, flats) for s in spaces]

    return "has_rank_one_basis x2000", run


def timed(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--full", action="store_true")
    args = ap.parse_args(argv)
    cases = [hrob_case(), tree_case("short:3", 5), tree_case("circulant:4", 6), tree_case("short:4", 6)]
    if args.full:
        cases.append(tree_case("mat:2x2x2", 7))
    print(f"{'case':28s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for name, fn in cases:
        tc, oc = timed(lambda: fn(_ckernels), args.repeat)
        tp, op = timed(lambda: fn(_pykernels), 1 if args.full else args.repeat)
        if oc != op:
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        print(f"{name:28s} {tp:10.4f} {tc:10.4f} {tp / tc:8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
