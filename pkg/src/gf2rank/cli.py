"""Command-line driver.

Exit codes: 0 success, 1 a verification reported failures, 2 missing Omega
data, bad input or schema violation, 3 a group or enumeration cap was
exceeded, 4 a long run was refused (pass ``--allow-long``).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Sequence

from .forms import Decomposition, RankOneForm, extract_decomposition, verify_decomposition
from .group import CapExceeded
from .omega import (
    BasisEnumerationCapExceeded,
    CorruptFile,
    OmegaStore,
    omega_extend,
    canonical_pair,
)
from .omega import MissingOmega as OmegaMissing
from .search import (
    InsufficientData,
    SearchStats,
    SolutionSet,
    bdez,
    bdez_stab,
    covering_sets_method,
    expand_orbits,
    extrapolate,
)
from .targets import BadDescriptor, TargetMap, UnsupportedSize, parse_target

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CAP, EXIT_LONG = 0, 1, 2, 3, 4

# costs reported for the long jobs, printed when they are refused
REPORTED_COSTS = {
    "short:5": "covering: 6.3e6 tests, 2.4e3 s, needs Omega_8",
    "circulant:5": "covering: 8.8e8 tests, 5.4e3 s",
    "mat:3x2x3": "covering: 1.6e9 tests, 8.5e5 s",
    "mat:2x3x2": "covering: 6.3e10 tests, 4.1e6 s",
    "omega:7": "Omega_7: 11289 classes, 4.7e2 s",
    "omega:8": "Omega_8: 265577 classes, 1.8e4 s",
}


class SchemaError(ValueError):
    pass


class LongRunRefused(RuntimeError):
    pass


# decomposition files -----------------------------------------------------------------


def _bits(x: int, width: int) -> str:
    return "".join("1" if (x >> i) & 1 else "0" for i in range(width))


def _unbits(s: str, width: int) -> int:
    if len(s) != width or set(s) - {"0", "1"}:
        raise SchemaError(f"bad bitstring {s!r} (width {width})")
    return sum(1 << i for i, ch in enumerate(s) if ch == "1")


def decomposition_to_json(d: Decomposition, ell: int) -> dict:
    terms = []
    for t, g in enumerate(d.rank_ones):
        col = sum(((d.coeffs[h] >> t) & 1) << h for h in range(ell))
        terms.append({"alpha": _bits(g.alpha, g.m), "beta": _bits(g.beta, g.n), "coeffs": _bits(col, ell)})
    return {"terms": terms}


def write_solutions(
    path: str | Path | None,
    target: TargetMap,
    rank: int | None,
    decomps: Sequence[Decomposition],
    stats: SearchStats,
    timings: bool = False,
) -> dict:
    doc = {
        "target": target.id,
        "m": target.m,
        "n": target.n,
        "ell": target.ell,
        "rank": rank,
        "field": "GF2",
        "solutions": [decomposition_to_json(d, target.ell) for d in decomps],
        "stats": {
            "tests": stats.rank_one_basis_calls,
            "per_depth": list(stats.per_depth_calls),
            "seconds": round(stats.wall_time, 3) if timings else None,
        },
    }
    if path is not None:
        Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return doc


def read_solutions(path: str | Path) -> tuple[dict, TargetMap, list[Decomposition]]:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    for key in ("target", "m", "n", "ell", "field", "solutions"):
        if key not in doc:
            raise SchemaError(f"missing key {key!r}")
    if doc["field"] != "GF2":
        raise SchemaError("only GF2 is supported")
    try:
        target = parse_target(doc["target"])
    except (BadDescriptor, UnsupportedSize) as exc:
        raise SchemaError(str(exc)) from exc
    m, n, ell = doc["m"], doc["n"], doc["ell"]
    if (m, n, ell) != (target.m, target.n, target.ell):
        raise SchemaError("shape does not match the target")
    decomps = []
    for sol in doc["solutions"]:
        if not isinstance(sol, dict) or not isinstance(sol.get("terms"), list):
            raise SchemaError("solution without a terms list")
        ones, coeffs = [], [0] * ell
        for t, term in enumerate(sol["terms"]):
            try:
                a, b, c = _unbits(term["alpha"], m), _unbits(term["beta"], n), _unbits(term["coeffs"], ell)
            except (KeyError, TypeError) as exc:
                raise SchemaError(f"bad term: {exc}") from exc
            if not a or not b:
                raise SchemaError("alpha and beta must be nonzero")
            ones.append(RankOneForm(a, b, m, n))
            for h in range(ell):
                if (c >> h) & 1:
                    coeffs[h] |= 1 << t
        decomps.append(Decomposition(tuple(ones), tuple(coeffs), target.id))
    return doc, target, decomps


def _linear(x: int, name: str, width: int) -> str:
    parts = [f"{name}{i}" for i in range(width) if (x >> i) & 1]
    return parts[0] if len(parts) == 1 else "(" + " + ".join(parts) + ")"


def formulae_text(target_id: str, decomps: Sequence[Decomposition], ell: int) -> str:
    lines = [f"# {target_id}: {len(decomps)} solution(s) over GF2"]
    for k, d in enumerate(decomps):
        lines.append(f"solution {k}:")
        for t, g in enumerate(d.rank_ones):
            lines.append(f"  p{t} = {_linear(g.alpha, 'a', g.m)} * {_linear(g.beta, 'b', g.n)}")
        for h in range(ell):
            used = [f"p{t}" for t in range(d.r) if (d.coeffs[h] >> t) & 1]
            lines.append(f"  c{h} = " + (" + ".join(used) if used else "0"))
    return "\n".join(lines) + "\n"


# running searches ----------------------------------------------------------------------


def _gate(target: TargetMap, algorithm: str, allow_long: bool) -> None:
    if allow_long:
        return
    if target.long_run and algorithm in ("covering", "stab", "bdez"):
        cost = REPORTED_COSTS.get(target.id, "long run")
        raise LongRunRefused(f"{target.id} is a long run ({cost}); pass --allow-long")


def run_search(
    target: TargetMap, r: int, algorithm: str, store: OmegaStore | None, cap: int = 1 << 20
) -> tuple[SolutionSet, SearchStats]:
    if algorithm == "bdez":
        return bdez(target, r)
    if algorithm == "stab":
        group = target.stabilizer(cap)
        reps, stats = bdez_stab(target, group, r)
        return expand_orbits(reps, group), stats
    if algorithm == "covering":
        if store is None:
            store = OmegaStore()
        return covering_sets_method(target, r, store, cap=cap)
    raise ValueError(f"unknown algorithm {algorithm}")


def _decomps(sols: SolutionSet, target: TargetMap) -> list[Decomposition]:
    src = sols.members if sols.members is not None else sols.representatives
    return [extract_decomposition(v, list(target.forms), target_id=target.id) for v in src]


def _report(out, target: TargetMap, r: int, sols: SolutionSet, stats: SearchStats) -> None:
    total = sols.total if sols.total is not None else len(sols.representatives)
    line = f"r={r}: {total} solution(s)"
    if sols.classes is not None:
        line += f" in {sols.classes} class(es) under stb(T)"
        if sols and target.class_gens is not None:
            line += f", {sols.classes_under(target.class_group())} under the translation subgroup"
    print(line, file=out)
    print(f"  tests={stats.rank_one_basis_calls} per_depth={stats.per_depth_calls} time={stats.wall_time:.3f}s", file=out)
    for label, b in stats.branches.items():
        print(f"  branch {label}: |Q|={b['q']} |L|={b['transversal']} tests={b['tests']} found={b['found']}", file=out)


def cmd_rank(args, out=sys.stdout) -> int:
    target = parse_target(args.target)
    _gate(target, args.algorithm, args.allow_long)
    store = OmegaStore(args.omega_dir) if args.omega_dir else OmegaStore()
    r = args.start if args.start is not None else target.ell
    max_r = args.max_r if args.max_r is not None else target.m * target.n
    t0 = time.perf_counter()
    while r <= max_r:
        sols, stats = run_search(target, r, args.algorithm, store, args.cap)
        _report(out, target, r, sols, stats)
        if sols:
            print(f"rank {r}", file=out)
            print(f"solutions {sols.total if sols.total is not None else len(sols)}", file=out)
            if sols.classes is not None:
                print(f"classes {sols.classes}", file=out)
            stats.wall_time = time.perf_counter() - t0
            if args.out:
                write_solutions(args.out, target, r, _decomps(sols, target), stats, args.timings)
            return EXIT_OK
        r += 1
    print("no decomposition found up to the maximal r", file=out)
    return EXIT_FAIL


def cmd_search(args, out=sys.stdout) -> int:
    target = parse_target(args.target)
    _gate(target, args.algorithm, args.allow_long)
    store = OmegaStore(args.omega_dir) if args.omega_dir else OmegaStore()
    sols, stats = run_search(target, args.r, args.algorithm, store, args.cap)
    _report(out, target, args.r, sols, stats)
    if args.out:
        write_solutions(args.out, target, args.r if sols else None, _decomps(sols, target), stats, args.timings)
    return EXIT_OK


def read_any(path: str | Path) -> tuple[dict, TargetMap, list[Decomposition]]:
    """A solutions file in either the JSON or the text-formulae format."""
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if not raw.startswith("# "):
        return read_solutions(path)
    head = raw.split("\n", 1)[0][2:]
    tid = head.split(": ", 1)[0]
    try:
        target = parse_target(tid)
        decomps = parse_formulae(raw, target)
    except (BadDescriptor, UnsupportedSize, ValueError, IndexError) as exc:
        raise SchemaError(f"bad formulae file: {exc}") from exc
    ranks = {d.r for d in decomps}
    doc = write_solutions(None, target, ranks.pop() if len(ranks) == 1 else None, decomps, SearchStats())
    return doc, target, decomps


def cmd_verify(args, out=sys.stdout) -> int:
    doc, target, decomps = read_any(args.file)
    ok = sum(verify_decomposition(list(target.forms), d) for d in decomps)
    bad = len(decomps) - ok
    rank = doc.get("rank")
    if rank is not None and any(d.r != rank for d in decomps):
        print("warning: some solutions do not have the declared rank", file=out)
    print(f"{ok} passed, {bad} failed", file=out)
    return EXIT_OK if bad == 0 else EXIT_FAIL


def cmd_export(args, out=sys.stdout) -> int:
    doc, target, decomps = read_any(args.file)
    if args.format == "json":
        text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    else:
        text = formulae_text(target.id, decomps, target.ell)
    if args.output:
        Path(args.output).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


def parse_formulae(text: str, target: TargetMap) -> list[Decomposition]:
    """Inverse of the text export, used for round-trip checks."""
    decomps: list[Decomposition] = []
    ones: list[RankOneForm] = []
    coeffs: list[int] = []

    def lin(s: str, width: int) -> int:
        s = s.strip().strip("()")
        return sum(1 << int(p.strip()[1:]) for p in s.split("+"))

    def flush() -> None:
        if ones:
            decomps.append(Decomposition(tuple(ones), tuple(coeffs), target.id))

    for line in text.splitlines():
        line = line.strip()
        if line.startswith("solution"):
            flush()
            ones, coeffs = [], []
        elif line.startswith("p"):
            _, rhs = line.split("=", 1)
            a, b = rhs.split("*")
            ones.append(RankOneForm(lin(a, target.m), lin(b, target.n), target.m, target.n))
        elif line.startswith("c"):
            _, rhs = line.split("=", 1)
            rhs = rhs.strip()
            coeffs.append(0 if rhs == "0" else sum(1 << int(p.strip()[1:]) for p in rhs.split("+")))
    flush()
    return decomps


def cmd_estimate(args, out=sys.stdout) -> int:
    try:
        doc = json.loads(Path(args.file).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(str(exc)) from exc
    stats = doc.get("stats", doc)
    levels = stats.get("per_depth")
    if not isinstance(levels, list):
        raise SchemaError("no per_depth list")
    remaining = args.remaining
    if remaining is None:
        if doc.get("rank") is None or "ell" not in doc:
            raise SchemaError("give --remaining when rank is unknown")
        remaining = doc["rank"] - doc["ell"] - (len(levels) - 1)
    est = extrapolate(levels, max(remaining, 0))
    print(f"measured: {levels}", file=out)
    for k, e in enumerate(est, 1):
        line = f"depth +{k}: {e}"
        if args.rate:
            line += f" (about {e / args.rate:.3g} s)"
        print(line, file=out)
    if not est:
        print("nothing to extrapolate", file=out)
    return EXIT_OK


def cmd_omega(args, out=sys.stdout) -> int:
    store = OmegaStore(args.dir) if args.dir else OmegaStore()
    if args.action == "compute":
        if args.d >= 7 and not args.allow_long:
            raise LongRunRefused(f"{REPORTED_COSTS.get(f'omega:{args.d}', 'long run')}; pass --allow-long")
        have = [d for d in store.available() if d <= args.d]
        start = 1
        prev = []
        # resume from the highest consecutive level already on disk
        while start in have:
            prev = store.load(start)
            start += 1
        for d in range(start, args.d + 1):
            t0 = time.perf_counter()
            prev = omega_extend(prev, d)
            store.save(d, prev)
            print(f"Omega_{d}: {len(prev)} classes ({time.perf_counter() - t0:.1f}s)", file=out)
        if start > args.d:
            print(f"Omega_{args.d}: {len(store.load(args.d))} classes (already present)", file=out)
        return EXIT_OK
    # verify: checksum and header through load, then spot checks
    classes = store.load(args.d)
    keys = {c.key for c in classes}
    problems = 0
    if len(keys) != len(classes):
        print("duplicate (U, V) pairs", file=out)
        problems += 1
    limit = args.spot
    for c in classes[:limit]:
        w = c.subspace()
        if w.dim != c.d:
            print(f"class {c.key} has dependent rows", file=out)
            problems += 1
            continue
        if c.canonical:
            try:
                u, v = canonical_pair(w)
            except BasisEnumerationCapExceeded:
                continue
            if (u.rows, v.rows) != c.key:
                print(f"class {c.key} is not in canonical form", file=out)
                problems += 1
    print(f"Omega_{args.d}: {len(classes)} classes, checksum ok, {problems} problem(s)", file=out)
    return EXIT_OK if problems == 0 else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gf2rank", description="Bilinear rank searches over GF(2).")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--target", required=True, help="poly:2, short:4, circulant:3, mat:2x2x2, ...")
        sp.add_argument("--algorithm", choices=["bdez", "stab", "covering"], default="covering")
        sp.add_argument("--omega-dir", default=None)
        sp.add_argument("--out", default=None, help="write solutions as JSON")
        sp.add_argument("--timings", "--stats", action="store_true", help="record wall time in the output file")
        sp.add_argument("--threads", type=int, default=1, help="accepted for compatibility; runs are serial")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--allow-long", action="store_true")
        sp.add_argument("--cap", type=int, default=1 << 20, help="largest group closure to build")

    sp = sub.add_parser("rank", help="smallest r with a solution")
    common(sp)
    sp.add_argument("--start", type=int, default=None)
    sp.add_argument("--max-r", type=int, default=None)
    sp.set_defaults(func=cmd_rank)

    sp = sub.add_parser("search", help="all solutions at a fixed r")
    common(sp)
    sp.add_argument("--r", type=int, required=True)
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("omega", help="compute or verify classification files")
    sp.add_argument("action", choices=["compute", "verify"])
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--dir", default=None)
    sp.add_argument("--spot", type=int, default=50, help="classes re-canonicalized by verify")
    sp.add_argument("--allow-long", action="store_true")
    sp.set_defaults(func=cmd_omega)

    sp = sub.add_parser("verify", help="re-check a solutions file")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("export", help="render a solutions file")
    sp.add_argument("file")
    sp.add_argument("--format", choices=["json", "text", "text-formulae"], default="text")
    sp.add_argument("--output", default=None)
    sp.set_defaults(func=cmd_export)

    sp = sub.add_parser("estimate", help="extrapolate test counts from per-depth statistics")
    sp.add_argument("file")
    sp.add_argument("--remaining", type=int, default=None)
    sp.add_argument("--rate", type=float, default=None, help="tests per second, for a time estimate")
    sp.set_defaults(func=cmd_estimate)
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out=out)
    except (OmegaMissing, SchemaError, CorruptFile, BadDescriptor, UnsupportedSize, InsufficientData) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CapExceeded, BasisEnumerationCapExceeded) as exc:
        print(f"error: cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except LongRunRefused as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_LONG


if __name__ == "__main__":
    raise SystemExit(main())
