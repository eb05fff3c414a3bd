"""Classification sets Omega_d of rank-one-spanned subspaces of Bl(d, d) up to GL_d × GL_d.

A subspace W with a rank-one basis (alpha_t^T beta_t) is encoded by the pair
(U, V) whose rows are the alpha_t and beta_t. Column operations on U and V
realize the group action, so the reduced column echelon forms of U and V only
depend on the ordered basis. The canonical pair of W is the smallest such
pair over all ordered rank-one bases. It is found by a depth-first search
that only follows children with the smallest next row. Two leaves with the
same rows differ by an automorphism of W; automorphisms found this way prune
children in the same orbit, and the search jumps back to their common prefix.

Row t of the column echelon form of U is the coordinate vector of alpha_t
over the earlier pivot alphas when alpha_t lies in their span, and the next
unit vector otherwise; ``_codes`` computes exactly that.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import kernels
from .forms import Subspace, outer, rank_distribution, rank_one_factors
from .gf2 import BitMatrix

DEFAULT_BUDGET = 50_000_000
DATA_DIR = Path(__file__).with_name("data")


class BasisEnumerationCapExceeded(RuntimeError):
    pass


class CorruptFile(ValueError):
    pass


class MissingOmega(LookupError):
    pass


@dataclass(frozen=True)
class OmegaClass:
    d: int
    u: tuple[int, ...]
    v: tuple[int, ...]
    dist: tuple[int, ...]
    canonical: bool = True

    @property
    def key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.u, self.v

    @property
    def U(self) -> BitMatrix:
        return BitMatrix(self.u, self.d)

    @property
    def V(self) -> BitMatrix:
        return BitMatrix(self.v, self.d)

    @property
    def rank_u(self) -> int:
        return max(self.u).bit_length() if self.u else 0

    @property
    def rank_v(self) -> int:
        return max(self.v).bit_length() if self.v else 0

    def subspace(self, m: int | None = None, n: int | None = None) -> Subspace:
        m = self.d if m is None else m
        n = self.d if n is None else n
        return Subspace.from_flats(m, n, (outer(a, b, n) for a, b in zip(self.u, self.v)))


# ordered-basis codes ---------------------------------------------------------------


class _Coords:
    """Incremental coordinates over an ordered list of independent vectors."""

    __slots__ = ("rows",)

    def __init__(self, rows: list[tuple[int, int]] | None = None) -> None:
        # (reduced vector, coordinate tag), sorted by decreasing reduced vector
        self.rows = rows or []

    def code(self, x: int) -> tuple[int, int]:
        """(tag, residual) with x = (combination given by tag) + residual."""
        tag = 0
        for r, rt in self.rows:
            if x ^ r < x:
                x ^= r
                tag ^= rt
        return tag, x

    def extended(self, residual: int, tag: int, index: int) -> _Coords:
        rows = self.rows + [(residual, tag ^ (1 << index))]
        rows.sort(reverse=True)
        return _Coords(rows)

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class _Prefix:
    chosen: tuple[int, ...]  # flats, in order
    span: tuple[int, ...]  # echelon of the chosen flats
    ca: _Coords
    cb: _Coords

    def state(self) -> tuple:
        return (frozenset(self.chosen), tuple(self.ca.rows), tuple(self.cb.rows))


def _code_of(p: _Prefix, alpha: int, beta: int) -> tuple[int, int, tuple, tuple]:
    ta, ra = p.ca.code(alpha)
    tb, rb = p.cb.code(beta)
    u = (1 << len(p.ca)) if ra else ta
    v = (1 << len(p.cb)) if rb else tb
    return u, v, (ra, ta), (rb, tb)


def _child(p: _Prefix, flat: int, ea: tuple, eb: tuple) -> _Prefix:
    ca = p.ca.extended(ea[0], ea[1], len(p.ca)) if ea[0] else p.ca
    cb = p.cb.extended(eb[0], eb[1], len(p.cb)) if eb[0] else p.cb
    return _Prefix(p.chosen + (flat,), kernels.insert_row(p.span, flat), ca, cb)


def rank_one_elements(w: Subspace) -> list[tuple[int, int, int]]:
    """(flat, alpha, beta) for every rank-one element of W."""
    out = []
    for x in w.elements():
        f = rank_one_factors(x, w.m, w.n)
        if f is not None:
            out.append((x, f[0], f[1]))
    return out


class _Search:
    """Depth-first search for the smallest code sequence.

    Only children with the smallest code at a node can lead to the minimum.
    Two leaves with equal sequences give an automorphism of W (the map between
    their pivot lists); automorphisms found below a node fix its prefix, so
    children in one orbit under them lead to identical subtrees and only one
    of them is explored.
    """

    def __init__(self, r1: Sequence[tuple[int, int, int]], d: int, n: int, budget: int) -> None:
        self.r1 = list(r1)
        self.n = n
        self.index = {f: i for i, (f, _, _) in enumerate(self.r1)}
        self.d = d
        self.budget = budget
        self.work = 0
        self.best: list[tuple[int, int]] | None = None
        self.best_path: list[int] = []
        self.auts: list[tuple[int, list[int]]] = []  # (common prefix length, permutation)
        self.leaves = 0

    def run(self) -> tuple[tuple[int, int], ...]:
        self._node(_Prefix((), (), _Coords(), _Coords()), [], [])
        return tuple(self.best)

    def _node(self, p: _Prefix, path: list[int], codes: list[tuple[int, int]]) -> int:
        """Explores the subtree; returns the level to jump back to (d when none)."""
        t = len(path)
        if t == self.d:
            return self._leaf(path, codes)
        kids = []
        low = None
        for i, (flat, a, b) in enumerate(self.r1):
            if kernels.reduce_vec(flat, p.span) == 0:
                continue
            u, v, ea, eb = _code_of(p, a, b)
            c = (u, v)
            if low is None or c < low:
                low = c
                kids = []
            if c == low:
                kids.append((i, ea, eb))
        self.work += len(self.r1)
        if self.work > self.budget:
            raise BasisEnumerationCapExceeded("canonical search over budget")
        if self.best is not None and codes == self.best[:t] and low > self.best[t]:
            return self.d
        mark = len(self.auts)
        done: set[int] = set()
        for i, ea, eb in kids:
            if i in done:
                continue
            if self.best is not None and codes + [low] > self.best[: t + 1]:
                return self.d
            jump = self._node(_child(p, self.r1[i][0], ea, eb), path + [i], codes + [low])
            if jump < t:
                return jump
            done.add(i)
            gens = [g for lca, g in self.auts[mark:] if lca >= t]
            if gens:
                done = self._orbit(done, gens)
        return self.d

    def _orbit(self, seed: set[int], gens: list[list[int]]) -> set[int]:
        out = set(seed)
        todo = list(seed)
        while todo:
            x = todo.pop()
            for g in gens:
                y = g[x]
                if y not in out:
                    out.add(y)
                    todo.append(y)
        return out

    def _leaf(self, path: list[int], codes: list[tuple[int, int]]) -> int:
        self.leaves += 1
        if self.best is None or codes < self.best:
            self.best = list(codes)
            self.best_path = list(path)
            return self.d
        if codes != self.best:
            return self.d
        lca = 0
        while path[lca] == self.best_path[lca]:
            lca += 1
        perm = self._automorphism(self.best_path, path)
        if perm is None:
            return self.d
        self.auts.append((lca, perm))
        # the subtree below path[lca] is the image of an explored one
        return lca

    def _automorphism(self, src: list[int], dst: list[int]) -> list[int] | None:
        """Permutation of the rank-one elements induced by mapping basis src onto dst."""
        def pivots(path, k):
            out = []
            span: tuple[int, ...] = ()
            for i in path:
                x = self.r1[i][k]
                if kernels.reduce_vec(x, span):
                    out.append(x)
                    span = kernels.insert_row(span, x)
            return out

        maps = []
        for k in (1, 2):
            ps, pd = pivots(src, k), pivots(dst, k)
            coords = _Coords()
            for idx, x in enumerate(ps):
                tag, res = coords.code(x)
                coords = coords.extended(res, tag, idx)
            maps.append((coords, pd))
        perm = []
        for flat, a, b in self.r1:
            img = []
            for (coords, pd), x in zip(maps, (a, b)):
                tag, res = coords.code(x)
                if res:
                    return None
                y = 0
                for j, q in enumerate(pd):
                    if (tag >> j) & 1:
                        y ^= q
                img.append(y)
            j = self.index.get(outer(img[0], img[1], self.n))
            if j is None:
                return None
            perm.append(j)
        return perm


def _min_sequence(r1: Sequence[tuple[int, int, int]], d: int, n: int, budget: int) -> tuple[tuple[int, int], ...]:
    return _Search(r1, d, n, budget).run()


def _split(key: Sequence[tuple[int, int]]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    return tuple(c[0] for c in key), tuple(c[1] for c in key)


def canonical_pair(
    w: Subspace,
    budget: int = DEFAULT_BUDGET,
) -> tuple[BitMatrix, BitMatrix]:
    """The minimal (U, V) pair of W; U is dim×m and V is dim×n."""
    r1 = rank_one_elements(w)
    if len(kernels.echelon_of([x[0] for x in r1])) != w.dim:
        raise ValueError("W has no rank-one basis")
    u, v = _split(_min_sequence(r1, w.dim, w.n, budget))
    return BitMatrix(u, w.m), BitMatrix(v, w.n)


def pair_subspace(u: Sequence[int], v: Sequence[int], m: int, n: int) -> Subspace:
    return Subspace.from_flats(m, n, (outer(a, b, n) for a, b in zip(u, v)))


# extension -------------------------------------------------------------------------


def _candidate_vectors(rank_used: int, d: int) -> list[int]:
    out = list(range(1, 1 << rank_used))
    if rank_used < d:
        out.append(1 << rank_used)
    return out


class _Deduper:
    def __init__(self, d: int, budget: int) -> None:
        self.d = d
        self.budget = budget
        self.canon: dict[tuple, OmegaClass] = {}
        self.seen_spaces: set[tuple[int, ...]] = set()

    def add(self, w: Subspace) -> None:
        if w.echelon in self.seen_spaces:
            return
        self.seen_spaces.add(w.echelon)
        key = _min_sequence(rank_one_elements(w), self.d, w.n, self.budget)
        if key not in self.canon:
            u, v = _split(key)
            self.canon[key] = OmegaClass(self.d, u, v, tuple(rank_distribution(w)), True)

    def classes(self) -> list[OmegaClass]:
        return sorted(self.canon.values(), key=lambda c: c.key)


def omega_extend(
    prev: Sequence[OmegaClass],
    d: int,
    budget: int = DEFAULT_BUDGET,
) -> list[OmegaClass]:
    """Omega_d from Omega_{d-1}: pad, adjoin one rank-one form, deduplicate."""
    if d == 1:
        return [OmegaClass(1, (1,), (1,), (1, 1))]
    dd = _Deduper(d, budget)
    for c in prev:
        if c.d != d - 1:
            raise ValueError("previous level has the wrong dimension")
        base = c.subspace(d, d)
        for a in _candidate_vectors(c.rank_u, d):
            for b in _candidate_vectors(c.rank_v, d):
                phi = outer(a, b, d)
                if base.reduce(phi) == 0:
                    continue
                dd.add(base.add([phi]))
    return dd.classes()


def compute_omega(d_max: int, **kw) -> dict[int, list[OmegaClass]]:
    levels: dict[int, list[OmegaClass]] = {}
    prev: list[OmegaClass] = []
    for d in range(1, d_max + 1):
        prev = omega_extend(prev, d, **kw)
        levels[d] = prev
    return levels


def restrict(omega_d: Sequence[OmegaClass], m: int, n: int) -> list[Subspace]:
    """Representatives of AL(m, n, d) / (GL_m × GL_n)."""
    out = []
    for c in omega_d:
        if c.rank_u <= min(m, c.d) and c.rank_v <= min(n, c.d):
            out.append(c.subspace(m, n))
    return out


# persistence -----------------------------------------------------------------------


def _hex_rows(rows: Sequence[int]) -> str:
    return ",".join(format(r, "x") for r in rows)


def serialize(d: int, classes: Sequence[OmegaClass]) -> bytes:
    lines = [f"omega d={d} field=GF2 count={len(classes)}"]
    for c in sorted(classes, key=lambda c: c.key):
        flag = "" if c.canonical else ";g=1"
        lines.append(f"U={_hex_rows(c.u)};V={_hex_rows(c.v)};p={','.join(map(str, c.dist))}{flag}")
    body = ("\n".join(lines) + "\n").encode("ascii")
    return body + f"sha256={hashlib.sha256(body).hexdigest()}\n".encode("ascii")


def parse(data: bytes) -> tuple[int, list[OmegaClass]]:
    text = data.decode("ascii")
    if not text.endswith("\n"):
        raise CorruptFile("missing final newline")
    body, _, last = text[:-1].rpartition("\n")
    body += "\n"
    if not last.startswith("sha256="):
        raise CorruptFile("missing checksum line")
    if hashlib.sha256(body.encode("ascii")).hexdigest() != last[len("sha256="):]:
        raise CorruptFile("checksum mismatch")
    lines = body.splitlines()
    head = lines[0].split()
    try:
        if head[0] != "omega" or head[2] != "field=GF2":
            raise CorruptFile("bad header")
        d = int(head[1].removeprefix("d="))
        count = int(head[3].removeprefix("count="))
        classes = []
        for line in lines[1:]:
            parts = dict(p.split("=", 1) for p in line.split(";"))
            u = tuple(int(x, 16) for x in parts["U"].split(","))
            v = tuple(int(x, 16) for x in parts["V"].split(","))
            dist = tuple(int(x) for x in parts["p"].split(","))
            classes.append(OmegaClass(d, u, v, dist, parts.get("g") != "1"))
    except (IndexError, KeyError, ValueError) as exc:
        raise CorruptFile(f"malformed omega file: {exc}") from exc
    if len(classes) != count:
        raise CorruptFile("class count does not match header")
    return d, classes


class OmegaStore:
    """Omega files in a directory, one ``omega_<d>.txt`` per level."""

    def __init__(self, directory: str | os.PathLike | None = None) -> None:
        self.directory = Path(directory) if directory is not None else DATA_DIR
        self._cache: dict[int, list[OmegaClass]] = {}
        self._restricted: dict[tuple[int, int, int], list[Subspace]] = {}

    def path(self, d: int) -> Path:
        return self.directory / f"omega_{d}.txt"

    def available(self) -> list[int]:
        if not self.directory.is_dir():
            return []
        out = []
        for p in self.directory.glob("omega_*.txt"):
            try:
                out.append(int(p.stem.split("_")[1]))
            except ValueError:
                continue
        return sorted(out)

    def has(self, d: int) -> bool:
        return d == 0 or self.path(d).exists()

    def save(self, d: int, classes: Sequence[OmegaClass]) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        p = self.path(d)
        p.write_bytes(serialize(d, classes))
        self._cache[d] = sorted(classes, key=lambda c: c.key)
        return p

    def load(self, d: int) -> list[OmegaClass]:
        if d in self._cache:
            return self._cache[d]
        if d == 0:
            return []
        p = self.path(d)
        if not p.exists():
            raise MissingOmega(f"no omega file for d={d} in {self.directory}")
        dd, classes = parse(p.read_bytes())
        if dd != d:
            raise CorruptFile("file holds a different level")
        self._cache[d] = classes
        return classes

    def restricted(self, d: int, m: int, n: int) -> list[Subspace]:
        key = (d, m, n)
        if key not in self._restricted:
            if d == 0:
                self._restricted[key] = [Subspace(m, n, ())]
            else:
                self._restricted[key] = restrict(self.load(d), m, n)
        return self._restricted[key]


def save(store: OmegaStore, d: int, classes: Sequence[OmegaClass]) -> Path:
    return store.save(d, classes)


def load(store: OmegaStore, d: int) -> list[OmegaClass]:
    return store.load(d)
