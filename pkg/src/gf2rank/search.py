"""Searches for subspaces V ⊇ T of dimension r spanned by rank-one forms.

Three routes are provided: plain exhaustive extension (``bdez``), the same
pruned by a stabilizer group (``bdez_stab``) and the covering-sets route
driven by a stem and the precomputed classification sets (``covering_sets_method``).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from . import kernels
from .forms import (
    BilinearForm,
    Decomposition,
    RankOneForm,
    Subspace,
    express,
    extract_decomposition,
    flat_rank,
    rank_one_flats,
)
from .gf2 import BitMatrix, invert, mul, power
from .group import (
    GeneratedGroup,
    RpAutomorphism,
    apply_subspace,
    family_stabilizer,
    left_transversal,
    pencil_normalize,
    rank_normalizer,
    set_map_search,
    setwise_stabilizer,
    stabilizes,
)
from .omega import MissingOmega  # noqa: F401  (re-exported)
from .targets import StemEntry, TargetMap


class InsufficientData(ValueError):
    pass


class NotInSpan(ValueError):
    pass


@dataclass
class SearchStats:
    nodes_visited: int = 0
    rank_one_basis_calls: int = 0
    wall_time: float = 0.0
    per_depth_calls: list[int] = field(default_factory=list)
    branches: dict = field(default_factory=dict)

    @property
    def tests(self) -> int:
        return self.rank_one_basis_calls

    def add_depths(self, counts: Sequence[int], offset: int = 0) -> None:
        need = offset + len(counts)
        if len(self.per_depth_calls) < need:
            self.per_depth_calls += [0] * (need - len(self.per_depth_calls))
        for i, c in enumerate(counts):
            self.per_depth_calls[offset + i] += c

    def merge(self, other: SearchStats) -> None:
        self.nodes_visited += other.nodes_visited
        self.rank_one_basis_calls += other.rank_one_basis_calls
        self.wall_time += other.wall_time
        self.add_depths(other.per_depth_calls)


@dataclass
class SolutionSet:
    target: Subspace
    r: int
    representatives: list[Subspace]
    classes: int | None = None
    total: int | None = None
    members: list[Subspace] | None = None

    def __len__(self) -> int:
        return len(self.representatives)

    def __bool__(self) -> bool:
        return bool(self.representatives)

    @property
    def keys(self) -> set[tuple[int, ...]]:
        return {v.echelon for v in (self.members if self.members is not None else self.representatives)}

    def classes_under(self, group: GeneratedGroup) -> int:
        """Number of orbits of the members under ``group``."""
        elems = group.elements()
        left = set(self.keys)
        n = 0
        while left:
            e = min(left)
            v = Subspace(self.target.m, self.target.n, e)
            left -= orbit_keys(v, elems)
            n += 1
        return n

    def decompositions(self, target_id: str = "") -> list[Decomposition]:
        src = self.members if self.members is not None else self.representatives
        return [extract_decomposition(v, self.target, target_id=target_id) for v in src]


def _space(t: Subspace | TargetMap) -> Subspace:
    return t.space if isinstance(t, TargetMap) else t


def _generators(t: Subspace, g: Sequence[RankOneForm] | None) -> list[int]:
    if g is None:
        return rank_one_flats(t.m, t.n)
    return [x.bits for x in g]


def _unique_sorted(found: Iterable[tuple[int, ...]], m: int, n: int) -> list[Subspace]:
    return [Subspace(m, n, e) for e in sorted(set(found))]


def bdez(t: Subspace | TargetMap, r: int, g: Sequence[RankOneForm] | None = None) -> tuple[SolutionSet, SearchStats]:
    """Every V ⊇ T with dim V = r and a rank-one basis, each exactly once."""
    space = _space(t)
    if r < space.dim:
        raise ValueError("r must be at least dim T")
    t0 = time.perf_counter()
    flats = _generators(space, g)
    cand = kernels.reduce_all(flats, space.echelon)
    found, tests, per_depth = kernels.bdez_tree(space.echelon, cand, r - space.dim, flats)
    stats = SearchStats(
        nodes_visited=sum(per_depth),
        rank_one_basis_calls=tests,
        per_depth_calls=list(per_depth),
    )
    reps = _unique_sorted(found, space.m, space.n)
    stats.wall_time = time.perf_counter() - t0
    return SolutionSet(space, r, reps, total=len(reps), members=reps), stats


def _orbits_mod(points: list[int], group: list[RpAutomorphism], rows: tuple[int, ...]) -> list[list[int]]:
    """Orbits of reduced points under the group acting modulo the echelon rows."""
    seen: set[int] = set()
    out = []
    red = kernels.reduce_vec
    for p in points:
        if p in seen:
            continue
        orb = {red(s.apply_flat(p), rows) for s in group}
        orb.add(p)
        seen |= orb
        out.append(sorted(orb))
    out.sort()
    return out


def bdez_stab(
    t: Subspace | TargetMap,
    group: GeneratedGroup | None,
    r: int,
    g: Sequence[RankOneForm] | None = None,
) -> tuple[SolutionSet, SearchStats]:
    """At least one representative per stb(T)-class of the solutions."""
    space = _space(t)
    if group is None:
        if not isinstance(t, TargetMap):
            raise ValueError("a group is required for a bare subspace")
        group = t.stabilizer()
    if r < space.dim:
        raise ValueError("r must be at least dim T")
    t0 = time.perf_counter()
    flats = _generators(space, g)
    stats = SearchStats(per_depth_calls=[0] * (r - space.dim + 1))
    found: list[tuple[int, ...]] = []
    elems = group.elements()
    if any(not stabilizes(s, space) for s in group.generators):
        raise ValueError("the group does not stabilize T")

    def rec(rows: tuple[int, ...], cand: list[int], u: list[RpAutomorphism], left: int, level: int) -> None:
        if left == 0:
            stats.per_depth_calls[level] += 1
            stats.rank_one_basis_calls += 1
            if kernels.has_rank_one_basis(rows, flats):
                found.append(rows)
            return
        if len(u) <= 1:
            sub, tests, per = kernels.bdez_tree(rows, cand, left, flats)
            found.extend(sub)
            stats.rank_one_basis_calls += tests
            stats.add_depths(per, level)
            return
        stats.per_depth_calls[level] += 1
        orbs = _orbits_mod(cand, u, rows)
        for i, orb in enumerate(orbs):
            phi = orb[0]
            child = kernels.insert_row(rows, phi)
            if left == 1:
                stats.per_depth_calls[level + 1] += 1
                stats.rank_one_basis_calls += 1
                if kernels.has_rank_one_basis(child, flats):
                    found.append(child)
                continue
            rest = kernels.reduce_all([x for o in orbs[i:] for x in o], child)
            u2 = [s for s in u if all(kernels.reduce_vec(s.apply_flat(x), child) == 0 for x in child)]
            rec(child, rest, u2, left - 1, level + 1)

    rec(space.echelon, kernels.reduce_all(flats, space.echelon), elems, r - space.dim, 0)
    stats.nodes_visited = sum(stats.per_depth_calls)
    reps = _unique_sorted(found, space.m, space.n)
    stats.wall_time = time.perf_counter() - t0
    return SolutionSet(space, r, reps), stats


def orbit_keys(v: Subspace, elems: Sequence[RpAutomorphism]) -> set[tuple[int, ...]]:
    return {apply_subspace(s, v).echelon for s in elems}


def expand_orbits(sols: SolutionSet, group: GeneratedGroup) -> SolutionSet:
    """Union of the orbits of the representatives, with one canonical representative per class."""
    elems = group.elements()
    members: set[tuple[int, ...]] = set()
    classes: list[tuple[int, ...]] = []
    for v in sols.representatives:
        if v.echelon in members:
            continue
        orb = orbit_keys(v, elems)
        members |= orb
        classes.append(min(orb))
    sp = sols.target
    reps = [Subspace(sp.m, sp.n, e) for e in sorted(classes)]
    allm = [Subspace(sp.m, sp.n, e) for e in sorted(members)]
    return SolutionSet(sp, sols.r, reps, classes=len(reps), total=len(allm), members=allm)


# covering route ---------------------------------------------------------------


def _rank_profile(flats: Sequence[int], m: int, n: int) -> list[int]:
    return sorted(flat_rank(x, m, n) for x in flats)


def _canonical_under(v: Subspace, elems: Sequence[RpAutomorphism]) -> tuple[int, ...]:
    return min(apply_subspace(s, v).echelon for s in elems)


def intermediate_set(
    omega_store,
    family: Sequence[BilinearForm],
    m: int,
    n: int,
    target_dim: int,
    stab_family: GeneratedGroup | None = None,
) -> list[Subspace]:
    """One W ⊇ F per stb(F)-orbit of the rank-one-spanned spaces of dimension ``target_dim``.

    Walks the classification representatives W, looks for k-subsets S of W
    with the rank profile of F that some sigma maps onto F, and keeps W∘sigma.
    Duplicates are removed with a canonical key under stb(F).
    """
    classes = omega_store.restricted(target_dim, m, n)
    k = len(family)
    if k == 0:
        return list(classes)
    if stab_family is None:
        stab_family = family_stabilizer(family, m, n)
    st_elems = stab_family.elements()
    f_flats = [f.bits for f in family]
    f_set = set(f_flats)
    profile = _rank_profile(f_flats, m, n)
    out: dict[tuple[int, ...], Subspace] = {}
    for w in classes:
        for sigma in _family_maps(w, family, profile):
            img = apply_subspace(sigma, w)
            if not all(img.reduce(x) == 0 for x in f_set):
                raise AssertionError("mapped subspace misses the family")
            key = _canonical_under(img, st_elems)
            if key not in out:
                out[key] = Subspace(m, n, key)
    return [out[kk] for kk in sorted(out)]


def _family_maps(w: Subspace, family: Sequence[BilinearForm], profile: list[int]):
    """sigma with S∘sigma = F for k-subsets S of W; yields one sigma per working subset."""
    m, n = w.m, w.n
    elems = [x for x in w.elements() if x]
    ranks = {x: flat_rank(x, m, n) for x in elems}
    k = len(family)
    wanted = set(profile)
    pool = [x for x in elems if ranks[x] in wanted]
    mats = [f.matrix for f in family]
    if k == 1:
        to_f = rank_normalizer(mats[0]).inverse()
        for x in pool:
            if ranks[x] == profile[0]:
                yield rank_normalizer(BilinearForm(m, n, x).matrix).compose(to_f)
        return
    if k == 2 and m == n:
        ell = m
        pair = pencil_normalize(mats[0], mats[1], ell)
        if pair:
            back = pair.inverse()
            r0, r1 = flat_rank(family[0].bits, m, n), flat_rank(family[1].bits, m, n)
            firsts = [x for x in pool if ranks[x] == r0]
            seconds = [x for x in pool if ranks[x] == r1]
            for x in firsts:
                mx = BilinearForm(m, n, x).matrix
                xinv = invert(mx)
                for y in seconds:
                    if y == x:
                        continue
                    kmat = mul(xinv, BilinearForm(m, n, y).matrix)
                    if _nil_max(kmat, ell):
                        s = pencil_normalize(mx, BilinearForm(m, n, y).matrix, ell)
                        yield s.compose(back)
            return
    for subset in combinations(pool, k):
        if sorted(ranks[x] for x in subset) != profile:
            continue
        if len(kernels.echelon_of(list(subset))) != k:
            continue
        sigma = set_map_search([BilinearForm(m, n, x) for x in subset], list(family))
        if sigma:
            yield sigma


def _nil_max(k: BitMatrix, ell: int) -> bool:
    p = power(k, ell - 1)
    return any(p.rows) and not any(mul(p, k).rows)


def covering_sets_method(
    t: TargetMap,
    r: int,
    omega_store,
    cap: int = 1 << 20,
) -> tuple[SolutionSet, SearchStats]:
    """C_r(T) from the stem of T, the classification sets and the stabilizer of T."""
    space = t.space
    t0 = time.perf_counter()
    stab = t.stabilizer(cap)
    stab_elems = stab.elements()
    flats = rank_one_flats(t.m, t.n)
    stats = SearchStats(per_depth_calls=[0])
    found: set[tuple[int, ...]] = set()
    for entry in t.stem:
        branch = _covering_branch(t, space, stab, entry, r, omega_store, flats, cap)
        found |= branch["found"]
        stats.rank_one_basis_calls += branch["tests"]
        stats.branches[entry.label or "branch"] = {
            "q": branch["q"],
            "transversal": branch["l"],
            "tests": branch["tests"],
            "found": len(branch["found"]),
        }
    stats.per_depth_calls[0] = stats.rank_one_basis_calls
    reps = _unique_sorted(found, t.m, t.n)
    sols = expand_orbits(SolutionSet(space, r, reps), GeneratedGroup.from_elements(stab_elems, t.m, t.n))
    stats.nodes_visited = stats.rank_one_basis_calls
    stats.wall_time = time.perf_counter() - t0
    return sols, stats


def _covering_branch(t, space, stab, entry: StemEntry, r, omega_store, flats, cap) -> dict:
    m, n = t.m, t.n
    if entry.sub_target is not None:
        # hyperplane branch: solutions V' ⊇ H of dim r-1, then V = V' + phi
        h = Subspace.from_flats(m, n, (f.bits for f in entry.sub_target))
        base, r_branch = h, r - 1
        extra = [x for x in t.space.elements() if x and flat_rank(x, m, n) == 1]
    else:
        base, r_branch, extra = space, r, []
    k = entry.k
    d = r_branch - base.dim + k
    fam = list(entry.family)
    st_f = family_stabilizer(fam, m, n, cap)
    q = intermediate_set(omega_store, fam, m, n, d, st_f)
    if entry.subgroup_gens and not stab.materialized:
        u = GeneratedGroup(list(entry.subgroup_gens), m, n, size_cap=cap)
    else:
        u = setwise_stabilizer(stab, fam) if fam else GeneratedGroup.from_elements(stab.elements(), m, n)
    transversal = left_transversal(st_f, u)
    found: set[tuple[int, ...]] = set()
    tests = 0
    for w in q:
        for sigma in transversal:
            img = [sigma.apply_flat(x) for x in w.echelon]
            rows = kernels.echelon_of(list(base.echelon) + img)
            if len(rows) != r_branch:
                continue
            if extra:
                rows = kernels.echelon_of(list(rows) + extra)
                if len(rows) != r or any(kernels.reduce_vec(x, rows) for x in space.echelon):
                    continue
            tests += 1
            if kernels.has_rank_one_basis(rows, flats):
                found.add(rows)
    return {"found": found, "tests": tests, "q": len(q), "l": len(transversal)}


# Hamming weights ----------------------------------------------------------------


def _coords(x: BilinearForm | int, basis: Sequence[RankOneForm]) -> int:
    flat = x.bits if isinstance(x, BilinearForm) else x
    c = express(flat, [b.bits for b in basis])
    if c is None:
        raise NotInSpan("element not in the span of the basis")
    return c


def hamming_weight(x: BilinearForm | int, basis: Sequence[RankOneForm]) -> int:
    return _coords(x, basis).bit_count()


def hamming_weight_set(s: Sequence[BilinearForm | int], basis: Sequence[RankOneForm]) -> int:
    support = 0
    for x in s:
        support |= _coords(x, basis)
    return support.bit_count()


def e4_filter(w: Subspace, basis: Sequence[RankOneForm], anchors: Sequence[BilinearForm | int]) -> bool:
    """Keep W when the weight of the anchor sum is additive and exceeds 6."""
    total = 0
    acc = 0
    for a in anchors:
        flat = a.bits if isinstance(a, BilinearForm) else a
        if w.reduce(flat):
            raise NotInSpan("anchor not in W")
        total += hamming_weight(flat, basis)
        acc ^= flat
    hw = hamming_weight(acc, basis)
    return hw == total and hw > 6


# cost extrapolation ---------------------------------------------------------------


def estimate_next_level(stats: SearchStats | Sequence[int]) -> int:
    counts = stats.per_depth_calls if isinstance(stats, SearchStats) else list(stats)
    if len(counts) < 2 or not counts[-1] or not counts[-2]:
        raise InsufficientData("need two nonzero depth counts")
    a, b = counts[-2], counts[-1]
    return math.ceil(b / a) * b


def extrapolate(counts: Sequence[int], remaining: int) -> list[int]:
    """Successive estimates of the next ``remaining`` depth counts."""
    levels = list(counts)
    out = []
    for _ in range(remaining):
        nxt = estimate_next_level(levels)
        out.append(nxt)
        levels.append(nxt)
    return out
