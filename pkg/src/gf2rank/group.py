"""RP-automorphisms (X, Y) acting on Bl(m, n) by M -> X^T M Y, and finite groups of them."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations
from typing import Callable, Hashable, Iterable, Sequence, TypeVar

from . import kernels
from .forms import BilinearForm, Subspace, outer
from .gf2 import (
    BitMatrix,
    identity,
    invert,
    is_invertible,
    is_nilpotent_max_index,
    mul,
    nilpotent_conjugator,
    rcef,
    shift,
    transpose,
    _rref_with_ops,
)

DEFAULT_CAP = 1 << 20

P = TypeVar("P", bound=Hashable)


class CapExceeded(RuntimeError):
    pass


class NotSubgroup(ValueError):
    pass


@dataclass(frozen=True)
class RpAutomorphism:
    X: BitMatrix
    Y: BitMatrix

    def __post_init__(self) -> None:
        if not (is_invertible(self.X) and is_invertible(self.Y)):
            raise ValueError("X and Y must be invertible")

    @classmethod
    def trusted(cls, x: BitMatrix, y: BitMatrix) -> RpAutomorphism:
        """Build without the invertibility check (products of invertible pairs)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "X", x)
        object.__setattr__(obj, "Y", y)
        return obj

    @classmethod
    def identity(cls, m: int, n: int) -> RpAutomorphism:
        return cls.trusted(identity(m), identity(n))

    @property
    def m(self) -> int:
        return self.X.nrows

    @property
    def n(self) -> int:
        return self.Y.nrows

    @property
    def key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.X.rows, self.Y.rows

    def __hash__(self) -> int:
        return hash(self.key)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RpAutomorphism) and self.key == other.key

    def compose(self, other: RpAutomorphism) -> RpAutomorphism:
        """The element acting as self first, then other."""
        return RpAutomorphism.trusted(mul(self.X, other.X), mul(self.Y, other.Y))

    def inverse(self) -> RpAutomorphism:
        return RpAutomorphism.trusted(invert(self.X), invert(self.Y))

    @cached_property
    def table(self) -> tuple[int, ...]:
        """Image of each flattened basis bit i*n+j, namely (row i of X)^T (row j of Y)."""
        n = self.n
        return tuple(
            outer(xi, yj, n) for xi in self.X.rows for yj in self.Y.rows
        )

    def apply_flat(self, flat: int) -> int:
        return kernels.apply_table(self.table, flat)

    def apply_matrix(self, mat: BitMatrix) -> BitMatrix:
        return mul(mul(transpose(self.X), mat), self.Y)


def apply(sigma: RpAutomorphism, phi: BilinearForm) -> BilinearForm:
    if (phi.m, phi.n) != (sigma.m, sigma.n):
        raise ValueError("shape mismatch")
    return BilinearForm(phi.m, phi.n, sigma.apply_flat(phi.bits))


def compose(sigma: RpAutomorphism, tau: RpAutomorphism) -> RpAutomorphism:
    return sigma.compose(tau)


def apply_subspace(sigma: RpAutomorphism, s: Subspace) -> Subspace:
    return Subspace(s.m, s.n, kernels.echelon_of([sigma.apply_flat(r) for r in s.echelon]))


def stabilizes(sigma: RpAutomorphism, s: Subspace) -> bool:
    return all(s.reduce(sigma.apply_flat(r)) == 0 for r in s.echelon)


@dataclass
class GeneratedGroup:
    """A finite group of RP-automorphisms given by generators, closure built on demand.

    When built from an explicit element list (``from_elements``) the closure
    is already materialized and generators are only informative.
    """

    generators: list[RpAutomorphism]
    m: int
    n: int
    size_cap: int = DEFAULT_CAP
    _closure: list[RpAutomorphism] | None = field(default=None, repr=False)

    @classmethod
    def from_elements(cls, elements: Sequence[RpAutomorphism], m: int, n: int) -> GeneratedGroup:
        elems = list(elements)
        return cls(generators=elems, m=m, n=n, size_cap=max(len(elems), 1), _closure=elems)

    @classmethod
    def trivial(cls, m: int, n: int) -> GeneratedGroup:
        e = RpAutomorphism.identity(m, n)
        return cls.from_elements([e], m, n)

    @property
    def materialized(self) -> bool:
        return self._closure is not None

    def elements(self) -> list[RpAutomorphism]:
        if self._closure is None:
            self._closure = closure(self)
        return self._closure

    def __len__(self) -> int:
        return len(self.elements())


def closure(g: GeneratedGroup) -> list[RpAutomorphism]:
    """All elements, by BFS over right multiplication with the generators."""
    if g._closure is not None:
        return g._closure
    e = RpAutomorphism.identity(g.m, g.n)
    seen = {e.key}
    out = [e]
    queue = deque([e])
    gens = [s for s in g.generators if s.key != e.key]
    while queue:
        x = queue.popleft()
        for s in gens:
            y = x.compose(s)
            if y.key not in seen:
                seen.add(y.key)
                out.append(y)
                if len(out) > g.size_cap:
                    raise CapExceeded(f"group closure exceeds {g.size_cap} elements")
                queue.append(y)
    return out


def orbits(
    points: Iterable[P],
    group: GeneratedGroup,
    act: Callable[[RpAutomorphism, P], P],
    key: Callable[[P], object] | None = None,
) -> list[list[P]]:
    """Partition points into orbits; each orbit sorted, orbits sorted by their minimum.

    Points outside the given list but reached by the action are kept, so the
    input should be a union of orbits.
    """
    key = key or (lambda p: p)
    remaining = list(dict.fromkeys(points))
    seen: set = set()
    result: list[list[P]] = []
    use_elements = group.materialized
    for p in remaining:
        if p in seen:
            continue
        if use_elements:
            orb = {act(s, p) for s in group.elements()}
            orb.add(p)
        else:
            orb = {p}
            queue = deque([p])
            while queue:
                x = queue.popleft()
                for s in group.generators:
                    y = act(s, x)
                    if y not in orb:
                        orb.add(y)
                        queue.append(y)
        seen |= orb
        result.append(sorted(orb, key=key))
    result.sort(key=lambda o: key(o[0]))
    return result


def subgroup_where(group: GeneratedGroup, pred: Callable[[RpAutomorphism], bool]) -> GeneratedGroup:
    return GeneratedGroup.from_elements([s for s in group.elements() if pred(s)], group.m, group.n)


def setwise_stabilizer(group: GeneratedGroup, forms: Sequence[BilinearForm | int]) -> GeneratedGroup:
    flats = {f.bits if isinstance(f, BilinearForm) else f for f in forms}
    if not flats:
        return GeneratedGroup.from_elements(group.elements(), group.m, group.n)
    return subgroup_where(group, lambda s: {s.apply_flat(x) for x in flats} == flats)


def pointwise_stabilizer(group: GeneratedGroup, forms: Sequence[BilinearForm | int]) -> GeneratedGroup:
    flats = [f.bits if isinstance(f, BilinearForm) else f for f in forms]
    return subgroup_where(group, lambda s: all(s.apply_flat(x) == x for x in flats))


def subspace_stabilizer_within(group: GeneratedGroup, s: Subspace) -> GeneratedGroup:
    return subgroup_where(group, lambda sigma: stabilizes(sigma, s))


def left_transversal(group: GeneratedGroup, sub: GeneratedGroup) -> list[RpAutomorphism]:
    """One representative g per left coset g·H, in closure order."""
    g_elems = group.elements()
    h_elems = sub.elements()
    g_keys = {x.key for x in g_elems}
    if any(h.key not in g_keys for h in h_elems):
        raise NotSubgroup("H is not contained in G")
    covered: set = set()
    reps = []
    for g in g_elems:
        if g.key in covered:
            continue
        reps.append(g)
        for h in h_elems:
            covered.add(g.compose(h).key)
    if len(reps) * len(h_elems) != len(g_elems):
        raise NotSubgroup("coset sizes do not divide the group")
    return reps


def orbit_of_subspace(group: GeneratedGroup, s: Subspace) -> set[tuple[int, ...]]:
    return {apply_subspace(sigma, s).echelon for sigma in group.elements()}


def canonical_subspace_key(group: GeneratedGroup, s: Subspace) -> tuple[int, ...]:
    """Lexicographically minimal echelon over the orbit of S."""
    return min(orbit_of_subspace(group, s))


class NotEquivalent:
    """Marker returned when no normalizing automorphism exists."""

    _instance: NotEquivalent | None = None

    def __new__(cls) -> NotEquivalent:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __bool__(self) -> bool:
        return False

    def __repr__(self) -> str:
        return "NotEquivalent"


NOT_EQUIVALENT = NotEquivalent()
NotFound = NotEquivalent
NOT_FOUND = NOT_EQUIVALENT


def pencil_normalize(m0: BitMatrix, m1: BitMatrix, ell: int) -> RpAutomorphism | NotEquivalent:
    """sigma = (X, Y) with X^T M0 Y = I and X^T M1 Y = N, when it exists."""
    if m0.shape != (ell, ell) or m1.shape != (ell, ell) or not is_invertible(m0):
        return NOT_EQUIVALENT
    k = mul(invert(m0), m1)
    if not is_nilpotent_max_index(k, ell):
        return NOT_EQUIVALENT
    y = nilpotent_conjugator(k)
    x = transpose(invert(mul(m0, y)))
    sigma = RpAutomorphism.trusted(x, y)
    # self-check by direct multiplication
    if sigma.apply_matrix(m0) != identity(ell) or sigma.apply_matrix(m1) != shift(ell):
        raise AssertionError("pencil normalization failed its own check")
    return sigma


def rank_normalizer(mat: BitMatrix) -> RpAutomorphism:
    """sigma with X^T M Y = J_r, the matrix with I_r in the top-left corner."""
    red, ops = _rref_with_ops(mat.rows, mat.ncols)
    e = BitMatrix(tuple(ops), mat.nrows)
    _, cols = rcef(BitMatrix(tuple(red), mat.ncols))
    return RpAutomorphism.trusted(transpose(e), cols)


def _as_matrix(f: BilinearForm | BitMatrix) -> BitMatrix:
    return f.matrix if isinstance(f, BilinearForm) else f


def set_map_search(
    src: Sequence[BilinearForm | BitMatrix],
    dst: Sequence[BilinearForm | BitMatrix],
    fallback_group: GeneratedGroup | None = None,
) -> RpAutomorphism | NotEquivalent:
    """Some sigma with src∘sigma = dst as sets, or NOT_FOUND.

    Pairs go through pencil normalization when the destination pair is an
    (invertible, nilpotent-of-maximal-index) pencil; a single form goes through
    rank normal forms; anything left is swept over ``fallback_group`` after
    matching the first form.
    """
    s_mats = [_as_matrix(f) for f in src]
    d_mats = [_as_matrix(f) for f in dst]
    k = len(s_mats)
    if k != len(d_mats) or k > 3:
        return NOT_FOUND
    if k == 0:
        return RpAutomorphism.identity(1, 1) if not src else NOT_FOUND
    m, n = d_mats[0].shape
    s_ranks = [_mrank(x) for x in s_mats]
    d_ranks = [_mrank(x) for x in d_mats]
    if sorted(s_ranks) != sorted(d_ranks):
        return NOT_FOUND
    d_set = {x.rows for x in d_mats}
    # anchor the largest-rank destination elements first
    order = sorted(range(k), key=lambda i: -d_ranks[i])
    d_sorted = [d_mats[i] for i in order]
    for perm in permutations(range(k)):
        s_sorted = [s_mats[p] for p in perm]
        if [_mrank(x) for x in s_sorted] != [_mrank(x) for x in d_sorted]:
            continue
        sigma = _map_prefix(s_sorted, d_sorted, fallback_group)
        if sigma is None:
            continue
        if {sigma.apply_matrix(x).rows for x in s_mats} == d_set:
            return sigma
        if fallback_group is not None:
            for g in fallback_group.elements():
                tau = sigma.compose(g)
                if {tau.apply_matrix(x).rows for x in s_mats} == d_set:
                    return tau
    return NOT_FOUND


def _mrank(x: BitMatrix) -> int:
    from .gf2 import rank

    return rank(x)


def _map_prefix(s: list[BitMatrix], d: list[BitMatrix], fallback: GeneratedGroup | None) -> RpAutomorphism | None:
    ell = d[0].nrows
    if len(s) >= 2 and d[0].shape == (ell, ell):
        to_d = pencil_normalize(d[0], d[1], ell)
        if to_d:
            from_s = pencil_normalize(s[0], s[1], ell)
            if not from_s:
                return None
            return from_s.compose(to_d.inverse())
    first = rank_normalizer(s[0]).compose(rank_normalizer(d[0]).inverse())
    if len(s) == 1:
        return first
    if fallback is None:
        return None
    target = d[1].rows
    img = first.apply_matrix(s[1])
    for g in fallback.elements():
        if g.apply_matrix(img).rows == target:
            return first.compose(g)
    return None


def gl_pair_group(m: int, n: int, cap: int = DEFAULT_CAP) -> GeneratedGroup:
    """GL_m × GL_n as a generated group (closure only practical for tiny m, n)."""
    from .gf2 import gl_generators

    im, iv = identity(m), identity(n)
    gens = [RpAutomorphism.trusted(g, iv) for g in gl_generators(m) if g != im]
    gens += [RpAutomorphism.trusted(im, g) for g in gl_generators(n) if g != iv]
    return GeneratedGroup(gens, m, n, size_cap=cap)


def family_stabilizer(forms: Sequence[BilinearForm], m: int, n: int, cap: int = DEFAULT_CAP) -> GeneratedGroup:
    """Setwise stabilizer of a family inside the whole of GL_m × GL_n.

    Handled cases: the empty family (closure of GL_m × GL_n) and families
    with an invertible square member M0, whose pointwise stabilizer is
    {(X, M0^{-1} X^{-T} M0)}, a copy of GL_m. Other families raise CapExceeded.
    """
    flats = [f.bits for f in forms]
    if not flats:
        return GeneratedGroup.from_elements(closure(gl_pair_group(m, n, cap)), m, n)
    from .gf2 import gl_generators

    mats = [f.matrix for f in forms]
    anchor = next((i for i, x in enumerate(mats) if m == n and is_invertible(x)), None)
    if anchor is None:
        raise CapExceeded("no structural description of this family's stabilizer")
    m0 = mats[anchor]
    m0inv = invert(m0)
    gens = []
    for g in gl_generators(m):
        y = mul(mul(m0inv, transpose(invert(g))), m0)
        gens.append(RpAutomorphism.trusted(g, y))
    point = closure(GeneratedGroup(gens, m, n, size_cap=cap))
    out = []
    target = set(flats)
    for j, other in enumerate(mats):
        if _mrank(other) != m:
            continue
        tau = rank_normalizer(m0).compose(rank_normalizer(other).inverse())
        for g in point:
            s = g.compose(tau)
            if {s.apply_flat(x) for x in flats} == target:
                out.append(s)
    return GeneratedGroup.from_elements(out, m, n)
