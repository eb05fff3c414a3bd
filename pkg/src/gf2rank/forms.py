"""Bilinear forms, subspaces of Bl(m, n), rank-one generators and decompositions.

Forms are stored flattened: entry (i, j) of the m×n matrix is bit ``i*n + j``.
Subspaces keep a fully reduced echelon basis where the pivot of a row is its
highest set bit, so two subspaces are equal iff their echelon tuples are.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence

from . import kernels
from .gf2 import BitMatrix, rank_of_rows


class NotDecomposable(ValueError):
    pass


class DimensionTooLarge(ValueError):
    pass


def flatten_rows(rows: Sequence[int], n: int) -> int:
    flat = 0
    for i, r in enumerate(rows):
        flat |= r << (i * n)
    return flat


def unflatten(flat: int, m: int, n: int) -> tuple[int, ...]:
    mask = (1 << n) - 1
    return tuple((flat >> (i * n)) & mask for i in range(m))


def outer(alpha: int, beta: int, n: int) -> int:
    """Flattened matrix of alpha^T beta."""
    flat = 0
    i = 0
    while alpha:
        if alpha & 1:
            flat |= beta << (i * n)
        alpha >>= 1
        i += 1
    return flat


def flat_rank(flat: int, m: int, n: int) -> int:
    return rank_of_rows(unflatten(flat, m, n))


def rank_one_factors(flat: int, m: int, n: int) -> tuple[int, int] | None:
    """Return (alpha, beta) when the form has rank one, else None."""
    if not flat:
        return None
    mask = (1 << n) - 1
    beta = 0
    alpha = 0
    for i in range(m):
        r = (flat >> (i * n)) & mask
        if r:
            if beta and r != beta:
                return None
            beta = r
            alpha |= 1 << i
    return alpha, beta


@dataclass(frozen=True)
class BilinearForm:
    m: int
    n: int
    bits: int

    @classmethod
    def from_matrix(cls, mat: BitMatrix) -> BilinearForm:
        return cls(mat.nrows, mat.ncols, flatten_rows(mat.rows, mat.ncols))

    @property
    def matrix(self) -> BitMatrix:
        return BitMatrix(unflatten(self.bits, self.m, self.n), self.n)

    @property
    def rank(self) -> int:
        return flat_rank(self.bits, self.m, self.n)

    def __add__(self, other: BilinearForm) -> BilinearForm:
        return BilinearForm(self.m, self.n, self.bits ^ other.bits)

    def __call__(self, a: int, b: int) -> int:
        """Evaluate a^T M b for bit-packed vectors a, b."""
        acc = 0
        for i, r in enumerate(unflatten(self.bits, self.m, self.n)):
            if (a >> i) & 1:
                acc ^= (r & b).bit_count() & 1
        return acc


@dataclass(frozen=True, order=True)
class RankOneForm:
    alpha: int
    beta: int
    m: int = field(compare=False)
    n: int = field(compare=False)

    def __post_init__(self) -> None:
        if not (0 < self.alpha < (1 << self.m) and 0 < self.beta < (1 << self.n)):
            raise ValueError("alpha and beta must be nonzero and fit the shape")

    @property
    def bits(self) -> int:
        return outer(self.alpha, self.beta, self.n)

    @property
    def form(self) -> BilinearForm:
        return BilinearForm(self.m, self.n, self.bits)


def enumerate_rank_one(m: int, n: int) -> list[RankOneForm]:
    """All (2^m - 1)(2^n - 1) rank-one forms, alpha ascending then beta."""
    if not (1 <= m <= 8 and 1 <= n <= 8):
        raise ValueError("shape out of range")
    return [
        RankOneForm(a, b, m, n)
        for a, b in product(range(1, 1 << m), range(1, 1 << n))
    ]


@lru_cache(maxsize=None)
def _rank_one_flats(m: int, n: int) -> tuple[int, ...]:
    return tuple(g.bits for g in enumerate_rank_one(m, n))


def rank_one_flats(m: int, n: int) -> list[int]:
    return list(_rank_one_flats(m, n))


@dataclass(frozen=True)
class Subspace:
    m: int
    n: int
    echelon: tuple[int, ...]

    @classmethod
    def from_flats(cls, m: int, n: int, flats: Iterable[int]) -> Subspace:
        return cls(m, n, kernels.echelon_of(list(flats)))

    @property
    def dim(self) -> int:
        return len(self.echelon)

    @property
    def basis(self) -> list[BilinearForm]:
        return [BilinearForm(self.m, self.n, r) for r in self.echelon]

    def reduce(self, flat: int) -> int:
        return kernels.reduce_vec(flat, self.echelon)

    def __contains__(self, item: int | BilinearForm) -> bool:
        flat = item.bits if isinstance(item, BilinearForm) else item
        return self.reduce(flat) == 0

    def add(self, flats: Iterable[int]) -> Subspace:
        return Subspace(self.m, self.n, kernels.echelon_of(list(self.echelon) + list(flats)))

    def __add__(self, other: Subspace) -> Subspace:
        return self.add(other.echelon)

    def contains_space(self, other: Subspace) -> bool:
        return all(self.reduce(r) == 0 for r in other.echelon)

    def elements(self) -> list[int]:
        """All 2^dim elements, in Gray-code order starting at 0."""
        out = [0]
        for r in self.echelon:
            out += [x ^ r for x in out]
        return out


def subspace_from(forms: Sequence[BilinearForm], m: int | None = None, n: int | None = None) -> Subspace:
    if forms:
        m, n = forms[0].m, forms[0].n
        if any((f.m, f.n) != (m, n) for f in forms):
            raise ValueError("forms of different shapes")
    if m is None or n is None:
        raise ValueError("shape required for an empty list")
    return Subspace.from_flats(m, n, (f.bits for f in forms))


def reduce_mod(phi: BilinearForm, s: Subspace) -> BilinearForm:
    if (phi.m, phi.n) != (s.m, s.n):
        raise ValueError("shape mismatch")
    return BilinearForm(s.m, s.n, s.reduce(phi.bits))


def has_rank_one_basis(s: Subspace, g: Sequence[RankOneForm] | Sequence[int] | None = None) -> bool:
    """True iff the rank-one forms of S span S."""
    flats = _flats(s, g)
    return kernels.has_rank_one_basis(s.echelon, flats)


def rank_one_members(s: Subspace, g: Sequence[RankOneForm] | Sequence[int] | None = None) -> list[int]:
    return [x for x in _flats(s, g) if s.reduce(x) == 0]


def _flats(s: Subspace, g) -> list[int]:
    if g is None:
        return rank_one_flats(s.m, s.n)
    if g and isinstance(g[0], RankOneForm):
        return [x.bits for x in g]
    return list(g)


@dataclass(frozen=True)
class Decomposition:
    """Rank-one forms phi_t and an l×r coefficient matrix with Phi_h = sum_t C[h][t] phi_t."""

    rank_ones: tuple[RankOneForm, ...]
    coeffs: tuple[int, ...]
    target_id: str = ""

    @property
    def r(self) -> int:
        return len(self.rank_ones)


def extract_decomposition(
    v: Subspace,
    t: Subspace | Sequence[BilinearForm],
    g: Sequence[RankOneForm] | None = None,
    target_id: str = "",
) -> Decomposition:
    """Pick a rank-one basis of V greedily in generator order and express the target on it."""
    targets = _target_flats(t)
    gens = list(g) if g is not None else enumerate_rank_one(v.m, v.n)
    chosen: list[RankOneForm] = []
    span: list[int] = []
    for x in gens:
        if v.reduce(x.bits):
            continue
        if kernels.reduce_vec(x.bits, span):
            chosen.append(x)
            span = list(kernels.echelon_of(span + [x.bits]))
            if len(chosen) == v.dim:
                break
    if len(chosen) != v.dim:
        raise NotDecomposable("subspace has no rank-one basis")
    coeffs = []
    for phi in targets:
        c = express(phi, [x.bits for x in chosen])
        if c is None:
            raise NotDecomposable("target not contained in the subspace")
        coeffs.append(c)
    return Decomposition(tuple(chosen), tuple(coeffs), target_id)


def express(x: int, basis: Sequence[int]) -> int | None:
    """Coordinates of x over an independent family, bit t for basis[t]; None if outside the span."""
    rows: list[tuple[int, int]] = []
    for t, b in enumerate(basis):
        tag = 1 << t
        for r, rt in rows:
            if b ^ r < b:
                b ^= r
                tag ^= rt
        if not b:
            raise ValueError("basis is not independent")
        rows.append((b, tag))
        rows.sort(reverse=True)
    coords = 0
    for r, rt in rows:
        if x ^ r < x:
            x ^= r
            coords ^= rt
    return coords if x == 0 else None


def _target_flats(t) -> list[int]:
    if isinstance(t, Subspace):
        return list(t.echelon)
    return [f.bits if isinstance(f, BilinearForm) else f for f in t]


def verify_decomposition(t: Subspace | Sequence[BilinearForm], d: Decomposition) -> bool:
    targets = _target_flats(t)
    if len(targets) != len(d.coeffs):
        return False
    flats = [x.bits for x in d.rank_ones]
    if any(rank_one_factors(f, x.m, x.n) is None for f, x in zip(flats, d.rank_ones)):
        return False
    if len(kernels.echelon_of(flats)) != len(flats):
        return False
    for phi, c in zip(targets, d.coeffs):
        acc = 0
        for k, f in enumerate(flats):
            if (c >> k) & 1:
                acc ^= f
        if acc != phi:
            return False
    return True


def rank_distribution(s: Subspace) -> list[int]:
    if s.dim > 20:
        raise DimensionTooLarge(f"dim {s.dim} > 20")
    counts = [0] * (min(s.m, s.n) + 1)
    for x in s.elements():
        counts[flat_rank(x, s.m, s.n)] += 1
    return counts
