"""Benchmark bilinear maps, their known stabilizer generators and stems."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

from .forms import BilinearForm, Subspace, flatten_rows
from .gf2 import (
    BitMatrix,
    gl_generators,
    identity,
    invert,
    is_invertible,
    kron,
    mul,
    nilpotent_conjugator,
    power,
    shift,
    transpose,
)
from .group import GeneratedGroup, RpAutomorphism, stabilizes


class UnsupportedSize(ValueError):
    pass


class BadDescriptor(ValueError):
    pass


@dataclass(frozen=True)
class StemEntry:
    """A family F_i of the stem, with a subgroup U_i of stb(T) ∩ stb(F_i).

    ``subgroup_gens`` left empty means "compute U_i by filtering the
    stabilizer closure", which the covering search does when the closure fits.
    """

    family: tuple[BilinearForm, ...]
    subgroup_gens: tuple[RpAutomorphism, ...] = ()
    label: str = ""
    # for a branch of a hyperplane H of T rather than of T itself
    sub_target: tuple[BilinearForm, ...] | None = None

    @property
    def k(self) -> int:
        return len(self.family)


@dataclass(frozen=True)
class TargetMap:
    id: str
    kind: str
    params: tuple[int, ...]
    m: int
    n: int
    forms: tuple[BilinearForm, ...]
    stabilizer_gens: tuple[RpAutomorphism, ...]
    stem: tuple[StemEntry, ...]
    known_rank: int | None = None
    long_run: bool = False
    notes: dict = field(default_factory=dict, compare=False)
    # group used for the published class counts, when it is not stb(T)
    class_gens: tuple[RpAutomorphism, ...] | None = None

    @property
    def space(self) -> Subspace:
        return Subspace.from_flats(self.m, self.n, (f.bits for f in self.forms))

    @property
    def ell(self) -> int:
        return len(self.forms)

    ell_dim = ell

    def stabilizer(self, cap: int = 1 << 20) -> GeneratedGroup:
        return GeneratedGroup(list(self.stabilizer_gens), self.m, self.n, size_cap=cap)

    def class_group(self, cap: int = 1 << 20) -> GeneratedGroup:
        if self.class_gens is None:
            return self.stabilizer(cap)
        return GeneratedGroup(list(self.class_gens), self.m, self.n, size_cap=cap)


def _form(mat: BitMatrix) -> BilinearForm:
    return BilinearForm.from_matrix(mat)


def _poly_matrix(coeffs: int, base: BitMatrix) -> BitMatrix:
    """R(B) for R given by its coefficient bits."""
    n = base.nrows
    acc = BitMatrix(tuple(0 for _ in range(n)), n)
    p = identity(n)
    while coeffs:
        if coeffs & 1:
            acc = acc + p
        p = mul(p, base)
        coeffs >>= 1
    return acc


def _check(sizes: range, ell: int) -> None:
    if ell not in sizes:
        raise UnsupportedSize(f"size {ell} out of range")


# short product ---------------------------------------------------------------


def short_product_forms(ell: int) -> tuple[BilinearForm, ...]:
    n = shift(ell)
    return tuple(_form(power(n, j)) for j in range(ell))


def short_product_stabilizer(ell: int) -> list[RpAutomorphism]:
    _check(range(2, 7), ell)
    nmat = shift(ell)
    i = identity(ell)
    gens = []
    for j in range(1, ell):
        r = _poly_matrix(1 | (1 << j), nmat)
        gens.append(RpAutomorphism(i, r))
    gens.extend(stem_subgroup_short(ell))
    for j in range(2, ell):
        r = _poly_matrix(0b10 | (1 << j), nmat)
        p = nilpotent_conjugator(r)
        gens.append(RpAutomorphism(transpose(p), invert(p)))
    return gens


def stem_subgroup_short(ell: int) -> list[RpAutomorphism]:
    """Generators of stb(I) ∩ stb(N): the pairs (R(N)^{-T}, R(N))."""
    nmat = shift(ell)
    out = []
    for j in range(1, ell):
        r = _poly_matrix(1 | (1 << j), nmat)
        out.append(RpAutomorphism(transpose(invert(r)), r))
    return out


def short_product(ell: int) -> TargetMap:
    _check(range(2, 7), ell)
    forms = short_product_forms(ell)
    stem = (StemEntry(forms[:2], tuple(stem_subgroup_short(ell)), "I,N"),)
    known = {2: 3, 3: 5, 4: 8, 5: 11}.get(ell)
    return TargetMap(
        id=f"short:{ell}",
        kind="short",
        params=(ell,),
        m=ell,
        n=ell,
        forms=forms,
        stabilizer_gens=tuple(short_product_stabilizer(ell)),
        stem=stem,
        known_rank=known,
        long_run=ell >= 5,
        class_gens=tuple(short_product_translations(ell)),
    )


def short_product_translations(ell: int) -> list[RpAutomorphism]:
    """Generators of {(I, R(N)) : R(0) = 1}, of order 2^(ell-1).

    Orbits of C_r under this subgroup reproduce the published class counts
    for the short product; the full stabilizer gives fewer classes.
    """
    nmat = shift(ell)
    i = identity(ell)
    return [RpAutomorphism(i, _poly_matrix(1 | (1 << j), nmat)) for j in range(1, ell)]


# matrix product --------------------------------------------------------------


def matprod_form(p: int, q: int, r: int, i: int, j: int) -> BilinearForm:
    """Phi_ij = sum_h a_{i,h} b_{h,j}, a row-major in Bl's rows, b column-major."""
    m, n = p * q, q * r
    rows = [0] * m
    for h in range(q):
        rows[i * q + h] |= 1 << (j * q + h)
    return BilinearForm(m, n, flatten_rows(rows, n))


def _matprod_check(p: int, q: int, r: int) -> None:
    if not (p * q <= 6 and q * r <= 6 and min(p, q, r) >= 1):
        raise UnsupportedSize(f"matrix product {p}x{q}x{r} out of range")


def matrix_product_stabilizer(p: int, q: int, r: int) -> list[RpAutomorphism]:
    _matprod_check(p, q, r)
    ip, iq, ir = identity(p), identity(q), identity(r)
    gens = []
    for a in gl_generators(p):
        gens.append(RpAutomorphism(kron(a, transpose(iq)), kron(ir, iq)))
    for b in gl_generators(q):
        gens.append(RpAutomorphism(kron(ip, transpose(b)), kron(ir, invert(b))))
    for c in gl_generators(r):
        gens.append(RpAutomorphism(kron(ip, iq), kron(c, iq)))
    seen = set()
    out = []
    for g in gens:
        if g.key not in seen and g.key != RpAutomorphism.identity(p * q, q * r).key:
            seen.add(g.key)
            out.append(g)
    return out


def stem_for_matprod_323() -> list[StemEntry]:
    f = lambda i, j: matprod_form(3, 2, 3, i, j)  # noqa: E731
    a, b, c = f(0, 0), f(1, 1), f(2, 2)
    families = [
        ((a + b + c,), "E0"),
        ((a + b, f(0, 1) + c), "E1"),
        ((a + b, b + c), "E2"),
        ((a + b, c), "E3"),
        ((a, b, c), "E4"),
    ]
    return [StemEntry(fam, (), label) for fam, label in families]


def _stem_232() -> list[StemEntry]:
    f = lambda i, j: matprod_form(2, 3, 2, i, j)  # noqa: E731
    a, b = f(0, 0), f(1, 1)
    return [
        StemEntry((a + b, a + f(0, 1) + f(1, 0)), (), "E0"),
        StemEntry((a + b, a), (), "E1"),
    ]


def matrix_product(p: int, q: int, r: int) -> TargetMap:
    _matprod_check(p, q, r)
    forms = tuple(matprod_form(p, q, r, i, j) for i in range(p) for j in range(r))
    if (p, q, r) == (3, 2, 3):
        stem = tuple(stem_for_matprod_323())
    elif (p, q, r) == (2, 3, 2):
        stem = tuple(_stem_232())
    else:
        stem = (StemEntry((), (), "trivial"),)
    known = {(2, 2, 2): 7, (3, 2, 3): 15, (2, 3, 2): 11}.get((p, q, r))
    return TargetMap(
        id=f"mat:{p}x{q}x{r}",
        kind="mat",
        params=(p, q, r),
        m=p * q,
        n=q * r,
        forms=forms,
        stabilizer_gens=tuple(matrix_product_stabilizer(p, q, r)),
        stem=stem,
        known_rank=known,
        long_run=(p, q, r) != (2, 2, 2),
    )


# circulant product -----------------------------------------------------------


def circulant_forms(ell: int) -> tuple[BilinearForm, ...]:
    out = []
    for i in range(ell):
        rows = [1 << ((i - j) % ell) for j in range(ell)]
        out.append(BilinearForm(ell, ell, flatten_rows(rows, ell)))
    return tuple(out)


def _cyc_mul(a: int, b: int, ell: int) -> int:
    out = 0
    for i in range(ell):
        if (a >> i) & 1:
            out ^= ((b << i) | (b >> (ell - i))) & ((1 << ell) - 1)
    return out


def _mult_matrix(u: int, ell: int) -> BitMatrix:
    """Matrix of a -> u·a on column vectors; entry (i, k) = coeff i of u·X^k."""
    cols = [_cyc_mul(u, 1 << k, ell) for k in range(ell)]
    rows = tuple(sum(((cols[k] >> i) & 1) << k for k in range(ell)) for i in range(ell))
    return BitMatrix(rows, ell)


@lru_cache(maxsize=None)
def _circulant_stab(ell: int) -> tuple[RpAutomorphism, ...]:
    i = identity(ell)
    units = [u for u in range(1, 1 << ell) if is_invertible(_mult_matrix(u, ell))]
    gens = []
    for u in units:
        if u == 1:
            continue
        mu = _mult_matrix(u, ell)
        gens.append(RpAutomorphism(mu, i))
        gens.append(RpAutomorphism(i, mu))
    # ring automorphisms X -> g: g^ell = 1 and the powers of g form a basis
    for g in range(2, 1 << ell):
        pw = [1]
        for _ in range(ell - 1):
            pw.append(_cyc_mul(pw[-1], g, ell))
        if _cyc_mul(pw[-1], g, ell) != 1:
            continue
        mat_rows = tuple(sum(((pw[k] >> r) & 1) << k for k in range(ell)) for r in range(ell))
        mat = BitMatrix(mat_rows, ell)
        if is_invertible(mat):
            gens.append(RpAutomorphism(mat, mat))
    return tuple(gens)


def circulant_stabilizer(ell: int) -> list[RpAutomorphism]:
    _check(range(3, 6), ell)
    return list(_circulant_stab(ell))


def circulant_product(ell: int) -> TargetMap:
    _check(range(3, 6), ell)
    forms = circulant_forms(ell)
    if ell == 5:
        hyper = forms[0] + forms[1] + forms[2] + forms[3]
        # hyperplane H: elements with even weight over the coordinate forms
        h_basis = tuple(forms[j] + forms[j + 1] for j in range(4))
        stem = (
            StemEntry((forms[4],), (), "E0"),
            StemEntry((hyper,), (), "E1", sub_target=h_basis),
        )
    else:
        stem = (StemEntry((), (), "trivial"),)
    known = {3: 4, 4: 8, 5: 10}[ell]
    return TargetMap(
        id=f"circulant:{ell}",
        kind="circulant",
        params=(ell,),
        m=ell,
        n=ell,
        forms=forms,
        stabilizer_gens=tuple(circulant_stabilizer(ell)),
        stem=stem,
        known_rank=known,
        long_run=ell == 5,
    )


# full polynomial product -------------------------------------------------------


def poly_product(k: int) -> TargetMap:
    if k != 2:
        raise UnsupportedSize("only degree-1 times degree-1 products are supported")
    forms = []
    for c in range(2 * k - 1):
        rows = [0] * k
        for i in range(k):
            j = c - i
            if 0 <= j < k:
                rows[i] |= 1 << j
        forms.append(BilinearForm(k, k, flatten_rows(rows, k)))
    gens = tuple(RpAutomorphism(g, g) for g in gl_generators(k))
    return TargetMap(
        id=f"poly:{k}",
        kind="poly",
        params=(k,),
        m=k,
        n=k,
        forms=tuple(forms),
        stabilizer_gens=gens,
        stem=(StemEntry((), (), "trivial"),),
        known_rank=3,
    )


# descriptors -----------------------------------------------------------------

_DESCRIPTOR = re.compile(r"^(poly|short|circulant|circ|mat):(\d+)(?:x(\d+)x(\d+))?$")


def parse_target(desc: str) -> TargetMap:
    mt = _DESCRIPTOR.match(desc.strip())
    if not mt:
        raise BadDescriptor(f"bad target descriptor {desc!r}")
    kind, a, b, c = mt.groups()
    a = int(a)
    if kind == "mat":
        if b is None:
            raise BadDescriptor("mat targets need pxqxr")
        return matrix_product(a, int(b), int(c))
    if b is not None:
        raise BadDescriptor(f"bad target descriptor {desc!r}")
    if kind == "poly":
        return poly_product(a)
    if kind == "short":
        return short_product(a)
    return circulant_product(a)


def check_stabilizer(t: TargetMap) -> bool:
    space = t.space
    return all(stabilizes(g, space) for g in t.stabilizer_gens)


def anchor_elements(t: TargetMap) -> dict[str, BilinearForm]:
    """Named elements used by the stems: I, N for short products, Phi_ij for matrix products."""
    if t.kind == "short":
        return {"I": t.forms[0], "N": t.forms[1]}
    if t.kind == "mat":
        p, _, r = t.params
        return {f"Phi{i}{j}": t.forms[i * r + j] for i, j in product(range(p), range(r))}
    return {f"Phi{i}": f for i, f in enumerate(t.forms)}
