from __future__ import annotations

import random
from itertools import combinations

import pytest

import oracles
from gf2rank.forms import Subspace
from gf2rank.group import orbits
from gf2rank.targets import (
    BadDescriptor,
    UnsupportedSize,
    anchor_elements,
    check_stabilizer,
    circulant_product,
    matrix_product,
    parse_target,
    short_product,
)

ALL = ["poly:2", "short:2", "short:3", "short:4", "short:5", "short:6", "circulant:3", "circulant:4",
       "circulant:5", "mat:2x2x2", "mat:3x2x3", "mat:2x3x2"]


@pytest.mark.parametrize("tid", ALL)
def test_generators_stabilize(tid):
    t = parse_target(tid)
    assert check_stabilizer(t)
    for e in t.stem:
        for g in e.subgroup_gens:
            assert {g.apply_flat(f.bits) for f in e.family} == {f.bits for f in e.family}
            assert t.space.contains_space(Subspace.from_flats(t.m, t.n, [g.apply_flat(x) for x in t.space.echelon]))


@pytest.mark.parametrize(
    "tid,forms",
    [
        ("poly:2", oracles.poly_product_forms(2)),
        ("short:3", oracles.short_product_forms(3)),
        ("short:5", oracles.short_product_forms(5)),
        ("circulant:4", oracles.circulant_forms(4)),
        ("circulant:5", oracles.circulant_forms(5)),
        ("mat:2x2x2", oracles.matprod_forms(2, 2, 2)),
        ("mat:2x3x2", oracles.matprod_forms(2, 3, 2)),
    ],
)
def test_forms_match_reference(tid, forms):
    assert [f.bits for f in parse_target(tid).forms] == forms


def test_known_ranks_and_flags():
    assert short_product(4).known_rank == 8
    assert matrix_product(3, 2, 3).known_rank == 15
    assert matrix_product(2, 3, 2).known_rank == 11
    assert short_product(5).long_run
    assert not short_product(4).long_run


@pytest.mark.parametrize("bad", ["poly", "short:x", "mat:2x2", "foo:3", ""])
def test_bad_descriptors(bad):
    with pytest.raises(BadDescriptor):
        parse_target(bad)


def test_unsupported_size():
    with pytest.raises(UnsupportedSize):
        parse_target("short:9")


def test_anchors():
    a = anchor_elements(short_product(3))
    assert a["I"].rank == 3 and a["N"].rank == 2
    m = anchor_elements(matrix_product(2, 2, 2))
    assert set(m) == {"Phi00", "Phi01", "Phi10", "Phi11"}


@pytest.mark.parametrize("ell,trials", [(3, 1000), (4, 200)])
def test_short_product_stem_covers_random_bases(ell, trials):
    # every basis of T has a pair whose span some stabilizer element sends to span{I, N}
    t = short_product(ell)
    elems = t.stabilizer().elements()
    target = oracles.span_key([f.bits for f in t.stem[0].family])
    vectors = t.space.elements()[1:]
    rng = random.Random(ell)
    for _ in range(trials):
        basis: list[int] = []
        while len(basis) < ell:
            v = rng.choice(vectors)
            if oracles.vec_rank(basis + [v]) > len(basis):
                basis.append(v)
        assert any(
            oracles.span_key([s.apply_flat(a), s.apply_flat(b)]) == target
            for a, b in combinations(basis, 2)
            for s in elems
        )


def test_circulant_hyperplane_single_orbit():
    # nonzero elements of H = {sum c_j Phi_j : sum c_j = 0} form one orbit
    t = circulant_product(5)
    h = Subspace.from_flats(5, 5, (f.bits for f in t.stem[1].sub_target))
    assert h.dim == 4
    pts = [x for x in h.elements() if x]
    orbs = orbits(pts, t.stabilizer(), lambda s, x: s.apply_flat(x))
    assert len(orbs) == 1 and len(orbs[0]) == 15


def test_matrix_product_rank_orbits():
    # single orbit per rank, so orbit sizes equal the rank counts of T
    t = matrix_product(2, 2, 2)
    pts = [x for x in t.space.elements() if x]
    orbs = orbits(pts, t.stabilizer(), lambda s, x: s.apply_flat(x))
    counts: dict[int, int] = {}
    for x in pts:
        r = oracles.rank(oracles.mat_from_flat(x, 4, 4))
        counts[r] = counts.get(r, 0) + 1
    assert sorted(len(o) for o in orbs) == sorted(counts.values()) == [6, 9]
    assert counts == {2: 9, 4: 6}


def test_matrix_product_323_rank_orbits():
    t = matrix_product(3, 2, 3)
    pts = [x for x in t.space.elements() if x]
    orbs = orbits(pts, t.stabilizer(), lambda s, x: s.apply_flat(x))
    ranks = [{oracles.rank(oracles.mat_from_flat(x, 6, 6)) for x in o} for o in orbs]
    assert all(len(r) == 1 for r in ranks)
    assert len({next(iter(r)) for r in ranks}) == len(orbs)


def _span_orbit(gens, flats):
    start = oracles.span_key(flats)
    seen = {start}
    todo = [list(flats)]
    while todo:
        fl = todo.pop()
        for s in gens:
            img = [s.apply_flat(x) for x in fl]
            k = oracles.span_key(img)
            if k not in seen:
                seen.add(k)
                todo.append(img)
    return seen


def test_matrix_product_323_stem_covers_random_bases():
    # every basis has a subfamily whose span lies in the orbit of some stem span
    t = matrix_product(3, 2, 3)
    gens = list(t.stabilizer_gens)
    reach = {}
    for e in t.stem:
        reach.setdefault(len(e.family), set()).update(_span_orbit(gens, [f.bits for f in e.family]))
    vectors = t.space.elements()[1:]
    rng = random.Random(7)
    for _ in range(150):
        basis: list[int] = []
        while len(basis) < 9:
            v = rng.choice(vectors)
            if oracles.vec_rank(basis + [v]) > len(basis):
                basis.append(v)
        assert any(
            oracles.span_key(list(sub)) in keys for k, keys in reach.items() for sub in combinations(basis, k)
        )


def test_matrix_product_323_rank4_partner_orbits():
    # partners of Phi00 + Phi11 with a nonzero Phi22 coordinate, up to the maps fixing it: three orbits
    t = matrix_product(3, 2, 3)
    f = {(i, j): t.forms[i * 3 + j].bits for i in range(3) for j in range(3)}
    anchor = f[0, 0] ^ f[1, 1]
    fixing = [s for s in t.stabilizer().elements() if s.apply_flat(anchor) == anchor]
    # coordinates over the basis of forms
    coords = {}
    for mask in range(1, 512):
        x = 0
        for b in range(9):
            if mask >> b & 1:
                x ^= t.forms[b].bits
        coords[x] = mask
    partners = [
        x
        for x in coords
        if coords[x] >> 8 & 1 and oracles.rank(oracles.mat_from_flat(x, 6, 6)) in (2, 4)
    ]
    # orbits of span{anchor, x} under the maps fixing the anchor
    seen: set = set()
    classes = 0
    for x in partners:
        k = oracles.span_key([anchor, x])
        if k in seen:
            continue
        classes += 1
        for s in fixing:
            seen.add(oracles.span_key([anchor, s.apply_flat(x)]))
    assert classes == 3


def test_circulant_rank_five_single_orbit():
    t = circulant_product(5)
    pts = [x for x in t.space.elements() if x and oracles.rank(oracles.mat_from_flat(x, 5, 5)) == 5]
    orbs = orbits(pts, t.stabilizer(), lambda s, x: s.apply_flat(x))
    assert len(orbs) == 1 and len(pts) == 15
