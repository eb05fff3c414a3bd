from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from gf2rank import kernels
from gf2rank.forms import RankOneForm, Subspace, flat_rank, outer
from gf2rank.search import (
    InsufficientData,
    NotInSpan,
    bdez,
    bdez_stab,
    covering_sets_method,
    e4_filter,
    estimate_next_level,
    expand_orbits,
    extrapolate,
    hamming_weight,
    hamming_weight_set,
    intermediate_set,
)
from gf2rank.targets import circulant_product, matrix_product, parse_target, poly_product, short_product

pure = kernels.BACKEND == "python"


def spans(sols):
    return {frozenset(Subspace(sols.target.m, sols.target.n, k).elements()) for k in sols.keys}


@pytest.mark.parametrize(
    "tid,r",
    [("poly:2", 3), ("poly:2", 4), ("circulant:3", 4), ("circulant:3", 3), ("short:3", 4)],
)
def test_bdez_against_exhaustive_subsets(tid, r):
    t = parse_target(tid)
    sols, _ = bdez(t, r)
    want = oracles.covering_spaces([f.bits for f in t.forms], t.m, t.n, r)
    assert spans(sols) == want


def test_bdez_short3_fixture():
    sols, stats = bdez(short_product(3), 5)
    assert len(sols) == 12
    assert stats.tests == 590
    assert stats.per_depth_calls == [1, 39, 590]


def test_bdez_circulant3_fixture():
    sols, stats = bdez(circulant_product(3), 4)
    assert len(sols) == 3 and stats.tests == 36


@pytest.mark.skipif(pure, reason="about two minutes without the compiled kernels")
def test_bdez_mat222_fixture():
    sols, stats = bdez(matrix_product(2, 2, 2), 7)
    assert len(sols) == 36
    assert stats.per_depth_calls == [1, 198, 18381, 1054428]


def test_bdez_rejects_small_r():
    with pytest.raises(ValueError):
        bdez(short_product(3), 2)


@pytest.mark.parametrize("tid,r", [("poly:2", 3), ("short:3", 5), ("circulant:3", 4), ("mat:2x2x2", 7)])
def test_stab_expansion_equals_plain(tid, r, store):
    t = parse_target(tid)
    plain, _ = bdez(t, r)
    reps, _ = bdez_stab(t, None, r)
    assert expand_orbits(reps, t.stabilizer()).keys == plain.keys


@pytest.mark.parametrize("tid,r", [("poly:2", 3), ("short:3", 5), ("circulant:3", 4), ("short:3", 4)])
def test_covering_equals_plain(tid, r, store):
    t = parse_target(tid)
    plain, _ = bdez(t, r)
    cov, _ = covering_sets_method(t, r, store)
    assert cov.keys == plain.keys


def test_stab_fixtures():
    _, st1 = bdez_stab(circulant_product(3), None, 4)
    assert st1.tests == 6
    reps, st2 = bdez_stab(matrix_product(2, 2, 2), None, 7)
    assert len(reps) == 1 and st2.tests == 6746


def test_stab_requires_stabilizing_group():
    from gf2rank.group import GeneratedGroup, RpAutomorphism
    from gf2rank.gf2 import BitMatrix, identity

    bad = GeneratedGroup([RpAutomorphism(BitMatrix((2, 1, 4), 3), identity(3))], 3, 3)
    with pytest.raises(ValueError):
        bdez_stab(short_product(3), bad, 5)


def test_intermediate_sets_short3(store):
    t = short_product(3)
    # #C_3(Phi_0) = 28 and #C_4(Phi_0, Phi_1) = 6, checked against subsets
    assert len(oracles.covering_spaces([t.forms[0].bits], 3, 3, 3)) == 28
    assert len(oracles.covering_spaces([f.bits for f in t.forms[:2]], 3, 3, 4)) == 6
    from gf2rank.group import family_stabilizer, orbit_of_subspace

    for fam, d, raw in (([t.forms[0]], 3, 28), (list(t.forms[:2]), 4, 6)):
        st_f = family_stabilizer(fam, 3, 3)
        q = intermediate_set(store, fam, 3, 3, d, st_f)
        members = set().union(*(orbit_of_subspace(st_f, w) for w in q))
        assert len(members) == raw


def test_covering_short4(store):
    t = short_product(4)
    sols, stats = covering_sets_method(t, 8, store)
    assert sols.total == 1440
    assert sols.classes == 16
    assert sols.classes_under(t.class_group()) == 220
    assert stats.tests == 282
    assert stats.branches["I,N"]["transversal"] == 1


@st.composite
def rank_one_bases(draw):
    m = draw(st.integers(2, 4))
    n = draw(st.integers(2, 4))
    out: list[RankOneForm] = []
    span: tuple[int, ...] = ()
    for _ in range(draw(st.integers(1, 6))):
        g = RankOneForm(draw(st.integers(1, (1 << m) - 1)), draw(st.integers(1, (1 << n) - 1)), m, n)
        if kernels.reduce_vec(g.bits, span):
            span = kernels.insert_row(span, g.bits)
            out.append(g)
    return m, n, out


@settings(max_examples=1500)
@given(rank_one_bases(), st.integers(0, 63))
def test_rank_at_most_hamming_weight(data, coeffs):
    m, n, basis = data
    x = 0
    for t, g in enumerate(basis):
        if (coeffs >> t) & 1:
            x ^= g.bits
    assert flat_rank(x, m, n) <= hamming_weight(x, basis)
    assert hamming_weight_set([x], basis) == hamming_weight(x, basis)


def test_hamming_weight_outside_span():
    basis = [RankOneForm(1, 1, 2, 2)]
    with pytest.raises(NotInSpan):
        hamming_weight(outer(2, 2, 2), basis)


def test_e4_filter():
    basis = [RankOneForm(1 << i, 1 << j, 3, 3) for i in range(3) for j in range(3)]
    w = Subspace.from_flats(3, 3, [b.bits for b in basis])
    full = sum(b.bits for b in basis)
    row0 = outer(1, 7, 3)
    assert e4_filter(w, basis, [full])  # weight 9
    assert not e4_filter(w, basis, [row0])  # weight 3
    assert e4_filter(w, basis, [row0, full ^ row0])  # 3 + 6, additive
    assert not e4_filter(w, basis, [full, row0])  # overlapping supports
    with pytest.raises(NotInSpan):
        e4_filter(Subspace.from_flats(3, 3, [1]), basis, [2])


def test_estimates():
    assert estimate_next_level([1, 39, 590]) == 16 * 590
    assert extrapolate([1, 39, 590], 2) == [9440, 151040]
    with pytest.raises(InsufficientData):
        estimate_next_level([5])


def test_poly_product_rank():
    t = poly_product(2)
    assert len(bdez(t, 3)[0]) == 1
    assert len(bdez(t, 4)[0]) == len(oracles.covering_spaces([f.bits for f in t.forms], 2, 2, 4))
