from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from gf2rank.forms import BilinearForm, Subspace, flat_rank
from gf2rank.gf2 import BitMatrix, identity, invert, mul, shift, transpose
from gf2rank.group import (
    NOT_EQUIVALENT,
    CapExceeded,
    GeneratedGroup,
    NotSubgroup,
    RpAutomorphism,
    apply,
    apply_subspace,
    closure,
    compose,
    family_stabilizer,
    gl_pair_group,
    left_transversal,
    orbits,
    pencil_normalize,
    pointwise_stabilizer,
    rank_normalizer,
    set_map_search,
    setwise_stabilizer,
    stabilizes,
    subspace_stabilizer_within,
)
from gf2rank.targets import matrix_product, short_product, stem_subgroup_short
from test_gf2 import invertibles


@st.composite
def automorphisms(draw, m=None, n=None):
    m = m or draw(st.integers(1, 5))
    n = n or draw(st.integers(1, 5))
    return RpAutomorphism(draw(invertibles(size=m)), draw(invertibles(size=n)))


@settings(max_examples=500)
@given(st.data())
def test_action_is_right_action(data):
    s = data.draw(automorphisms())
    t = data.draw(automorphisms(m=s.m, n=s.n))
    phi = BilinearForm(s.m, s.n, data.draw(st.integers(0, (1 << (s.m * s.n)) - 1)))
    assert apply(compose(s, t), phi) == apply(t, apply(s, phi))
    assert apply(RpAutomorphism.identity(s.m, s.n), phi) == phi
    assert apply(s.inverse(), apply(s, phi)) == phi


@settings(max_examples=500)
@given(st.data())
def test_action_matches_matrix_product_and_keeps_rank(data):
    s = data.draw(automorphisms())
    flat = data.draw(st.integers(0, (1 << (s.m * s.n)) - 1))
    mat = oracles.mat_from_flat(flat, s.m, s.n)
    want = oracles.matmul(oracles.matmul(oracles.transpose(s.X.to_lists()), mat), s.Y.to_lists())
    got = s.apply_flat(flat)
    assert got == oracles.flat_from_mat(want)
    assert flat_rank(got, s.m, s.n) == oracles.rank(mat)


def test_non_invertible_pair_rejected():
    with pytest.raises(ValueError):
        RpAutomorphism(shift(2), identity(2))


@pytest.mark.parametrize("ell,size", [(3, 32), (4, 256), (5, 2048)])
def test_short_product_stabilizer_order(ell, size):
    # 2^(3l-4)
    assert len(short_product(ell).stabilizer().elements()) == size == 2 ** (3 * ell - 4)


@pytest.mark.parametrize("ell", [3, 4, 5])
def test_stabilizer_of_i_and_n(ell):
    t = short_product(ell)
    g = t.stabilizer()
    sw = setwise_stabilizer(g, t.forms[:2])
    pw = pointwise_stabilizer(g, t.forms[:2])
    assert len(sw.elements()) == len(pw.elements()) == 2 ** (ell - 1)
    # the stem subgroup generators give the same group
    assert {x.key for x in closure(GeneratedGroup(stem_subgroup_short(ell), ell, ell))} == {
        x.key for x in sw.elements()
    }


def test_setwise_contains_pointwise():
    t = matrix_product(2, 2, 2)
    g = t.stabilizer()
    fam = [t.forms[0], t.forms[3]]
    pw = {x.key for x in pointwise_stabilizer(g, fam).elements()}
    sw = {x.key for x in setwise_stabilizer(g, fam).elements()}
    assert pw <= sw
    assert len(sw) % len(pw) == 0
    assert len(setwise_stabilizer(g, []).elements()) == len(g.elements())


def test_subspace_stabilizer_nested():
    t = short_product(4)
    g = t.stabilizer()
    s = Subspace.from_flats(4, 4, [t.forms[0].bits])
    h = subspace_stabilizer_within(g, s)
    assert len(g.elements()) % len(h.elements()) == 0
    assert all(stabilizes(x, s) for x in h.elements())
    assert len(subspace_stabilizer_within(g, t.space).elements()) == len(g.elements())


def test_closure_cap():
    g = gl_pair_group(3, 3, cap=100)
    with pytest.raises(CapExceeded):
        closure(g)


def test_orbits_partition():
    t = matrix_product(2, 2, 2)
    g = t.stabilizer()
    pts = [x for x in t.space.elements() if x]
    orbs = orbits(pts, g, lambda s, x: s.apply_flat(x))
    assert sorted(x for o in orbs for x in o) == sorted(pts)
    # the same partition from the generators alone
    lazy = GeneratedGroup(list(t.stabilizer_gens), t.m, t.n)
    assert orbits(pts, lazy, lambda s, x: s.apply_flat(x)) == orbs


def test_transversal():
    t = short_product(4)
    g = t.stabilizer()
    h = setwise_stabilizer(g, t.forms[:2])
    reps = left_transversal(g, h)
    assert len(reps) * len(h.elements()) == len(g.elements())
    cosets = [{r.compose(x).key for x in h.elements()} for r in reps]
    assert len(set().union(*cosets)) == len(g.elements())
    with pytest.raises(NotSubgroup):
        left_transversal(h, g)


@settings(max_examples=400)
@given(st.data())
def test_pencil_normalize(data):
    ell = data.draw(st.integers(1, 6))
    a = data.draw(invertibles(size=ell))
    b = data.draw(invertibles(size=ell))
    m0 = mul(mul(a, identity(ell)), b)
    m1 = mul(mul(a, shift(ell)), b)
    s = pencil_normalize(m0, m1, ell)
    assert s is not NOT_EQUIVALENT
    assert s.apply_matrix(m0) == identity(ell)
    assert s.apply_matrix(m1) == shift(ell)


def test_pencil_normalize_rejects():
    assert pencil_normalize(identity(3), identity(3), 3) is NOT_EQUIVALENT
    assert pencil_normalize(shift(3), shift(3), 3) is NOT_EQUIVALENT
    assert not NOT_EQUIVALENT


@settings(max_examples=400)
@given(st.data())
def test_rank_normalizer(data):
    m = data.draw(st.integers(1, 5))
    n = data.draw(st.integers(1, 5))
    rows = tuple(data.draw(st.lists(st.integers(0, (1 << n) - 1), min_size=m, max_size=m)))
    mat = BitMatrix(rows, n)
    r = oracles.rank(mat.to_lists())
    img = rank_normalizer(mat).apply_matrix(mat)
    assert img.rows == tuple((1 << i) if i < r else 0 for i in range(m))


@settings(max_examples=150)
@given(st.data())
def test_set_map_search_finds_a_map(data):
    t = short_product(3)
    fam = [t.forms[0], t.forms[1]]
    s = data.draw(automorphisms(m=3, n=3))
    dst = [apply(s, f) for f in fam]
    tau = set_map_search(fam, dst)
    assert tau is not NOT_EQUIVALENT
    assert {apply(tau, f).bits for f in fam} == {f.bits for f in dst}


def test_set_map_search_rank_mismatch():
    t = short_product(3)
    assert set_map_search([t.forms[0]], [t.forms[1]]) is NOT_EQUIVALENT


def test_family_stabilizer():
    t = short_product(3)
    # stb(I) in GL3 x GL3 is {(X, X^-T)}, a copy of GL3
    assert len(family_stabilizer([t.forms[0]], 3, 3).elements()) == 168
    both = family_stabilizer([t.forms[0], t.forms[1]], 3, 3)
    assert len(both.elements()) == 4
    assert all({apply(s, f).bits for f in t.forms[:2]} == {f.bits for f in t.forms[:2]} for s in both.elements())
    assert len(family_stabilizer([], 2, 2).elements()) == 36
    with pytest.raises(CapExceeded):
        family_stabilizer([BilinearForm(3, 3, 1)], 3, 3)


def test_apply_subspace_random():
    rng = random.Random(5)
    t = short_product(4)
    elems = t.stabilizer().elements()
    for _ in range(50):
        s = rng.choice(elems)
        assert apply_subspace(s, t.space).echelon == t.space.echelon
    g = invert(elems[3].X)
    assert mul(g, elems[3].X) == identity(4)
    assert transpose(transpose(g)) == g
