from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from gf2rank.forms import (
    BilinearForm,
    Decomposition,
    DimensionTooLarge,
    NotDecomposable,
    RankOneForm,
    Subspace,
    enumerate_rank_one,
    express,
    extract_decomposition,
    flat_rank,
    has_rank_one_basis,
    outer,
    rank_distribution,
    rank_one_factors,
    rank_one_flats,
    verify_decomposition,
)


shapes = st.tuples(st.integers(1, 5), st.integers(1, 5))


@st.composite
def flats(draw):
    m, n = draw(shapes)
    return m, n, draw(st.integers(0, (1 << (m * n)) - 1))


@settings(max_examples=800)
@given(flats())
def test_flat_rank_matches_oracle(x):
    m, n, f = x
    assert flat_rank(f, m, n) == oracles.rank(oracles.mat_from_flat(f, m, n))


@settings(max_examples=500)
@given(flats())
def test_rank_one_factors(x):
    m, n, f = x
    fac = rank_one_factors(f, m, n)
    if oracles.rank(oracles.mat_from_flat(f, m, n)) == 1:
        assert fac is not None and outer(fac[0], fac[1], n) == f
    else:
        assert fac is None


def test_bilinear_form_evaluation():
    # a^T M b with M = [[1,0],[1,1]]
    phi = BilinearForm(2, 2, 0b1101)
    assert phi(0b01, 0b01) == 1
    assert phi(0b10, 0b01) == 1
    assert phi(0b01, 0b10) == 0
    assert phi(0b11, 0b11) == 1


@pytest.mark.parametrize("m,n", [(1, 1), (2, 2), (2, 3), (3, 3)])
def test_rank_one_count(m, n):
    # (2^m - 1)(2^n - 1) rank-one forms, checked by enumeration
    assert len(enumerate_rank_one(m, n)) == (2**m - 1) * (2**n - 1)
    assert sorted(rank_one_flats(m, n)) == sorted(oracles.rank_one_flats(m, n))


def test_rank_one_form_validation():
    with pytest.raises(ValueError):
        RankOneForm(0, 1, 2, 2)
    with pytest.raises(ValueError):
        RankOneForm(4, 1, 2, 2)


@settings(max_examples=400)
@given(st.lists(st.integers(0, (1 << 9) - 1), max_size=7))
def test_subspace_membership_matches_span(vs):
    s = Subspace.from_flats(3, 3, vs)
    span = oracles.span_key(vs)
    assert s.dim == oracles.vec_rank(vs)
    assert set(s.elements()) == span
    for x in range(0, 1 << 9, 7):
        assert (x in s) == (x in span)


@settings(max_examples=400)
@given(st.lists(st.integers(1, (1 << 12) - 1), min_size=1, max_size=8), st.integers(0, (1 << 12) - 1))
def test_express_round_trip(vs, x):
    basis = []
    for v in vs:
        if oracles.vec_rank(basis + [v]) > len(basis):
            basis.append(v)
    c = express(x, basis)
    if x in oracles.span_key(basis):
        acc = 0
        for t, b in enumerate(basis):
            if (c >> t) & 1:
                acc ^= b
        assert acc == x
    else:
        assert c is None


def test_express_rejects_dependent_basis():
    with pytest.raises(ValueError):
        express(1, [3, 3])


@settings(max_examples=300)
@given(st.lists(st.tuples(st.integers(1, 7), st.integers(1, 7)), min_size=1, max_size=6))
def test_decomposition_round_trip(pairs):
    # a space spanned by rank-one forms, with a random target inside it
    v = Subspace.from_flats(3, 3, (outer(a, b, 3) for a, b in pairs))
    assert has_rank_one_basis(v)
    target = [x for x in v.elements()[1:4]]
    d = extract_decomposition(v, [BilinearForm(3, 3, x) for x in target])
    assert d.r == v.dim
    assert verify_decomposition([BilinearForm(3, 3, x) for x in target], d)
    # a flipped coefficient is caught
    if target:
        bad = Decomposition(d.rank_ones, (d.coeffs[0] ^ 1,) + d.coeffs[1:])
        assert not verify_decomposition([BilinearForm(3, 3, x) for x in target], bad)


def test_extract_decomposition_errors():
    v = Subspace.from_flats(2, 2, [0b1001])  # the identity, rank 2
    with pytest.raises(NotDecomposable):
        extract_decomposition(v, [])
    w = Subspace.from_flats(2, 2, [0b0001])
    with pytest.raises(NotDecomposable):
        extract_decomposition(w, [BilinearForm(2, 2, 0b1000)])


def test_has_rank_one_basis_fixtures():
    assert has_rank_one_basis(Subspace(2, 2, ()))
    assert not has_rank_one_basis(Subspace.from_flats(2, 2, [0b1001]))
    assert has_rank_one_basis(Subspace.from_flats(2, 2, [0b1001, 0b0001]))


@settings(max_examples=200)
@given(st.lists(st.integers(0, (1 << 9) - 1), max_size=5))
def test_rank_distribution_matches_oracle(vs):
    s = Subspace.from_flats(3, 3, vs)
    want = [0, 0, 0, 0]
    for x in oracles.span_key(vs):
        want[oracles.rank(oracles.mat_from_flat(x, 3, 3))] += 1
    assert rank_distribution(s) == want


def test_rank_distribution_guard():
    s = Subspace.from_flats(5, 5, [1 << i for i in range(21)])
    with pytest.raises(DimensionTooLarge):
        rank_distribution(s)
