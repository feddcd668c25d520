import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zigzag.exceptions import RowspaceError
from zigzag.rowspace import (
    RVec, cosets, dot, hyperplane, int_to_vec, orth_complement, perm_table, span, vec_to_int,
    zigzag_perm,
)


def test_int_to_vec_is_big_endian():
    assert int_to_vec(4, 3, 2).digits == (1, 1)
    assert int_to_vec(0, 3, 2).is_zero()
    assert int_to_vec(5, 2, 3).digits == (1, 0, 1)


def test_int_to_vec_range_check():
    with pytest.raises(RowspaceError):
        int_to_vec(9, 3, 2)
    with pytest.raises(RowspaceError):
        RVec(3, 2, (3, 0))
    with pytest.raises(RowspaceError):
        RVec(3, 2, (1,))


@settings(max_examples=100, deadline=None)
@given(r=st.integers(2, 5), m=st.integers(1, 4), data=st.data())
def test_index_round_trip(r, m, data):
    x = data.draw(st.integers(0, r**m - 1))
    assert vec_to_int(int_to_vec(x, r, m)) == x


def test_zigzag_perm_worked_value():
    # (1,1) + 2*(0,1) = (1,0) -> 3
    assert zigzag_perm(RVec(3, 2, (0, 1)), 2, 4) == 3


def test_zigzag_perm_identity_for_l_zero():
    v = RVec(3, 2, (2, 1))
    assert all(zigzag_perm(v, 0, x) == x for x in range(9))


def test_perm_table_of_first_unit_vector():
    assert perm_table(RVec.unit(3, 2, 1), 1).tolist() == [3, 4, 5, 6, 7, 8, 0, 1, 2]


@settings(max_examples=60, deadline=None)
@given(r=st.integers(2, 5), m=st.integers(1, 3), l=st.integers(0, 6), data=st.data())
def test_perm_table_is_a_permutation_and_composes(r, m, l, data):
    digits = tuple(data.draw(st.lists(st.integers(0, r - 1), min_size=m, max_size=m)))
    v = RVec(r, m, digits)
    f = perm_table(v, l)
    assert sorted(f.tolist()) == list(range(r**m))
    g = perm_table(v, 1)
    comp = np.arange(r**m)
    for _ in range(l):
        comp = g[comp]
    assert np.array_equal(comp, f)
    assert np.array_equal(perm_table(v, r), np.arange(r**m))


def test_dot_products():
    assert dot(RVec(2, 2, (1, 1)), RVec(2, 2, (1, 0))) == 1
    assert dot(RVec(3, 2, (2, 1)), RVec.zero(3, 2)) == 0
    assert dot(RVec(3, 2, (2, 1)), RVec(3, 2, (1, 2))) == 1


def test_dot_mismatched_spaces():
    with pytest.raises(RowspaceError):
        dot(RVec(3, 2, (1, 1)), RVec(3, 3, (1, 1, 1)))


def test_unit_vectors():
    assert RVec.unit(3, 2, 0).is_zero()
    assert RVec.unit(3, 2, 1).index == 3
    assert RVec.unit(3, 2, 2).index == 1
    with pytest.raises(RowspaceError):
        RVec.unit(3, 2, 3)


def test_span_of_first_unit_vector():
    assert span([RVec.unit(3, 2, 1)]).elements == (0, 3, 6)


def test_empty_span_is_zero():
    z = span([], 3, 2)
    assert z.elements == (0,)
    assert z.dimension == 0
    with pytest.raises(RowspaceError):
        span([])


def test_orth_complement_of_second_unit_vector():
    assert orth_complement(RVec.unit(3, 2, 2)).elements == (0, 3, 6)
    assert hyperplane(RVec.unit(3, 2, 2)).elements == (0, 3, 6)


def test_orth_complement_of_zero_space_is_everything():
    assert orth_complement(span([], 2, 3)).elements == tuple(range(8))


def test_subspace_needs_prime_r():
    with pytest.raises(RowspaceError):
        span([RVec(4, 2, (1, 0))])


def test_cosets_partition_the_space():
    cs = cosets(span([RVec.unit(3, 2, 1)]))
    assert cs == [(0, 3, 6), (1, 4, 7), (2, 5, 8)]


@settings(max_examples=60, deadline=None)
@given(r=st.sampled_from([2, 3, 5]), m=st.integers(1, 3), data=st.data())
def test_subspace_laws(r, m, data):
    n = data.draw(st.integers(0, m))
    vecs = [RVec(r, m, tuple(data.draw(st.lists(st.integers(0, r - 1), min_size=m, max_size=m))))
            for _ in range(n)]
    z = span(vecs, r, m)
    assert len(z) == r**z.dimension
    for v in vecs:
        assert v in z
    perp = orth_complement(z)
    assert z.dimension + perp.dimension == m
    assert orth_complement(perp).elements == z.elements
    for a in z.vectors():
        for b in perp.vectors():
            assert dot(a, b) == 0
    cs = cosets(z)
    assert len(cs) == r ** (m - z.dimension)
    assert sorted(x for c in cs for x in c) == list(range(r**m))
