from math import comb

import pytest
from hypothesis import given, strategies as st

from artifact.errors import DimensionError
from artifact.partitions import (
    Partition,
    bell,
    coarser_of,
    enumerate_partitions,
    glex_key,
    graded_lex_compare,
    is_coarser,
    refinement,
    restrict,
    sign,
)


def P(*blocks):
    return Partition.of(blocks)


def bell_ref(m):
    B = [1]
    for j in range(m):
        B.append(sum(comb(j, k) * B[k] for k in range(j + 1)))
    return B[m]


def test_enumeration_examples():
    assert [p.blocks for p in enumerate_partitions([1])] == [((1,),)]
    assert len(enumerate_partitions([1, 2, 3])) == 5
    even = {p.blocks for p in enumerate_partitions([1, 2, 3, 4], "even_blocks")}
    assert even == {((1, 2, 3, 4),), ((1, 2), (3, 4)), ((1, 3), (2, 4)), ((1, 4), (2, 3))}
    assert [p.blocks for p in enumerate_partitions([])] == [()]


@pytest.mark.parametrize("m", range(9))
def test_bell_numbers(m):
    assert bell(m) == bell_ref(m) == len(enumerate_partitions(range(1, m + 1)))


def test_sign_examples():
    assert sign(Partition.of([(2,), (1, 3)], "given")) == -1
    assert sign(P((1,), (2,), (3,))) == 1
    assert sign(P((1, 4), (2, 3))) == 1


def test_graded_lex_order():
    assert graded_lex_compare((1, 2), (3,)) < 0
    assert graded_lex_compare((1,), (2,)) < 0
    subs = [(), (1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3)]
    assert sorted(subs, key=glex_key) == [(), (1, 2), (1, 3), (2, 3), (1,), (2,), (3,), (1, 2, 3)]


def test_refinement_examples():
    nu = P((1,), (2,), (3,))
    r = refinement(P((1, 2), (3,)), nu)
    assert r.is_coarser and r.induced[(1, 2)] == P((1,), (2,))
    assert len(coarser_of(nu)) == 5
    assert is_coarser(P((1, 3), (2,)), nu)
    with pytest.raises(DimensionError):
        is_coarser(P((1, 2)), P((1, 3)))


def test_invalid_blocks():
    with pytest.raises(DimensionError):
        Partition((1, 2), ((1,), (1, 2)))


@given(st.sampled_from([0, 2, 4, 6]), st.data())
def test_sign_multiplicative_over_coarsenings(m, data):
    parts = enumerate_partitions(range(1, m + 1), "even_blocks")
    nu = data.draw(st.sampled_from(parts))
    om = data.draw(st.sampled_from(coarser_of(nu)))
    prod = sign(om)
    for O in om.blocks:
        prod *= sign(restrict(O, nu))
    assert sign(nu) == prod


@given(st.integers(1, 6), st.data())
def test_coarser_of_matches_filter(m, data):
    nu = data.draw(st.sampled_from(enumerate_partitions(range(1, m + 1))))
    listed = {p.blocks for p in coarser_of(nu)}
    direct = {p.blocks for p in enumerate_partitions(range(1, m + 1)) if is_coarser(p, nu)}
    assert listed == direct
    assert len(listed) == bell(len(nu.blocks))
