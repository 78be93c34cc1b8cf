from fractions import Fraction as F
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from artifact.errors import DimensionError, ParityError
from artifact.grassmann import (
    GrassmannElement as G,
    GrassmannMorphism,
    apply_morphism,
    canonical_morphism,
    compose_morphisms,
    identity_morphism,
    merge_sign,
    split,
    subsets,
)


def lam(n, *I, c=1):
    return G.basis(n, I, c)


def test_anticommuting_generators():
    assert lam(2, 2) * lam(2, 1) == lam(2, 1, 2, c=-1)
    assert (lam(1, 1) * lam(1, 1)).is_zero()


def test_product_of_even_elements():
    a = G(3, {(): 2, (1, 2): 1})
    b = G(3, {(): 3, (1, 3): 1})
    assert a * b == G(3, {(): 6, (1, 2): 3, (1, 3): 2})


def test_split():
    even, odd, body, soul = split(G(2, {(): 3, (1, 2): 1}))
    assert body == 3 and soul == lam(2, 1, 2) and odd.is_zero()
    even, odd, _, _ = split(G(2, {(1,): 1, (1, 2): 1}))
    assert even == lam(2, 1, 2) and odd == lam(2, 1)


def test_soul_nilpotent():
    _, _, _, soul = split(G(2, {(): 3, (1, 2): 1}))
    assert (soul ** 3).is_zero()


def test_merge_sign_counts_inversions():
    for I in subsets(4):
        for J in subsets(4):
            if set(I) & set(J):
                assert merge_sign(I, J) == 0
                continue
            seq = list(I) + list(J)
            inv = sum(1 for a, b in combinations(seq, 2) if a > b)
            assert merge_sign(I, J) == (-1) ** inv


def test_eps_and_eta():
    a = G(2, {(): 1, (1,): 2, (2,): 3, (1, 2): 4})
    assert apply_morphism(canonical_morphism("eps", 2, 1), a) == G(1, {(): 1, (1,): 2})
    assert apply_morphism(canonical_morphism("eps", 2, 0), G(2, {(): 5, (1, 2): 1})) == G.scalar(0, 5)
    assert apply_morphism(canonical_morphism("eta", 0, 3), G.scalar(0, 4)) == G.scalar(3, 4)
    assert compose_morphisms(canonical_morphism("eps", 3, 1), canonical_morphism("eta", 1, 3)) == identity_morphism(1)


def test_morphism_extends_multiplicatively():
    rho = GrassmannMorphism(1, 2, [lam(2, 1) + lam(2, 2)])
    a = G(1, {(): 2, (1,): 3})
    assert apply_morphism(rho, a) == G(2, {(): 2, (1,): 3, (2,): 3})


def test_morphism_rejects_even_images():
    with pytest.raises(ParityError):
        GrassmannMorphism(1, 2, [lam(2, 1, 2)])
    with pytest.raises(DimensionError):
        lam(2, 1) * lam(3, 1)


def test_json_round_trip():
    a = G(3, {(): F(1, 2), (1, 3): -2})
    assert G.from_json(a.to_json()) == a


def elements(n):
    coeff = st.fractions(min_value=-5, max_value=5, max_denominator=4)
    return st.dictionaries(st.sampled_from(list(subsets(n))), coeff, max_size=6).map(lambda d: G(n, d))


def homogeneous(n, parity):
    coeff = st.fractions(min_value=-5, max_value=5, max_denominator=4)
    return st.dictionaries(st.sampled_from(list(subsets(n, parity=parity))), coeff, max_size=4).map(lambda d: G(n, d))


@given(elements(4), elements(4), elements(4))
def test_associative_and_distributive(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@given(st.integers(0, 1), st.integers(0, 1), st.data())
def test_graded_commutative(pa, pb, data):
    a = data.draw(homogeneous(4, pa))
    b = data.draw(homogeneous(4, pb))
    assert a * b == (b * a) * (-1) ** (pa * pb)


@given(st.data())
def test_morphisms_are_algebra_maps(data):
    odd = homogeneous(3, 1)
    rho = GrassmannMorphism(3, 3, [data.draw(odd) for _ in range(3)])
    a, b = data.draw(elements(3)), data.draw(elements(3))
    assert apply_morphism(rho, a * b) == apply_morphism(rho, a) * apply_morphism(rho, b)
    assert apply_morphism(rho, G.scalar(3, 1)) == G.scalar(3, 1)
