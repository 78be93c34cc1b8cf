import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from artifact.errors import DimensionError, ValidationError
from artifact.mulspace import (
    CubeMorphism,
    CubeSpace,
    all_subsets,
    brute_force_invertible,
    cube_apply,
    cube_compose,
    cube_invert,
    cube_restrict,
    even_subsets,
    is_closed,
    minus_functor,
    project_morphism,
)
from artifact.suites import rand_cube_morphism

seeds = st.integers(0, 100_000)


def T(rows):
    return np.vectorize(F, otypes=[object])(np.array(rows, dtype=object))


C2 = CubeSpace.uniform(2, 1)


def fixture_pair():
    g = CubeMorphism(C2, C2, {((1,),): T([[2]]), ((2,),): T([[3]]), ((1, 2),): T([[1]]), ((1,), (2,)): T([[[4]]])})
    f = CubeMorphism(C2, C2, {((1,),): T([[1]]), ((2,),): T([[-1]]), ((1, 2),): T([[5]]), ((1,), (2,)): T([[[1]]])})
    return g, f


def vec(space, vals):
    return {I: [F(x) for x in vals[I]] for I in space.dims}


def test_axes_in_graded_lex_order():
    assert all_subsets(3) == [(1, 2), (1, 3), (2, 3), (1,), (2,), (3,), (1, 2, 3)]
    assert even_subsets(4) == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4), (1, 2, 3, 4)]
    assert is_closed(even_subsets(4)) and is_closed(all_subsets(2))
    assert not is_closed([(1,), (2,)])


def test_apply_examples():
    A = CubeSpace.uniform(2, 2)
    v = {(1,): [F(1), F(2)], (2,): [F(3), F(4)], (1, 2): [F(5), F(6)]}
    assert cube_apply(CubeMorphism.identity(A), v) == v
    assert cube_apply(CubeMorphism.zero(A, A), v) == {I: [0, 0] for I in A.dims}
    bil = np.zeros((2, 2, 2), dtype=object)
    bil[0, 1, 0] = F(1)
    f = CubeMorphism(A, A, {((1,), (2,)): bil})
    out = cube_apply(f, v)
    assert out[(1,)] == [0, 0] and out[(2,)] == [0, 0] and out[(1, 2)] == [F(2) * F(3), 0]


def test_compose_frozen_values():
    g, f = fixture_pair()
    h = cube_compose(g, f)
    expect = CubeMorphism(C2, C2, {((1,),): T([[2]]), ((2,),): T([[-3]]), ((1, 2),): T([[5]]), ((1,), (2,)): T([[[-3]]])})
    assert h == expect
    assert cube_compose(g, CubeMorphism.identity(C2)) == g


def test_invert_frozen_values():
    g, _ = fixture_pair()
    ok, inv = cube_invert(g)
    assert ok
    assert inv == CubeMorphism(C2, C2, {((1,),): T([[F(1, 2)]]), ((2,),): T([[F(1, 3)]]), ((1, 2),): T([[1]]), ((1,), (2,)): T([[[F(-2, 3)]]])})
    assert cube_invert(CubeMorphism.identity(C2)) == (True, CubeMorphism.identity(C2))


def test_singular_length_one_component():
    bad = CubeMorphism(C2, C2, {((1,),): T([[0]]), ((2,),): T([[3]]), ((1, 2),): T([[1]])})
    assert cube_invert(bad) == (False, None)
    assert not brute_force_invertible(bad)


def test_invertible_diagonals_with_bilinear_term():
    rng = random.Random(4)
    A = CubeSpace.uniform(2, 2)
    f = rand_cube_morphism(rng, A, A, 1.0, invertible=True)
    ok, inv = cube_invert(f)
    assert ok and brute_force_invertible(f)
    assert cube_compose(inv, f) == CubeMorphism.identity(A)


def test_restriction_examples():
    A = CubeSpace.uniform(3, 1)
    f = rand_cube_morphism(random.Random(2), A, A)
    low = cube_restrict(f, all_subsets(2))
    proj = project_morphism(f, 2)
    assert low.source.dims == proj.source.dims and set(low.family) == set(proj.family)
    assert all((low.family[nu] == proj.family[nu]).all() for nu in low.family)
    ev = cube_restrict(f, even_subsets(3))
    assert set(ev.source.dims) == {(1, 2), (1, 3), (2, 3)}
    with pytest.raises(DimensionError):
        cube_restrict(f, [(1,), (2,)])


def test_minus_functor_signs():
    E2 = CubeSpace(2, {(1, 2): 1})
    f = CubeMorphism(E2, E2, {((1, 2),): T([[3]])})
    assert minus_functor(f) == f
    E4 = CubeSpace(4, {I: 1 for I in even_subsets(4)})
    g = CubeMorphism(E4, E4, {((1, 3), (2, 4)): T([[[5]]]), ((1, 2), (3, 4)): T([[[7]]])})
    mg = minus_functor(g)
    assert mg.tensor(((1, 3), (2, 4)))[0, 0, 0] == -5
    assert mg.tensor(((1, 2), (3, 4)))[0, 0, 0] == 7
    assert minus_functor(mg) == g
    with pytest.raises(ValidationError):
        minus_functor(CubeMorphism.identity(C2))


def test_json_round_trip():
    A = CubeSpace(3, {I: (1 + len(I)) % 3 for I in all_subsets(3)})
    f = rand_cube_morphism(random.Random(9), A, A)
    assert CubeMorphism.from_json(f.to_json()) == f
    assert CubeSpace.from_json(A.to_json()) == A


def spaces(k):
    return st.lists(st.integers(0, 2), min_size=2 ** k - 1, max_size=2 ** k - 1).map(lambda ds: CubeSpace(k, dict(zip(all_subsets(k), ds))))


@given(st.integers(1, 3).flatmap(lambda k: st.tuples(spaces(k), spaces(k), spaces(k))), seeds)
def test_compose_agrees_with_apply(sp, seed):
    A, B, Cs = sp
    rng = random.Random(seed)
    f, g = rand_cube_morphism(rng, A, B), rand_cube_morphism(rng, B, Cs)
    v = {I: [F(rng.randint(-3, 3)) for _ in range(d)] for I, d in A.dims.items()}
    assert cube_apply(cube_compose(g, f), v) == cube_apply(g, cube_apply(f, v))


@given(st.integers(1, 3).flatmap(spaces), seeds, st.sampled_from([True, False, None]))
def test_criterion_matches_brute_force(A, seed, inv):
    rng = random.Random(seed)
    f = rand_cube_morphism(rng, A, A, invertible=inv)
    ok, g = cube_invert(f)
    assert ok == brute_force_invertible(f)
    if ok:
        assert cube_compose(g, f) == CubeMorphism.identity(A) == cube_compose(f, g)


@given(st.integers(0, 6), seeds)
def test_minus_functor_is_functorial(k, seed):
    rng = random.Random(seed)
    E = CubeSpace(k, {I: 1 for I in even_subsets(k)})
    f, g = rand_cube_morphism(rng, E, E, 0.5), rand_cube_morphism(rng, E, E, 0.5)
    assert minus_functor(cube_compose(g, f)) == cube_compose(minus_functor(g), minus_functor(f))
