import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from artifact import oracles
from artifact.errors import DimensionError, DomainError, InputError, ValidationError
from artifact.grassmann import GrassmannElement as G
from artifact.randgen import (
    rand_batchelor,
    rand_invertible_skeleton,
    rand_morphism,
    rand_point,
    rand_skeleton,
    rand_space,
    rand_ufamily,
)
from artifact.skeleton import (
    DomainBox,
    Skeleton,
    compose,
    differential,
    eval_partition,
    eval_taylor,
    family_compose,
    invert,
    is_batchelor,
    is_ufamily,
    parity_change,
    point_pair,
    ufamily_report,
)
from artifact.superlin import RationalMap, SuperPoint, SuperVectorSpace, apply_point_morphism, module_action

S11 = SuperVectorSpace(1, 1)
S12 = SuperVectorSpace(1, 2)
LINE = SuperVectorSpace(1, 0)
seeds = st.integers(0, 100_000)


def rm(arity, *exprs):
    return RationalMap.from_exprs(arity, list(exprs))


def square():
    return Skeleton.build(S11, S11, {0: {(): rm(1, "x0**2")}, 1: {(0,): rm(1, "x0")}})


# ---------------------------------------------------------------- evaluation


def test_identity_leaves_points_alone():
    v = SuperPoint(S12, 3, {(): [F(2)], (1,): [F(1), F(3)], (2, 3): [F(5)]})
    assert eval_partition(Skeleton.identity(S12), v) == v


def test_eval_with_odd_soul():
    v = SuperPoint(S11, 1, {(): [F(3)], (1,): [F(5)]})
    out = eval_partition(square(), v)
    assert out == SuperPoint(S11, 1, {(): [F(9)], (1,): [F(15)]})


def test_eval_with_even_soul():
    v = SuperPoint(S11, 2, {(): [F(3)], (1, 2): [F(7)]})
    assert eval_partition(square(), v) == SuperPoint(S11, 2, {(): [F(9)], (1, 2): [F(42)]})
    assert eval_taylor(square(), v) == eval_partition(square(), v)


def test_constant_and_real_inputs():
    c = Skeleton.build(S11, S11, {0: {(): rm(1, "7")}})
    v = SuperPoint(S11, 2, {(): [F(1)], (1,): [F(1)], (1, 2): [F(1)]})
    assert eval_partition(c, v) == SuperPoint(S11, 2, {(): [F(7)]})
    r = SuperPoint.real(S11, 3, [F(4)])
    assert eval_partition(square(), r) == SuperPoint.real(S11, 3, [F(16)])


def test_domain_errors():
    inv = Skeleton.build(LINE, LINE, {0: {(): rm(1, "1/x0")}})
    with pytest.raises(DomainError):
        eval_partition(inv, SuperPoint.real(LINE, 0, [F(0)]))
    boxed = inv.with_box(DomainBox.open([(0, None)]))
    with pytest.raises(DomainError):
        eval_partition(boxed, SuperPoint.real(LINE, 0, [F(-1)]))
    with pytest.raises(DimensionError):
        eval_partition(square(), SuperPoint.real(S12, 0, [F(1)]))


# ---------------------------------------------------------------- composition


def test_identity_laws():
    f = square()
    assert compose(Skeleton.identity(S11), f) == f
    assert compose(f, Skeleton.identity(S11)) == f


def test_vector_bundle_type_composite_components():
    rng = random.Random(3)
    f = rand_batchelor(rng, S12, S12)
    g = rand_batchelor(rng, S12, S12)
    h = compose(g, f)
    assert is_batchelor(h)
    assert h.f0() == g.f0().compose(f.f0())
    # g_1(f_0(x))(f_1(x) e_b)
    for b in range(2):
        col = [g.f0().field.zero] * 2
        fcol = f.entry(1, (b,))
        if fcol is None:
            assert h.entry(1, (b,)) is None
            continue
        for c in range(2):
            gcol = g.entry(1, (c,))
            if gcol is not None:
                for i in range(2):
                    col[i] = col[i] + gcol.compose(f.f0()).comps[i] * fcol.comps[c]
        got = h.entry(1, (b,))
        if got is None:
            assert all(c == 0 for c in col)
        else:
            assert got.comps == tuple(col)


def test_top_component_from_two_inner_blocks():
    # g_1 applied to the product of an odd block and an even block
    E, T = SuperVectorSpace(0, 3), S11
    f = Skeleton.build(E, T, {0: {(): rm(0, "0")}, 1: {(2,): rm(0, "1")}, 2: {(0, 1): rm(0, "1")}})
    g = Skeleton.build(T, T, {0: {(): rm(1, "0")}, 1: {(0,): rm(1, "x0")}})
    h = compose(g, f)
    assert h.entry(3, (0, 1, 2)) == rm(0, "1")
    v = rand_point(random.Random(0), E, 3, 1.0)
    assert eval_partition(h, v) == oracles.oracle_eval(g, oracles.oracle_eval(f, v))


def test_literal_and_collapsed_agree():
    rng = random.Random(11)
    S = SuperVectorSpace(2, 3)
    f = rand_skeleton(rng, S, S, 2)
    g = rand_skeleton(rng, S, S, 2)
    assert compose(g, f, method="literal") == compose(g, f, method="collapsed")


def test_compose_dimension_mismatch():
    with pytest.raises(DimensionError):
        compose(square(), Skeleton.identity(S12))


# ---------------------------------------------------------------- inversion


def test_invert_examples():
    assert invert(Skeleton.identity(S12)) == Skeleton.identity(S12)
    shift = Skeleton.build(S11, S11, {0: {(): rm(1, "x0 + 3")}, 1: {(0,): rm(1, "1")}})
    assert invert(shift) == Skeleton.build(S11, S11, {0: {(): rm(1, "x0 - 3")}, 1: {(0,): rm(1, "1")}})
    f = Skeleton.build(S11, S11, {0: {(): rm(1, "x0")}, 1: {(0,): rm(1, "1 + x0**2")}})
    assert invert(f).entry(1, (0,)) == rm(1, "1/(1 + x0**2)")


def test_invert_with_hint():
    box = DomainBox.open([(0, None)])
    f = Skeleton.build(LINE, LINE, {0: {(): rm(1, "1/x0")}}, box)
    assert invert(f, rm(1, "1/x0")).f0() == rm(1, "1/x0")
    with pytest.raises(ValidationError):
        invert(f)
    with pytest.raises(ValidationError):
        invert(f, rm(1, "x0"))


def test_invert_singular():
    f = Skeleton.build(S11, S11, {0: {(): rm(1, "x0")}})
    with pytest.raises(ValidationError):
        invert(f)
    g = Skeleton.build(S11, S11, {0: {(): rm(1, "0*x0 + 1")}, 1: {(0,): rm(1, "1")}})
    with pytest.raises(ValidationError):
        invert(g)


# ---------------------------------------------------------------- differential and families


def test_differential_examples():
    c = Skeleton.build(S11, S11, {0: {(): rm(1, "5")}})
    assert all(comp.is_zero() for comp in differential(c).comps)
    lin = Skeleton.build(LINE * LINE, LINE, {0: {(): rm(2, "2*x0 - x1")}})
    d = differential(lin)
    assert d.f0() == rm(4, "2*x2 - x3")
    inv = Skeleton.build(LINE, LINE, {0: {(): rm(1, "1/x0")}})
    assert differential(inv).f0() == rm(2, "-x1/x0**2")
    assert differential(inv).product == (1, 0)


def test_linear_family_examples():
    fam = Skeleton.build(LINE * LINE, LINE, {0: {(): rm(2, "(1 + x0**2)*x1")}}, product=(1, 0))
    assert is_ufamily(fam)
    sq = Skeleton.build(LINE * LINE, LINE, {0: {(): rm(2, "x1**2")}}, product=(1, 0))
    rep = ufamily_report(sq)
    assert not rep.ok and rep.witness


def test_parity_change_of_a_scalar_family():
    fam = Skeleton.build(LINE * LINE, LINE, {0: {(): rm(2, "x0*x1")}}, product=(1, 0))
    pf = parity_change(fam)
    assert pf.source == S11 and pf.target == SuperVectorSpace(0, 1)
    assert pf.entry(1, (0,)) == rm(1, "x0") and pf.f0().codim == 0
    assert parity_change(pf) == fam


def test_skeleton_json_round_trip():
    f = rand_skeleton(random.Random(5), S12, SuperVectorSpace(2, 1), rational=True)
    f = f.with_box(DomainBox.open([(0, 3)]))
    assert Skeleton.from_json(f.to_json()) == f
    with pytest.raises(InputError):
        Skeleton.from_json({"target": {"p": 1, "q": 1}})


# ---------------------------------------------------------------- seeded properties


@given(seeds)
def test_eval_routes_agree(seed):
    rng = random.Random(seed)
    S, T = rand_space(rng, 2, 3), rand_space(rng, 2, 2)
    f = rand_skeleton(rng, S, T, 3, rational=rng.random() < 0.4)
    v = rand_point(rng, S, rng.randint(0, 4))
    a = eval_partition(f, v)
    assert a == eval_taylor(f, v) == oracles.oracle_eval(f, v)


@given(seeds)
def test_compose_matches_pointwise(seed):
    rng = random.Random(seed)
    S, T, U = (rand_space(rng, 2, 3) for _ in range(3))
    f = rand_skeleton(rng, S, T, 2, rational=rng.random() < 0.4)
    g = rand_skeleton(rng, T, U, 2, rational=rng.random() < 0.4)
    v = rand_point(rng, S, S.q)
    assert eval_partition(compose(g, f), v) == oracles.oracle_eval(g, oracles.oracle_eval(f, v))


@given(seeds)
def test_natural_in_the_algebra(seed):
    rng = random.Random(seed)
    S, T = rand_space(rng, 2, 2), rand_space(rng, 2, 2)
    f = rand_skeleton(rng, S, T, 2)
    a, b = rng.randint(0, 4), rng.randint(0, 4)
    rho = rand_morphism(rng, a, b)
    v = rand_point(rng, S, a)
    assert apply_point_morphism(rho, eval_partition(f, v)) == eval_partition(f, apply_point_morphism(rho, v))


@given(seeds)
def test_inverse_is_two_sided(seed):
    rng = random.Random(seed)
    S = rand_space(rng, 2, 3)
    f = rand_invertible_skeleton(rng, S, 2)
    g = invert(f)
    assert compose(g, f) == Skeleton.identity(S) == compose(f, g)


@given(seeds)
def test_differential_is_an_even_linear_family(seed):
    rng = random.Random(seed)
    S, T = rand_space(rng, 2, 2), rand_space(rng, 2, 2)
    f = rand_skeleton(rng, S, T, 3)
    df = differential(f)
    assert is_ufamily(df)
    v, w = rand_point(rng, S, 2), rand_point(rng, S, 2)
    t = G(2, {(): F(rng.randint(-3, 3)), (1, 2): F(rng.randint(-3, 3))})
    assert eval_partition(df, point_pair(v, module_action(t, w))) == module_action(t, eval_partition(df, point_pair(v, w)))
    assert eval_partition(df, point_pair(v, w)) == oracles.taylor_step_oracle(f, v, w)


@given(seeds)
def test_parity_change_laws(seed):
    rng = random.Random(seed)
    H, E, Fs, H2, Gs = (rand_space(rng, 2, 2) for _ in range(5))
    f = rand_ufamily(rng, H, E, Fs)
    assert parity_change(parity_change(f)) == f
    h = rand_skeleton(rng, H, H2, 2)
    g = rand_ufamily(rng, H2, Fs, Gs)
    assert parity_change(family_compose(g, h, f)) == family_compose(parity_change(g), h, parity_change(f))
