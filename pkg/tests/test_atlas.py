import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from artifact.atlas import (
    LocalSuperMorphism,
    SuperAtlas,
    add_chart,
    atlas_product,
    cocycle_check,
    embed_manifold,
    embed_vbundle,
    even_model_iso,
    extract_bundle,
    fiber_to_point,
    invert_morphism,
    is_batchelor,
    morphism_check,
    point_family,
    point_to_fiber,
    points_natural,
    svbundle_parity,
    svbundle_validate,
    tangent_atlas,
    truncate,
    vbundle_data,
)
from artifact.errors import ValidationError
from artifact.grassmann import canonical_morphism
from artifact.mulbundle import bundle_minus_even, trivial_tangent_bundle
from artifact.mulspace import even_subsets
from artifact.randgen import rand_atlas, rand_invertible_skeleton, rand_manifold_atlas, rand_morphism, rand_point, rand_space
from artifact.skeleton import DomainBox, Skeleton, compose, eval_partition
from artifact.superlin import RationalMap, SuperVectorSpace

LINE = SuperVectorSpace(1, 0)
ALL = DomainBox.all()
POS = DomainBox.open([(0, None)])
seeds = st.integers(0, 100_000)


def rm(arity, *exprs):
    return RationalMap.from_exprs(arity, list(exprs))


def inv_transitions(back="1/x0"):
    return {("a", "b"): (DomainBox.open([(1, 2)]), rm(1, "1/x0")), ("b", "a"): (DomainBox.open([(F(1, 2), 1)]), rm(1, back))}


def inv_atlas():
    return embed_manifold(1, {"a": POS, "b": POS}, inv_transitions())


def mobius():
    return embed_vbundle(1, 1, {"u": ALL, "v": ALL}, {("u", "v"): (ALL, rm(1, "x0"), rm(2, "-x1")), ("v", "u"): (ALL, rm(1, "x0"), rm(2, "-x1"))})


# ---------------------------------------------------------------- cocycle


def test_single_chart_and_inverse_atlas_pass():
    assert cocycle_check(SuperAtlas(SuperVectorSpace(2, 2), {"c": ALL}, {}))["status"] == "pass"
    assert cocycle_check(inv_atlas())["status"] == "pass"


def test_perturbed_inverse_atlas_fails_with_witness():
    with pytest.raises(ValidationError) as exc:
        embed_manifold(1, {"a": POS, "b": POS}, inv_transitions("1/x0 + 1/100"))
    assert exc.value.witness["triple"] == ["a", "b", "a"]


def test_atlas_json_round_trip():
    a = tangent_atlas(inv_atlas())
    assert SuperAtlas.from_json(a.to_json()) == a
    r = rand_atlas(3, SuperVectorSpace(1, 2), 3)
    assert SuperAtlas.from_json(r.to_json()) == r


# ---------------------------------------------------------------- extraction and truncation


def test_identity_atlas_gives_trivial_bundle():
    S = SuperVectorSpace(1, 2)
    a = SuperAtlas(S, {"c": ALL, "d": ALL}, {("c", "d"): Skeleton.identity(S), ("d", "c"): Skeleton.identity(S)})
    B = extract_bundle(a, 3)
    for _, F_ in B.transitions.values():
        assert F_.fiber == F_.fiber.identity(F_.fiber.source, 1)


def test_level_zero_is_base_data():
    a = inv_atlas()
    B = extract_bundle(a, 0)
    assert B.k == 0 and B.transitions[("a", "b")][1].base == rm(1, "1/x0")


@given(seeds)
def test_extracted_transition_matches_evaluation(seed):
    rng = random.Random(seed)
    model = rand_space(rng, 2, 2)
    a = rand_atlas(rng, model, 2)
    n = rng.randint(0, 3)
    B = extract_bundle(a, n)
    for ab, s in a.transitions.items():
        v = rand_point(rng, model, n)
        out = B.transitions[ab][1].apply(*point_to_fiber(v))
        assert fiber_to_point(model, n, *out) == eval_partition(s, v)


def test_truncation_examples():
    a = rand_atlas(5, SuperVectorSpace(1, 3), 2)
    assert truncate(a, 3) == a
    assert truncate(truncate(a, 2), 1) == truncate(a, 1)
    m = mobius()
    data = vbundle_data(truncate(m, 1))
    assert data[("u", "v")][1] == rm(2, "-x1")


def test_manifold_embedding_keeps_base():
    a = inv_atlas()
    assert extract_bundle(a, 0).transitions[("b", "a")][1].base == rm(1, "1/x0")


# ---------------------------------------------------------------- vector bundles


def test_mobius_bundle():
    m = mobius()
    assert cocycle_check(m)["status"] == "pass"
    assert is_batchelor(m)


def test_trivial_line_bundle_is_a_product():
    t = embed_vbundle(1, 1, {"u": ALL, "v": ALL}, {("u", "v"): (ALL, rm(1, "x0"), rm(2, "x1")), ("v", "u"): (ALL, rm(1, "x0"), rm(2, "x1"))})
    for s in t.transitions.values():
        assert s == Skeleton.identity(SuperVectorSpace(1, 1))


def test_nonlinear_fiber_rejected():
    with pytest.raises(ValidationError):
        embed_vbundle(1, 1, {"u": ALL}, {("u", "u"): (ALL, rm(1, "x0"), rm(2, "x1**2"))})


def test_super_vector_bundle_validation():
    T = tangent_atlas(inv_atlas())
    assert svbundle_validate(T)["status"] == "pass"
    P = svbundle_parity(T)
    assert svbundle_validate(P)["status"] == "pass"
    assert svbundle_parity(P) == T
    assert svbundle_validate(inv_atlas())["status"] == "fail"


def test_quadratic_fiber_term_fails_validation():
    S = SuperVectorSpace(2, 0)
    quad = Skeleton.build(S, S, {0: {(): rm(2, "x0", "x1**2")}})
    a = SuperAtlas(S, {"u": ALL, "v": ALL}, {("u", "v"): quad, ("v", "u"): quad}, (1, 0))
    assert svbundle_validate(a)["status"] == "fail"


# ---------------------------------------------------------------- tangent atlas


def test_tangent_of_inverse_atlas():
    T = tangent_atlas(inv_atlas())
    s = T.transitions[("a", "b")]
    assert s.f0() == rm(2, "1/x0", "-x1/x0**2")
    assert T.split == (1, 0)
    ident = tangent_atlas(SuperAtlas(LINE, {"c": ALL}, {("c", "c"): Skeleton.identity(LINE)}))
    assert ident.transitions[("c", "c")] == Skeleton.identity(SuperVectorSpace(2, 0)).with_product((1, 0))


@pytest.mark.parametrize("n", range(4))
def test_tangent_routes_agree(n):
    a = inv_atlas()
    assert extract_bundle(tangent_atlas(a), n) == extract_bundle(a, n).tangent()


# ---------------------------------------------------------------- even model


@pytest.mark.parametrize("n", [0, 1, 2, 4])
def test_even_model(n):
    rep = even_model_iso(inv_atlas(), 4, n)
    assert rep["status"] == "pass"


def test_even_model_by_hand_for_square():
    # both routes see only the {1,2} entry 2x of the map x^2
    a = SuperAtlas(LINE, {"c": ALL, "d": ALL}, {("c", "d"): Skeleton.build(LINE, LINE, {0: {(): rm(1, "x0**3 + x0")}})})
    assert even_model_iso(a, 2, 2)["status"] == "pass"
    cube = extract_bundle(a, 2).restrict(even_subsets(2))
    assert cube.transitions[("c", "d")][1].fiber.tensor(((1, 2),))[0, 0] == rm(1, "3*x0**2 + 1").comps[0]


def test_even_model_sign_twist_matters():
    charts = {"a": POS, "b": POS}
    T4 = trivial_tangent_bundle(charts, inv_transitions(), 1, 4).restrict(even_subsets(4))
    assert bundle_minus_even(T4) != T4
    assert even_model_iso(inv_atlas(), 4, 4)["status"] == "pass"


# ---------------------------------------------------------------- morphisms, charts, products, points


def test_local_morphism_inverse():
    S = SuperVectorSpace(1, 2)
    a = SuperAtlas(S, {"c": ALL}, {})
    f = rand_invertible_skeleton(7, S)
    m = LocalSuperMorphism(a, a, {("c", "c"): f})
    assert morphism_check(m)["status"] == "pass"
    inv = invert_morphism(m)
    assert compose(inv.maps[("c", "c")], f) == Skeleton.identity(S)


def test_add_chart_keeps_cocycle():
    a = inv_atlas()
    phi = Skeleton.build(LINE, LINE, {0: {(): rm(1, "2*x0 + 1")}}, POS)
    img = DomainBox.open([(1, None)])
    b = add_chart(a, "c", "a", phi, image_box=img, new_box=img)
    assert set(b.charts) == {"a", "b", "c"}
    assert cocycle_check(b)["status"] == "pass"
    with pytest.raises(ValidationError):
        add_chart(a, "c", "a", phi)
    r = rand_atlas(4, SuperVectorSpace(1, 2), 2)
    g = rand_invertible_skeleton(8, SuperVectorSpace(1, 2))
    rb = add_chart(r, "new", "c0", g)
    assert {("c1", "new"), ("new", "c1")} <= set(rb.transitions)


def test_products():
    a = rand_atlas(1, SuperVectorSpace(1, 1), 2)
    b = rand_atlas(2, SuperVectorSpace(1, 1), 2)
    P = atlas_product(a, b)
    assert cocycle_check(P)["status"] == "pass"
    for n in range(3):
        assert extract_bundle(P, n) == extract_bundle(a, n).times(extract_bundle(b, n))


@given(seeds)
def test_points_are_natural(seed):
    rng = random.Random(seed)
    a = inv_atlas()
    rho = rand_morphism(rng, rng.randint(0, 3), rng.randint(0, 3))
    assert points_natural(a, "a", [F(rng.randint(1, 9), 2)], rho)
    fam = point_family(a, "b", [F(3)], 2)
    assert fam[2].n == 2 and dict(fam[2].items()) == {(): (F(3),)}


@given(seeds)
def test_truncation_is_natural(seed):
    rng = random.Random(seed)
    model = rand_space(rng, 1, 2)
    a = rand_atlas(rng, model, 2)
    n = rng.randint(1, 3)
    m = rng.randint(0, n)
    eps = canonical_morphism("eps", n, m)
    from artifact.superlin import apply_point_morphism

    Bm = extract_bundle(a, m)
    for ab, s in a.transitions.items():
        v = rand_point(rng, model, n)
        lhs = fiber_to_point(model, m, *Bm.transitions[ab][1].apply(*point_to_fiber(apply_point_morphism(eps, v))))
        assert lhs == apply_point_morphism(eps, eval_partition(s, v))


def test_random_manifold_atlas_even_model():
    for seed in range(4):
        a = rand_manifold_atlas(seed, 1 + seed % 2, 2)
        for n in range(4):
            assert even_model_iso(a, 3, n)["status"] == "pass"
