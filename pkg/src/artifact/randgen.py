"""Seeded random generators for skeletons, points, morphisms and cubes."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .grassmann import GrassmannElement, GrassmannMorphism, subsets
from .skeleton import DomainBox, Skeleton
from .superlin import RationalMap, SuperPoint, SuperVectorSpace, rfield, to_qq


def rng_of(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def rand_frac(rng: random.Random, lo: int = -3, hi: int = 3, den: int = 2) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.randint(1, den))


def rand_poly(rng: random.Random, arity: int, degree: int, terms: int = 3):
    field = rfield(arity)
    acc = field.zero
    for _ in range(terms):
        exps = [0] * arity
        budget = rng.randint(0, degree)
        for _ in range(budget):
            if arity:
                exps[rng.randrange(arity)] += 1
        mono = field.one
        for i, e in enumerate(exps):
            mono = mono * field.gens[i] ** e
        acc = acc + to_qq(Fraction(rng.randint(-3, 3), rng.randint(1, 2))) * mono
    return acc


def pole_free_den(rng: random.Random, arity: int):
    """``1 + c * x_i^2`` with c > 0, or 1; never vanishes on real points."""
    field = rfield(arity)
    if arity == 0 or rng.random() < 0.6:
        return field.one
    i = rng.randrange(arity)
    return field.one + to_qq(Fraction(rng.randint(1, 2))) * field.gens[i] ** 2


def rand_rmap(rng: random.Random, arity: int, codim: int, degree: int = 3, rational: bool = False, terms: int = 3) -> RationalMap:
    den = pole_free_den(rng, arity) if rational else rfield(arity).one
    return RationalMap(arity, [rand_poly(rng, arity, degree, terms) / den for _ in range(codim)])


def rand_skeleton(
    seed,
    source: SuperVectorSpace,
    target: SuperVectorSpace,
    degree: int = 3,
    density: float = 0.6,
    rational: bool = False,
    max_k: int | None = None,
) -> Skeleton:
    rng = rng_of(seed)
    entries: dict[int, dict] = {}
    top = source.q if max_k is None else min(source.q, max_k)
    for k in range(top + 1):
        ent = {}
        for t in combinations(range(source.q), k):
            if k == 0 or rng.random() < density:
                rm = rand_rmap(rng, source.p, target.dim(k), degree, rational)
                ent[t] = rm
        entries[k] = ent
    return Skeleton.build(source, target, entries)


def rand_space(rng: random.Random, max_p: int = 3, max_q: int = 3, min_q: int = 0) -> SuperVectorSpace:
    return SuperVectorSpace(rng.randint(0, max_p), rng.randint(min_q, max_q))


def rand_point(seed, space: SuperVectorSpace, n: int, density: float = 0.7, body: Sequence | None = None) -> SuperPoint:
    rng = rng_of(seed)
    comps = {}
    for I in subsets(n):
        if I and rng.random() > density:
            continue
        d = space.dim(len(I) % 2)
        comps[I] = [rand_frac(rng) for _ in range(d)]
    if body is not None:
        comps[()] = list(body)
    return SuperPoint(space, n, comps)


def rand_odd_element(rng: random.Random, n: int, density: float = 0.5) -> GrassmannElement:
    return GrassmannElement(n, {I: rand_frac(rng) for I in subsets(n, parity=1) if rng.random() < density})


def rand_even_element(rng: random.Random, n: int, density: float = 0.5) -> GrassmannElement:
    return GrassmannElement(n, {I: rand_frac(rng) for I in subsets(n, parity=0) if rng.random() < density})


def rand_morphism(seed, n_src: int, n_tgt: int, density: float = 0.5) -> GrassmannMorphism:
    rng = rng_of(seed)
    return GrassmannMorphism(n_src, n_tgt, [rand_odd_element(rng, n_tgt, density) for _ in range(n_src)])


def rand_invertible_matrix(rng: random.Random, n: int) -> list[list[Fraction]]:
    """Unit lower times unit upper triangular, scaled by a nonzero diagonal."""
    L = [[Fraction(1) if i == j else (rand_frac(rng) if i > j else Fraction(0)) for j in range(n)] for i in range(n)]
    U = [[Fraction(1) if i == j else (rand_frac(rng) if i < j else Fraction(0)) for j in range(n)] for i in range(n)]
    D = [Fraction(rng.choice([-2, -1, 1, 2, 3])) for _ in range(n)]
    return [[sum(L[i][k] * D[k] * U[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def rand_invertible_skeleton(seed, space: SuperVectorSpace, degree: int = 2, density: float = 0.6) -> Skeleton:
    """Affine base map and odd linear part ``U + N(x)`` with U unit upper
    triangular and N(x) strictly upper triangular, so its determinant is 1."""
    rng = rng_of(seed)
    p, q = space.p, space.q
    A = rand_invertible_matrix(rng, p)
    c = [rand_frac(rng) for _ in range(p)]
    f0 = RationalMap.affine(A, c) if p else RationalMap.zero(0, 0)
    field = rfield(p)
    entries: dict[int, dict] = {0: {(): f0}, 1: {}}
    for b in range(q):
        col = []
        for i in range(q):
            if i == b:
                col.append(field.one)
            elif i < b and rng.random() < density:
                col.append(rand_poly(rng, p, degree))
            else:
                col.append(field.zero)
        entries[1][(b,)] = RationalMap(p, col)
    for k in range(2, q + 1):
        entries[k] = {
            t: rand_rmap(rng, p, space.dim(k), degree)
            for t in combinations(range(q), k)
            if rng.random() < density
        }
    return Skeleton.build(space, space, entries)


def rand_batchelor(seed, source: SuperVectorSpace, target: SuperVectorSpace, degree: int = 3, rational: bool = False) -> Skeleton:
    rng = rng_of(seed)
    return rand_skeleton(rng, source, target, degree, 0.8, rational, max_k=1)


def rand_ufamily(seed, H: SuperVectorSpace, E: SuperVectorSpace, F: SuperVectorSpace, degree: int = 2, density: float = 0.6) -> Skeleton:
    """A family on ``H ⊕ E`` that is linear in the second factor."""
    rng = rng_of(seed)
    src = H * E
    p = src.p
    field = rfield(p)
    ys = field.gens[H.p:]
    xs_only = lambda: rand_poly(rng, H.p, degree)  # noqa: E731
    lift = RationalMap.coordinates(p, list(range(H.p)))

    def in_x(poly):
        return RationalMap(H.p, [poly]).compose(lift).comps[0]

    entries: dict[int, dict] = {}
    for k in range(src.q + 1):
        ent = {}
        for t in combinations(range(src.q), k):
            kE = sum(1 for i in t if i >= H.q)
            if kE >= 2 or (k and rng.random() > density):
                continue
            dim = F.dim(k)
            vec = []
            for _ in range(dim):
                if kE == 1:
                    vec.append(in_x(xs_only()))
                else:
                    acc = field.zero
                    for y in ys:
                        if rng.random() < 0.7:
                            acc = acc + y * in_x(xs_only())
                    vec.append(acc)
            rm = RationalMap(p, vec)
            if not rm.is_zero():
                ent[t] = rm
        entries[k] = ent
    return Skeleton.build(src, F, entries, product=(H.p, H.q))


def sample_grid(space: SuperVectorSpace, n: int, grid: int, seed=0, box: DomainBox | None = None) -> list[SuperPoint]:
    """``grid`` points over Λ_n: bodies from the box samples, souls random."""
    rng = rng_of(seed)
    box = box or DomainBox.all()
    bodies = box.samples(space.p, max(grid, 1), limit=max(grid, 1))
    out = []
    for j in range(grid):
        out.append(rand_point(rng, space, n, 0.7, body=bodies[j % len(bodies)]))
    return out


def rand_atlas(seed, model: SuperVectorSpace, n_charts: int = 2, degree: int = 2):
    """Charts reached from chart 0 by random invertible skeletons ``ψ_i``;
    transitions ``ψ_j ∘ ψ_i^{-1}`` satisfy the cocycle by construction."""
    from .atlas import SuperAtlas
    from .skeleton import compose, invert

    rng = rng_of(seed)
    psis = [Skeleton.identity(model)] + [rand_invertible_skeleton(rng, model, degree) for _ in range(n_charts - 1)]
    invs = [invert(s) for s in psis]
    charts = {f"c{i}": DomainBox.all() for i in range(n_charts)}
    trans = {}
    for i in range(n_charts):
        for j in range(n_charts):
            if i != j:
                trans[(f"c{i}", f"c{j}")] = compose(psis[j], invs[i], check_domain=False)
    return SuperAtlas(model, charts, trans)


def rand_manifold_atlas(seed, m: int, n_charts: int = 2, degree: int = 2):
    """Purely even atlas; with m = 1 a rational chart ``1/x`` on the positive
    half-line is mixed in."""
    from .atlas import SuperAtlas

    rng = rng_of(seed)
    if m == 1 and rng.random() < 0.5:
        model = SuperVectorSpace(1, 0)
        pos = DomainBox.open([(0, None)])
        inv = RationalMap.from_exprs(1, ["1/x0"])
        s_ab = Skeleton.build(model, model, {0: {(): inv}}, DomainBox.open([(Fraction(1, 2), 3)]))
        s_ba = Skeleton.build(model, model, {0: {(): inv}}, DomainBox.open([(Fraction(1, 3), 2)]))
        return SuperAtlas(model, {"a": pos, "b": pos}, {("a", "b"): s_ab, ("b", "a"): s_ba})
    return rand_atlas(rng, SuperVectorSpace(m, 0), n_charts, degree)
