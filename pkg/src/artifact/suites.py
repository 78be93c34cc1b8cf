"""Seeded property suites behind ``verify`` and the acceptance tests.

Every suite draws its cases from ``random.Random(seed)``, compares the
library against an independent route, and reports the first failing case.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import oracles
from .atlas import (
    atlas_product,
    cocycle_check,
    even_model_iso,
    extract_bundle,
    fiber_to_point,
    point_to_fiber,
    tangent_atlas,
)
from .errors import ArtifactError
from .grassmann import (
    GrassmannElement,
    apply_morphism,
    canonical_morphism,
    compose_morphisms,
    identity_morphism,
    merge_sign,
    subsets,
)
from .mulbundle import (
    TruncatedLimitElement,
    bundle_compose,
    compare_with_iterated,
    higher_tangent,
    limit_check,
    limit_map,
    project_bundle_morphism,
    project_point,
)
from .mulspace import (
    CubeMorphism,
    CubeSpace,
    all_subsets,
    brute_force_invertible,
    cube_apply,
    cube_compose,
    cube_invert,
    cube_restrict,
    even_subsets,
    minus_functor,
)
from .partitions import Partition, bell, coarser_of, enumerate_partitions, restrict, sign as part_sign
from .randgen import (
    rand_atlas,
    rand_batchelor,
    rand_even_element,
    rand_frac,
    rand_invertible_skeleton,
    rand_manifold_atlas,
    rand_morphism,
    rand_point,
    rand_rmap,
    rand_skeleton,
    rand_space,
    rand_ufamily,
    sample_grid,
)
from .skeleton import (
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
)
from .superlin import SuperPoint, SuperVectorSpace, apply_point_morphism, module_action


@dataclass
class SuiteConfig:
    seed: int = 7
    max_q: int = 3
    max_n: int = 4
    grid: int = 3
    counts: dict = field(default_factory=dict)

    def count(self, name: str, default: int) -> int:
        return self.counts.get(name, default)


@dataclass
class SuiteResult:
    name: str
    status: str
    cases: int
    witness: dict | None
    seconds: float

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status, "cases": self.cases, "witness": self.witness}


class _Fail(Exception):
    def __init__(self, witness: dict):
        super().__init__(witness.get("reason", "failure"))
        self.witness = witness


def _check(cond: bool, **witness):
    if not cond:
        raise _Fail(witness)


def _run(name: str, body: Callable[[], int]) -> SuiteResult:
    t = time.perf_counter()
    try:
        cases = body()
        return SuiteResult(name, "pass", cases, None, time.perf_counter() - t)
    except _Fail as e:
        return SuiteResult(name, "fail", 0, e.witness, time.perf_counter() - t)
    except ArtifactError as e:
        return SuiteResult(name, "fail", 0, {"reason": f"{type(e).__name__}: {e}"}, time.perf_counter() - t)


def _sid(S: SuperVectorSpace) -> str:
    return f"{S.p}|{S.q}"


# ---------------------------------------------------------------- algebra and combinatorics


def suite_grassmann(cfg: SuiteConfig, max_n: int = 4) -> SuiteResult:
    def body():
        cases = 0
        for n in range(max_n + 1):
            basis = [GrassmannElement.basis(n, I) for I in subsets(n)]
            for a, b in itertools.product(basis, repeat=2):
                _check(a * b == (b * a) * ((-1) ** (_deg(a) * _deg(b))), reason="graded commutativity", n=n)
                cases += 1
            if n <= 3:
                for a, b, c in itertools.product(basis, repeat=3):
                    _check((a * b) * c == a * (b * c), reason="associativity", n=n)
                    cases += 1
        rng = random.Random(cfg.seed)
        for _ in range(cfg.count("grassmann_morphisms", 20)):
            a, b, c = (rng.randint(0, max_n) for _ in range(3))
            r1, r2 = rand_morphism(rng, a, b), rand_morphism(rng, b, c)
            x = GrassmannElement(a, {I: rand_frac(rng) for I in subsets(a)})
            _check(apply_morphism(compose_morphisms(r2, r1), x) == apply_morphism(r2, apply_morphism(r1, x)), reason="morphism functoriality")
            eps_c = canonical_morphism("eps", c, 0)
            eps_b = canonical_morphism("eps", b, 0)
            _check(compose_morphisms(eps_c, r2) == eps_b, reason="body projection is natural")
            cases += 1
        for m in range(max_n + 1):
            for n in range(m + 1):
                _check(compose_morphisms(canonical_morphism("eps", m, n), canonical_morphism("eta", n, m)) == identity_morphism(n), reason="eps after eta", m=m, n=n)
                cases += 1
        return cases

    return _run("grassmann", body)


def _deg(a: GrassmannElement) -> int:
    return len(next(iter(a.support()), ())) % 2


def suite_partitions(cfg: SuiteConfig, max_size: int = 6) -> SuiteResult:
    def body():
        cases = 0
        for m in range(8):
            _check(len(enumerate_partitions(range(1, m + 1))) == bell(m) == _bell_direct(m), reason="Bell count", m=m)
            cases += 1
        for m in range(max_size + 1):
            I = tuple(range(1, m + 1))
            for nu in enumerate_partitions(I):
                seq = [i for b in nu.blocks for i in b]
                inv = sum(1 for a, b in itertools.combinations(seq, 2) if a > b)
                _check(part_sign(nu) == (-1) ** inv, reason="sign vs inversion count", nu=[list(b) for b in nu.blocks])
                cases += 1
            for nu in enumerate_partitions(I, "even_blocks"):
                for om in coarser_of(nu):
                    if not om.is_even():
                        continue
                    prod = part_sign(om)
                    for O in om.blocks:
                        prod *= part_sign(restrict(O, nu))
                    _check(part_sign(nu) == prod, reason="sign multiplicativity", nu=[list(b) for b in nu.blocks], omega=[list(b) for b in om.blocks])
                    cases += 1
                # swapping adjacent even blocks keeps the sign
                bl = list(nu.blocks)
                for j in range(len(bl) - 1):
                    sw = bl[:j] + [bl[j + 1], bl[j]] + bl[j + 2:]
                    _check(part_sign(Partition.of(sw, "given")) == part_sign(Partition.of(bl, "given")), reason="even swap")
                    cases += 1
        return cases

    return _run("partitions", body)


def _bell_direct(m: int) -> int:
    # B(m+1) = sum_k C(m,k) B(k)
    B = [1]
    for j in range(m):
        B.append(sum(math.comb(j, k) * B[k] for k in range(j + 1)))
    return B[m]


# ---------------------------------------------------------------- skeleton calculus


def _pair_case(rng, max_p, max_q, degree):
    S = rand_space(rng, max_p, max_q)
    T = rand_space(rng, max_p, max_q)
    U = rand_space(rng, max_p, max_q)
    f = rand_skeleton(rng, S, T, degree, rational=rng.random() < 0.4)
    g = rand_skeleton(rng, T, U, degree, rational=rng.random() < 0.4)
    return S, f, g


def suite_compose(cfg: SuiteConfig, pairs: int | None = None) -> SuiteResult:
    """``eval(g∘f, v) = eval(g, eval(f, v))`` on a grid over Λ_q, plus the
    independent Grassmann oracle on the first grid point."""
    pairs = pairs if pairs is not None else cfg.count("compose", 20)

    def body():
        rng = random.Random(cfg.seed * 1009 + 1)
        cases = 0
        for i in range(pairs):
            S, f, g = _pair_case(rng, 3, cfg.max_q, 3)
            h = compose(g, f)
            for j, v in enumerate(sample_grid(S, S.q, cfg.grid, rng)):
                lhs = eval_partition(h, v)
                rhs = eval_partition(g, eval_partition(f, v))
                _check(lhs == rhs, reason="compose vs pointwise", case=i, point=v.to_json(), source=_sid(S))
                if j == 0:
                    _check(lhs == oracles.oracle_eval(g, oracles.oracle_eval(f, v)), reason="compose vs oracle", case=i)
                cases += 1
            if S.q >= 2 and i % 4 == 0:
                _check(compose(g, f, method="collapsed") == h, reason="literal vs collapsed", case=i)
        return cases

    return _run("compose", body)


def suite_compose_assoc(cfg: SuiteConfig, triples: int | None = None) -> SuiteResult:
    triples = triples if triples is not None else cfg.count("compose_assoc", 10)

    def body():
        rng = random.Random(cfg.seed * 1009 + 2)
        for i in range(triples):
            S, f, g = _pair_case(rng, 2, min(cfg.max_q, 3), 2)
            V = rand_space(rng, 2, 3)
            h = rand_skeleton(rng, g.target, V, 2)
            _check(compose(h, compose(g, f)) == compose(compose(h, g), f), reason="associativity", case=i)
            _check(compose(Skeleton.identity(g.target), g) == g and compose(g, Skeleton.identity(g.source)) == g, reason="identity law", case=i)
        return triples

    return _run("compose_assoc", body)


def suite_invert(cfg: SuiteConfig, count: int | None = None) -> SuiteResult:
    count = count if count is not None else cfg.count("invert", 10)

    def body():
        rng = random.Random(cfg.seed * 1009 + 3)
        for i in range(count):
            S = rand_space(rng, 3, cfg.max_q)
            f = rand_invertible_skeleton(rng, S, 2)
            g = invert(f)
            ident = Skeleton.identity(S)
            _check(compose(g, f) == ident, reason="left inverse", case=i, source=_sid(S))
            _check(compose(f, g) == ident, reason="right inverse", case=i, source=_sid(S))
        return count

    return _run("invert", body)


def suite_eval(cfg: SuiteConfig, count: int | None = None, max_n: int = 5) -> SuiteResult:
    count = count if count is not None else cfg.count("eval", 50)

    def body():
        rng = random.Random(cfg.seed * 1009 + 4)
        for i in range(count):
            S = rand_space(rng, 3, cfg.max_q)
            T = rand_space(rng, 3, cfg.max_q)
            f = rand_skeleton(rng, S, T, 3, rational=rng.random() < 0.4)
            v = rand_point(rng, S, rng.randint(0, max_n))
            a = eval_partition(f, v)
            _check(a == eval_taylor(f, v), reason="partition vs Taylor", case=i, point=v.to_json())
            if i % 5 == 0:
                _check(a == oracles.oracle_eval(f, v), reason="partition vs oracle", case=i)
        return count

    return _run("eval", body)


def suite_naturality(cfg: SuiteConfig, random_per_case: int | None = None, max_n: int = 4) -> SuiteResult:
    """Naturality under every canonical morphism and random ones, the support
    law, the exact Taylor step and even homogeneity of the differential."""
    per = random_per_case if random_per_case is not None else cfg.count("naturality", 3)

    def body():
        rng = random.Random(cfg.seed * 1009 + 5)
        cases = 0
        for a in range(max_n + 1):
            for b in range(max_n + 1):
                morphs = []
                if a >= b:
                    morphs.append(canonical_morphism("eps", a, b))
                if a <= b:
                    morphs.append(canonical_morphism("eta", a, b))
                morphs += [rand_morphism(rng, a, b) for _ in range(per)]
                for rho in morphs:
                    S = rand_space(rng, 2, 2)
                    T = rand_space(rng, 2, 2)
                    f = rand_skeleton(rng, S, T, 2, rational=rng.random() < 0.3)
                    v = rand_point(rng, S, a)
                    lhs = apply_point_morphism(rho, eval_partition(f, v))
                    rhs = eval_partition(f, apply_point_morphism(rho, v))
                    _check(lhs == rhs, reason="naturality", levels=[a, b], morphism=rho.to_json())
                    cases += 1
        # support law
        for i in range(cfg.count("support", 40)):
            n = rng.randint(1, max_n)
            S = rand_space(rng, 2, 2)
            f = rand_skeleton(rng, S, rand_space(rng, 2, 2), 3)
            Is = rng.sample([I for I in subsets(n) if I], rng.randint(1, min(3, 2 ** n - 1)))
            comps = {(): [rand_frac(rng) for _ in range(S.p)]}
            for I in Is:
                comps[I] = [rand_frac(rng) for _ in range(S.dim(len(I) % 2))]
            v = SuperPoint(S, n, comps)
            allowed = {()}
            for r in range(1, len(Is) + 1):
                for fam in itertools.combinations(Is, r):
                    if all(not set(x) & set(y) for x, y in itertools.combinations(fam, 2)):
                        allowed.add(tuple(sorted(sum(fam, ()))))
            out = eval_partition(f, v)
            _check(all(I in allowed for I, _ in out.items()), reason="support law", case=i)
            cases += 1
        # exact Taylor step and even homogeneity
        for i in range(cfg.count("taylor_step", 30)):
            n = rng.randint(0, max_n - 2)
            S = rand_space(rng, 2, 2)
            f = rand_skeleton(rng, S, rand_space(rng, 2, 2), 3, rational=rng.random() < 0.3)
            v = rand_point(rng, S, n)
            w = rand_point(rng, S, n)
            df = differential(f)
            step = eval_partition(df, point_pair(v, w))
            big_v = SuperPoint(S, n + 2, dict(v.items()))
            big_y = SuperPoint(S, n + 2, {I + (n + 1, n + 2): vec for I, vec in w.items()})
            diff = eval_partition(f, big_v + big_y) - eval_partition(f, big_v)
            expected = SuperPoint(f.target, n + 2, {I + (n + 1, n + 2): vec for I, vec in step.items()})
            _check(diff == expected, reason="Taylor step", case=i)
            _check(step == oracles.taylor_step_oracle(f, v, w), reason="Taylor step oracle", case=i)
            t = rand_even_element(rng, n)
            lhs = eval_partition(df, point_pair(v, module_action(t, w)))
            rhs = module_action(t, step)
            _check(lhs == rhs, reason="even homogeneity", case=i)
            cases += 1
        return cases

    return _run("naturality", body)


def suite_parity(cfg: SuiteConfig, count: int | None = None) -> SuiteResult:
    count = count if count is not None else cfg.count("parity", 15)

    def body():
        rng = random.Random(cfg.seed * 1009 + 6)
        for i in range(count):
            H, E, F = (rand_space(rng, 2, 2) for _ in range(3))
            f = rand_ufamily(rng, H, E, F)
            _check(is_ufamily(f), reason="generator produced a non-family", case=i)
            pf = parity_change(f)
            _check(is_ufamily(pf), reason="parity change leaves the families", case=i)
            _check(parity_change(pf) == f, reason="involution", case=i)
            _check(pf.source == H * E.parity_swap() and pf.target == F.parity_swap(), reason="parity change keeps the spaces", case=i)
            n = rng.randint(0, 2)
            h, w = rand_point(rng, H, n), rand_point(rng, E, n)
            lhs = eval_partition(pf, point_pair(SuperPoint(H, n + 1, dict(h.items())), _odd_shift(w, E.parity_swap())))
            rhs = _odd_shift(eval_partition(f, point_pair(h, w)), F.parity_swap())
            _check(lhs == rhs, reason="parity change vs fresh odd generator", case=i)
            H2, G = rand_space(rng, 2, 2), rand_space(rng, 2, 2)
            h = rand_skeleton(rng, H, H2, 2)
            g = rand_ufamily(rng, H2, F, G)
            lhs = parity_change(family_compose(g, h, f))
            rhs = family_compose(parity_change(g), h, pf)
            _check(lhs == rhs, reason="composition compatibility", case=i)
        return count

    return _run("parity", body)


def _odd_shift(w: SuperPoint, swapped: SuperVectorSpace) -> SuperPoint:
    """``λ_{n+1} · w`` read as a point of the parity-swapped space."""
    n = w.n
    return SuperPoint(swapped, n + 1, {I + (n + 1,): [merge_sign((n + 1,), I) * c for c in vec] for I, vec in w.items()})


def suite_batchelor(cfg: SuiteConfig, count: int | None = None) -> SuiteResult:
    count = count if count is not None else cfg.count("batchelor", 20)

    def body():
        rng = random.Random(cfg.seed * 1009 + 7)
        for i in range(count):
            S, T, U = (rand_space(rng, 3, cfg.max_q) for _ in range(3))
            f = rand_batchelor(rng, S, T, 3, rational=rng.random() < 0.3)
            g = rand_batchelor(rng, T, U, 3, rational=rng.random() < 0.3)
            h = compose(g, f)
            _check(is_batchelor(h), reason="higher components appear", case=i)
            # the two surviving components are the composite base map and g_1(f_0)(f_1)
            _check(h.f0() == g.f0().compose(f.f0()), reason="base component", case=i)
        return count

    return _run("batchelor", body)


# ---------------------------------------------------------------- cubes


def _rand_tensor(rng, shape):
    return np.array([rand_frac(rng, -2, 2) for _ in range(int(np.prod(shape)))], dtype=object).reshape(shape)


def rand_cube_morphism(rng, src: CubeSpace, tgt: CubeSpace, density=0.7, invertible=None) -> CubeMorphism:
    """``invertible`` True forces bijective length-one tensors, False forces a
    singular one somewhere, None leaves them random."""
    fam = {}
    singular_at = None
    if invertible is False:
        cands = [I for I, d in src.dims.items() if d > 0]
        singular_at = rng.choice(cands) if cands else None
    for nu in src.partitions():
        shape = (tgt.dims[nu.total],) + tuple(src.dims[B] for B in nu.blocks)
        if nu.length == 1 and invertible is not None:
            d = shape[0]
            if nu.total == singular_at:
                M = _rand_tensor(rng, (d, d))
                M[0, :] = 0
            else:
                M = np.empty((d, d), dtype=object)
                for r in range(d):
                    for c in range(d):
                        M[r, c] = Fraction(rng.choice([1, -1, 2])) if r == c else (rand_frac(rng, -2, 2) if r < c else Fraction(0))
            fam[nu.blocks] = M
        elif rng.random() < density:
            fam[nu.blocks] = _rand_tensor(rng, shape)
    return CubeMorphism(src, tgt, fam)


def _basis_vectors(space: CubeSpace):
    """Zero plus each basis vector of the total space."""
    zero = {I: [Fraction(0)] * d for I, d in space.dims.items()}
    yield zero
    for I, d in space.dims.items():
        for a in range(d):
            v = {J: list(w) for J, w in zero.items()}
            v[I][a] = Fraction(1)
            yield v


def _all_dims(k: int, values) -> list[CubeSpace]:
    axes = all_subsets(k)
    return [CubeSpace(k, dict(zip(axes, ds))) for ds in itertools.product(values, repeat=len(axes))]


def suite_cubes(cfg: SuiteConfig, exhaustive_k: int = 3, random_k4: int | None = None, dims_values=(0, 1, 2)) -> SuiteResult:
    """Composition against application, and the length-one criterion against
    the brute-force Jacobian, over every axis-dimension assignment."""
    random_k4 = random_k4 if random_k4 is not None else cfg.count("cubes_k4", 3)

    def one(rng, A, B, C, tag):
        f = rand_cube_morphism(rng, A, B)
        g = rand_cube_morphism(rng, B, C)
        gf = cube_compose(g, f)
        for v in _basis_vectors(A):
            _check(cube_apply(gf, v) == cube_apply(g, cube_apply(f, v)), reason="compose vs apply", where=tag)
        w = {I: [rand_frac(rng) for _ in range(d)] for I, d in A.dims.items()}
        _check(cube_apply(gf, w) == cube_apply(g, cube_apply(f, w)), reason="compose vs apply (random vector)", where=tag)
        h = rand_cube_morphism(rng, A, A, invertible=rng.choice([True, False, None]))
        ok, inv = cube_invert(h)
        _check(ok == brute_force_invertible(h), reason="criterion vs brute force", where=tag)
        if ok:
            ident = CubeMorphism.identity(A)
            _check(cube_compose(inv, h) == ident and cube_compose(h, inv) == ident, reason="inverse", where=tag)
            _check(cube_apply(inv, cube_apply(h, w)) == w, reason="round trip", where=tag)

    def body():
        rng = random.Random(cfg.seed * 1009 + 8)
        cases = 0
        for k in range(exhaustive_k + 1):
            for A in _all_dims(k, dims_values):
                B = CubeSpace(k, {I: rng.choice(dims_values) for I in A.dims})
                C = CubeSpace(k, {I: rng.choice(dims_values) for I in A.dims})
                one(rng, A, B, C, {"k": k, "dims": [A.dims[I] for I in A.dims]})
                cases += 1
        for i in range(random_k4):
            A, B, C = (CubeSpace(4, {I: rng.choice(dims_values) for I in all_subsets(4)}) for _ in range(3))
            one(rng, A, B, C, {"k": 4, "case": i})
            cases += 1
        # length-one support is closed under composition
        for k in range(5):
            A = CubeSpace.uniform(k, 2)
            f = CubeMorphism(A, A, {nu: t for nu, t in rand_cube_morphism(rng, A, A, 1.0).family.items() if len(nu) == 1})
            g = CubeMorphism(A, A, {nu: t for nu, t in rand_cube_morphism(rng, A, A, 1.0).family.items() if len(nu) == 1})
            _check(all(len(nu) == 1 for nu in cube_compose(g, f).family), reason="length-one support", k=k)
            cases += 1
        # restriction is functorial
        for k in range(1, 5):
            A = CubeSpace.uniform(k, 1)
            f, g = rand_cube_morphism(rng, A, A), rand_cube_morphism(rng, A, A)
            for P in (all_subsets(k - 1), even_subsets(k)):
                _check(cube_restrict(cube_compose(g, f), P) == cube_compose(cube_restrict(g, P), cube_restrict(f, P)), reason="restriction", k=k)
                cases += 1
        return cases

    return _run("cubes", body)


def suite_minus(cfg: SuiteConfig, max_k: int = 6, per_k: int | None = None) -> SuiteResult:
    per_k = per_k if per_k is not None else cfg.count("minus", 2)

    def body():
        rng = random.Random(cfg.seed * 1009 + 9)
        cases = 0
        for k in range(max_k + 1):
            E = CubeSpace(k, {I: 1 for I in even_subsets(k)})
            for _ in range(per_k):
                f, g = rand_cube_morphism(rng, E, E, 0.9), rand_cube_morphism(rng, E, E, 0.9)
                _check(minus_functor(cube_compose(g, f)) == cube_compose(minus_functor(g), minus_functor(f)), reason="minus functoriality", k=k)
                _check(minus_functor(minus_functor(f)) == f, reason="minus involution", k=k)
                mf = minus_functor(f)
                for nu, t in f.family.items():
                    seq = [i for B in nu for i in B]
                    sgn = (-1) ** sum(1 for a, b in itertools.combinations(seq, 2) if a > b)
                    _check(bool((mf.family[nu] == sgn * t).all()), reason="minus sign", k=k, nu=[list(B) for B in nu])
                cases += 1
        return cases

    return _run("minus", body)


# ---------------------------------------------------------------- bundles and atlases


def suite_tangent(cfg: SuiteConfig, pairs: int | None = None, max_k: int = 3) -> SuiteResult:
    pairs = pairs if pairs is not None else cfg.count("tangent", 8)

    def body():
        rng = random.Random(cfg.seed * 1009 + 10)
        cases = 0
        for i in range(pairs):
            m = rng.randint(1, 2)
            r = rng.randint(1, 2)
            s = rng.randint(1, 2)
            phi = rand_rmap(rng, m, r, 2, rational=rng.random() < 0.4)
            psi = rand_rmap(rng, r, s, 2, rational=rng.random() < 0.4)
            k = i % (max_k + 1)
            lhs = higher_tangent(psi.compose(phi), k)
            rhs = bundle_compose(higher_tangent(psi, k), higher_tangent(phi, k))
            _check(lhs == rhs, reason="chain rule", case=i, k=k)
            cases += 1
            if i % 4 == 0:
                _check(compare_with_iterated(phi, 2), reason="iterated tangent", case=i)
                cases += 1
        return cases

    return _run("tangent", body)


def suite_even_model(cfg: SuiteConfig, count: int | None = None, max_n: int = 4) -> SuiteResult:
    count = count if count is not None else cfg.count("even_model", 4)

    def body():
        rng = random.Random(cfg.seed * 1009 + 11)
        cases = 0
        for i in range(count):
            m = rng.randint(1, 2)
            a = rand_manifold_atlas(rng, m, rng.randint(1, 2))
            for n in range(max_n + 1):
                k = rng.randint(n, max_n)
                rep = even_model_iso(a, k, n)
                _check(rep["status"] == "pass", reason="even model", case=i, n=n, k=k, witness=rep["witness"])
                cases += 1
        return cases

    return _run("even_model", body)


def suite_bundles(cfg: SuiteConfig, count: int | None = None, max_n: int = 4) -> SuiteResult:
    """Extracted transitions: cube cocycle, agreement with skeleton
    evaluation, truncation naturality and products."""
    count = count if count is not None else cfg.count("bundles", 3)

    def body():
        rng = random.Random(cfg.seed * 1009 + 12)
        cases = 0
        for i in range(count):
            model = rand_space(rng, 2, 2)
            a = rand_atlas(rng, model, rng.randint(2, 3))
            _check(cocycle_check(a)["status"] == "pass", reason="atlas cocycle", case=i)
            for n in range(max_n + 1):
                B = extract_bundle(a, n)
                rep = B.validate(cfg.grid)
                _check(rep["status"] == "pass", reason="bundle cocycle", case=i, n=n, witness=rep["witness"])
                for (x, y), s in a.transitions.items():
                    v = rand_point(rng, model, n)
                    base, fib = point_to_fiber(v)
                    out = B.transitions[(x, y)][1].apply(base, fib)
                    _check(fiber_to_point(model, n, *out) == eval_partition(s, v), reason="bundle vs skeleton", case=i, n=n)
                    for m in range(n + 1):
                        eps = canonical_morphism("eps", n, m)
                        tv = apply_point_morphism(eps, v)
                        _check(point_to_fiber(tv) == project_point(base, fib, m), reason="truncation is eps", case=i)
                        trunc = project_bundle_morphism(B.transitions[(x, y)][1], m).apply(*project_point(base, fib, m))
                        _check(fiber_to_point(model, m, *trunc) == apply_point_morphism(eps, eval_partition(s, v)), reason="truncation naturality", case=i, n=n, m=m)
                    cases += 1
        for i in range(max(1, count // 2)):
            a = rand_atlas(rng, rand_space(rng, 1, 1), 2)
            b = rand_atlas(rng, rand_space(rng, 1, 1), 2)
            P = atlas_product(a, b)
            for n in range(min(max_n, 3) + 1):
                _check(extract_bundle(P, n) == extract_bundle(a, n).times(extract_bundle(b, n)), reason="products", case=i, n=n)
                cases += 1
        return cases

    return _run("bundles", body)


def suite_tangent_limit(cfg: SuiteConfig, count: int | None = None, N: int = 4) -> SuiteResult:
    count = count if count is not None else cfg.count("tangent_limit", 2)

    def body():
        rng = random.Random(cfg.seed * 1009 + 13)
        cases = 0
        for i in range(count):
            model = rand_space(rng, 1, 2)
            a = rand_atlas(rng, model, 2) if i % 2 else rand_manifold_atlas(rng, 1)
            Ta = tangent_atlas(a)
            routes = []
            for n in range(N + 1):
                lhs = extract_bundle(Ta, n)
                rhs = extract_bundle(a, n).tangent()
                _check(lhs == rhs, reason="tangent of limit", case=i, n=n)
                routes.append(lhs)
                cases += 1
            # level-wise maps of a coherent element stay coherent
            (x, y), s = next(iter(a.transitions.items()))
            fam = [routes[n].transitions[(x, y)][1] for n in range(N + 1)]
            box = routes[N].transitions[(x, y)][0]
            base = box.samples(routes[N].base_dim, 1)[0]
            top = {I: [rand_frac(rng) for _ in range(d)] for I, d in routes[N].fiber.dims.items()}
            e = TruncatedLimitElement.lift_point(base, top, N)
            ok, _ = limit_check(e)
            _check(ok, reason="lifted element coherent", case=i)
            ok, _ = limit_check(limit_map(fam, e))
            _check(ok, reason="mapped element coherent", case=i)
            cases += 1
        return cases

    return _run("tangent_limit", body)


ALL_SUITES = [
    suite_grassmann,
    suite_partitions,
    suite_eval,
    suite_compose,
    suite_compose_assoc,
    suite_invert,
    suite_naturality,
    suite_parity,
    suite_batchelor,
    suite_cubes,
    suite_minus,
    suite_tangent,
    suite_even_model,
    suite_bundles,
    suite_tangent_limit,
]


def run_all(cfg: SuiteConfig, quick: bool = True) -> list[SuiteResult]:
    out = []
    for fn in ALL_SUITES:
        if fn is suite_cubes and quick:
            out.append(fn(cfg, exhaustive_k=2, random_k4=1))
        elif fn is suite_naturality:
            out.append(fn(cfg, max_n=min(cfg.max_n, 4)))
        elif fn in (suite_even_model, suite_bundles, suite_tangent_limit) and quick:
            kw = {"max_n": min(cfg.max_n, 3)} if fn is not suite_tangent_limit else {"N": min(cfg.max_n, 3)}
            out.append(fn(cfg, **kw))
        else:
            out.append(fn(cfg))
    return out
