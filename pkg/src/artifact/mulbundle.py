"""Local multilinear bundles, higher tangent maps, truncations and
truncated inverse limits.

A bundle morphism in a chart is a base map together with a cube morphism
depending on the base point. Points of a degree-k bundle are pairs
``(x, v)`` with ``v`` a mapping from axes to vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from .errors import DimensionError, DomainError, InputError, ValidationError
from .jsonio import require
from .mulspace import (
    CubeMorphism,
    CubeSpace,
    cube_apply,
    cube_compose,
    cube_invert,
    cube_restrict,
    cube_times,
    minus_functor,
    project_morphism,
    redegree,
)
from .skeleton import DomainBox
from .superlin import RationalMap, rfield, rmap_equal, subst

Index = tuple[int, ...]


# ---------------------------------------------------------------- bundle morphisms


class BundleMorphism:
    """``(x, v) -> (base(x), fiber_x(v))`` in one pair of charts."""

    __slots__ = ("base", "fiber")

    def __init__(self, base: RationalMap, fiber: CubeMorphism):
        if fiber.arity is None:
            fiber = fiber.lift(base.arity)
        if fiber.arity != base.arity:
            raise DimensionError("fiber parameters do not match the base arity")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "fiber", fiber)

    def __setattr__(self, name, value):
        raise AttributeError("BundleMorphism is immutable")

    @property
    def k(self) -> int:
        return self.fiber.k

    @classmethod
    def identity(cls, m: int, space: CubeSpace) -> "BundleMorphism":
        return cls(RationalMap.identity(m), CubeMorphism.identity(space, m))

    def apply(self, x: Sequence, v: Mapping[Index, Sequence]) -> tuple[list, dict]:
        return list(self.base.evaluate(x)), cube_apply(self.fiber, v, x)

    def then(self, other: "BundleMorphism") -> "BundleMorphism":
        """``other ∘ self``."""
        return bundle_compose(other, self)

    def __eq__(self, other):
        if not isinstance(other, BundleMorphism):
            return NotImplemented
        return _bm_equal(self, other)

    def __hash__(self):
        return hash((self.base, self.fiber))

    def __repr__(self):
        return f"BundleMorphism(base={self.base!r}, fiber={self.fiber!r})"

    def to_json(self) -> dict:
        return {"base": self.base.to_json(), "fiber": self.fiber.to_json()}

    @classmethod
    def from_json(cls, doc) -> "BundleMorphism":
        base = RationalMap.from_json(require(doc, "base", dict))
        fib = CubeMorphism.from_json(require(doc, "fiber", dict))
        return cls(base, fib)


def bundle_compose(g: BundleMorphism, f: BundleMorphism) -> BundleMorphism:
    """``(ψ, g) ∘ (φ, f) = (ψ∘φ, g_{φ(x)} ∘ f_x)``."""
    if f.base.codim != g.base.arity:
        raise DimensionError("base maps are not composable")
    return BundleMorphism(g.base.compose(f.base), cube_compose(g.fiber.substitute(f.base), f.fiber))


def bundle_times(f: BundleMorphism, g: BundleMorphism) -> BundleMorphism:
    m, mm = f.base.arity, g.base.arity
    pr1 = RationalMap.coordinates(m + mm, list(range(m)))
    pr2 = RationalMap.coordinates(m + mm, list(range(m, m + mm)))
    base = f.base.compose(pr1).concat(g.base.compose(pr2))
    return BundleMorphism(base, cube_times(f.fiber.substitute(pr1), g.fiber.substitute(pr2)))


# ---------------------------------------------------------------- higher tangent maps


def higher_tangent(phi: RationalMap, k: int) -> BundleMorphism:
    """``T^kφ`` with I-component ``sum_{ν ∈ Part(I)} d^{|ν|}φ(x)(v_ν)``."""
    if k < 0:
        raise DimensionError("degree must be non-negative")
    m, r = phi.arity, phi.codim
    src = CubeSpace.uniform(k, m)
    tgt = CubeSpace.uniform(k, r)
    fam = {}
    for nu in src.partitions():
        l = nu.length
        shape = (r,) + (m,) * l
        t = np.empty(shape, dtype=object)
        for idx in np.ndindex(*shape):
            a = tuple(sorted(idx[1:]))
            t[idx] = phi.partial(a).comps[idx[0]]
        fam[nu.blocks] = t
    return BundleMorphism(phi, CubeMorphism(src, tgt, fam, m))


def tangent_map(phi: RationalMap) -> RationalMap:
    """``(x, y) -> (φ(x), dφ(x) y)`` as one rational map."""
    m = phi.arity
    ar = 2 * m
    field = rfield(ar)
    lift = RationalMap.coordinates(ar, list(range(m)))
    ys = field.gens[m:]
    base = phi.compose(lift)
    dirs = [field.zero] * phi.codim
    for a in range(m):
        d = phi.derivative(a).compose(lift)
        for i in range(phi.codim):
            dirs[i] = dirs[i] + ys[a] * d.comps[i]
    return base.concat(RationalMap(ar, dirs))


def total_rmap(F: BundleMorphism) -> tuple[RationalMap, list]:
    """The total-space map with variables ``(x, v_I for I in axis order)``.

    Also returns the layout: ``None`` for the base block and I for each axis.
    """
    m = F.base.arity
    src = F.fiber.source
    ar = m + src.total_dim()
    field = rfield(ar)
    lift = RationalMap.coordinates(ar, list(range(m)))
    pos = m
    vars_: dict[Index, list] = {}
    for I, d in src.dims.items():
        vars_[I] = list(field.gens[pos:pos + d])
        pos += d
    fib = F.fiber.substitute(lift)
    out = {I: [field.zero] * d for I, d in F.fiber.target.dims.items()}
    from .mulspace import _contract

    for nu, t in fib.family.items():
        I = tuple(sorted(i for B in nu for i in B))
        res = _contract(t, [vars_[B] for B in nu])
        for a in range(len(out[I])):
            out[I][a] = out[I][a] + res[a]
    comps = list(F.base.compose(lift).comps)
    for I in F.fiber.target.dims:
        comps.extend(out[I])
    layout = [None] + list(src.dims)
    return RationalMap(ar, comps), layout


def iterated_tangent(phi: RationalMap, k: int) -> tuple[RationalMap, list]:
    """``T(T(...T(φ)))`` as a rational map with a layout naming each block:
    the fresh direction added at step j is attached to generator j."""
    cur = phi
    layout: list = [None]
    for j in range(1, k + 1):
        cur = tangent_map(cur)
        layout = layout + [(j,) if key is None else key + (j,) for key in layout]
    return cur, layout


def compare_with_iterated(phi: RationalMap, k: int) -> bool:
    """``T^kφ`` against the k-fold tangent map after matching layouts."""
    m, r = phi.arity, phi.codim
    it, it_layout = iterated_tangent(phi, k)
    tk, tk_layout = total_rmap(higher_tangent(phi, k))
    ar = it.arity
    # variables of the total map in terms of the iterated variables
    block_start = {key: i * m for i, key in enumerate(it_layout)}
    coords = []
    for key in tk_layout:
        s = block_start[key]
        coords.extend(range(s, s + m))
    pulled = tk.compose(RationalMap.coordinates(ar, coords))
    out_start = {key: i * r for i, key in enumerate(tk_layout)}
    reordered = []
    for key in it_layout:
        s = out_start[key]
        reordered.extend(pulled.comps[s:s + r])
    return rmap_equal(RationalMap(ar, reordered), it)


def tangent_of_morphism(F: BundleMorphism) -> BundleMorphism:
    """Chart formula for ``TF`` over the tangent base: fibers double to
    ``E_I × E_I``; first halves carry ``b^ν``, second halves carry
    ``d_1 b^ν(y)`` on first halves plus ``b^ν`` with one slot taken from the
    second half."""
    m = F.base.arity
    ar = 2 * m
    field = rfield(ar)
    lift = RationalMap.coordinates(ar, list(range(m)))
    ys = field.gens[m:]
    fib = F.fiber
    src2, tgt2 = fib.source.double(), fib.target.double()
    fam = {}
    for nu, t in fib.family.items():
        I = tuple(sorted(i for B in nu for i in B))
        dout = fib.target.dims[I]
        dins = [fib.source.dims[B] for B in nu]
        shape = (2 * dout,) + tuple(2 * d for d in dins)
        T = np.empty(shape, dtype=object)
        T.fill(field.zero)
        lifted = np.vectorize(lambda e: subst(e, lift.comps, field), otypes=[object])(t)
        deriv = np.empty(t.shape, dtype=object)
        deriv.fill(field.zero)
        for idx in np.ndindex(*t.shape):
            e = t[idx]
            acc = field.zero
            for a in range(m):
                de = e.diff(e.field.gens[a])
                if de != 0:
                    acc = acc + ys[a] * subst(de, lift.comps, field)
            deriv[idx] = acc
        first = tuple(slice(0, d) for d in dins)
        T[(slice(0, dout),) + first] = lifted
        T[(slice(dout, 2 * dout),) + first] = deriv
        for i, d in enumerate(dins):
            sl = list(first)
            sl[i] = slice(d, 2 * d)
            T[(slice(dout, 2 * dout),) + tuple(sl)] = lifted
        fam[nu] = T
    return BundleMorphism(tangent_map(F.base), CubeMorphism(src2, tgt2, fam, ar))


# ---------------------------------------------------------------- truncation


def project_point(x: Sequence, v: Mapping[Index, Sequence], n: int, k: int | None = None) -> tuple[list, dict]:
    if k is not None and n > k:
        raise DimensionError(f"cannot project degree {k} to {n}")
    return list(x), {I: list(w) for I, w in v.items() if I[-1] <= n}


def project_bundle_morphism(F: BundleMorphism, n: int) -> BundleMorphism:
    return BundleMorphism(F.base, project_morphism(F.fiber, n))


def restrict_bundle_morphism(F: BundleMorphism, P) -> BundleMorphism:
    return BundleMorphism(F.base, cube_restrict(F.fiber, P))


def minus_bundle_morphism(F: BundleMorphism) -> BundleMorphism:
    return BundleMorphism(F.base, minus_functor(F.fiber))


# ---------------------------------------------------------------- truncated limits


@dataclass(frozen=True)
class TruncatedLimitElement:
    """Points ``(x_k, v_k)`` of the degree-k bundles for k = 0..N."""

    levels: tuple

    @classmethod
    def of(cls, levels: Sequence[tuple[Sequence, Mapping]]) -> "TruncatedLimitElement":
        return cls(tuple((tuple(Fraction(a) for a in x), {tuple(I): tuple(Fraction(c) for c in w) for I, w in v.items()}) for x, v in levels))

    @property
    def N(self) -> int:
        return len(self.levels) - 1

    @classmethod
    def lift_point(cls, x: Sequence, v: Mapping[Index, Sequence], N: int) -> "TruncatedLimitElement":
        """Levels obtained by truncating one degree-N point."""
        return cls.of([project_point(x, v, n) for n in range(N + 1)])

    def to_json(self) -> dict:
        from .jsonio import frac_to_str

        return {
            "levels": [
                {"x": [frac_to_str(a) for a in x], "v": [{"I": list(I), "w": [frac_to_str(c) for c in w]} for I, w in v.items()]}
                for x, v in self.levels
            ]
        }

    @classmethod
    def from_json(cls, doc) -> "TruncatedLimitElement":
        from .jsonio import str_to_frac

        levels = []
        for lv in require(doc, "levels", list):
            x = [str_to_frac(a) for a in require(lv, "x", list)]
            v = {tuple(require(e, "I", list)): [str_to_frac(c) for c in require(e, "w", list)] for e in require(lv, "v", list)}
            levels.append((x, v))
        return cls.of(levels)


def limit_check(e: TruncatedLimitElement) -> tuple[bool, dict]:
    """Every level truncated to any lower level n equals level n."""
    for k, (xk, vk) in enumerate(e.levels):
        if any(I[-1] > k for I in vk):
            return False, {"level": k, "reason": "axis beyond the level degree"}
        for n in range(k + 1):
            xn, vn = e.levels[n]
            px, pv = project_point(xk, vk, n)
            if tuple(px) != tuple(xn) or {I: tuple(w) for I, w in pv.items()} != {I: tuple(w) for I, w in vn.items()}:
                return False, {"k": k, "n": n, "reason": "truncation mismatch"}
    return True, {}


def limit_map(family: Sequence[BundleMorphism], e: TruncatedLimitElement, check_family: bool = True) -> TruncatedLimitElement:
    """Apply level-wise morphisms ``f_k``; the family must commute with
    truncation to every lower level."""
    ok, wit = limit_check(e)
    if not ok:
        raise ValidationError("input element is not coherent", wit)
    if len(family) < len(e.levels):
        raise DimensionError("family has fewer levels than the element")
    if check_family:
        for k in range(len(e.levels)):
            for n in range(k):
                lhs = project_bundle_morphism(family[k], n)
                if not (rmap_equal(lhs.base, family[n].base) and lhs.fiber == family[n].fiber):
                    raise ValidationError("family is not compatible with truncation", {"k": k, "n": n})
    out = [family[k].apply(x, v) for k, (x, v) in enumerate(e.levels)]
    res = TruncatedLimitElement.of(out)
    ok, wit = limit_check(res)
    if not ok:
        raise ValidationError("image is not coherent", wit)
    return res


# ---------------------------------------------------------------- local bundles and cocycles


def check_cocycle(
    charts: Mapping[Hashable, DomainBox],
    trans: Mapping[tuple, tuple[DomainBox, object]],
    base_of: Callable[[object], RationalMap],
    compose_fn: Callable[[object, object], object],
    equal_fn: Callable[[object, object], bool],
    identity_fn: Callable[[Hashable], object],
    dim: int,
    grid: int = 3,
    extra_check: Callable | None = None,
) -> dict:
    """Shared chart-transition validation.

    Checks ``φ^{αα} = id``, that sampled overlap points land in the partner
    overlap, and ``φ^{α'α''} ∘ φ^{αα'} = φ^{αα''}`` for every triple whose
    overlap contains a sample point.
    """
    checks = 0
    for (a, b), (box, obj) in trans.items():
        if a not in charts or b not in charts:
            return _fail("unknown chart", {"pair": [str(a), str(b)]}, checks)
    for a in charts:
        if (a, a) in trans:
            checks += 1
            if not equal_fn(trans[(a, a)][1], identity_fn(a)):
                return _fail("self transition is not the identity", {"pair": [str(a), str(a)]}, checks)
    for (a, b), (box, obj) in trans.items():
        if a == b:
            continue
        if (b, a) not in trans:
            return _fail("missing reverse transition", {"pair": [str(a), str(b)]}, checks)
        rbox = trans[(b, a)][0]
        base = base_of(obj)
        for x in box.samples(dim, grid):
            if not charts[a].contains(x):
                return _fail("overlap leaves its chart", {"pair": [str(a), str(b)], "x": [str(t) for t in x]}, checks)
            try:
                y = base.evaluate(x)
            except DomainError:
                continue
            checks += 1
            if not rbox.contains(y) or not charts[b].contains(y):
                return _fail("overlap image leaves the partner overlap", {"pair": [str(a), str(b)], "x": [str(t) for t in x], "image": [str(t) for t in y]}, checks)
        if extra_check is not None:
            res = extra_check(a, b, box, obj)
            checks += 1
            if res is not None:
                return _fail(res[0], dict(res[1], pair=[str(a), str(b)]), checks)
    for (a, b), (box_ab, f_ab) in trans.items():
        for (b2, c), (box_bc, f_bc) in trans.items():
            if b2 != b or a == b or b == c:
                continue
            if (a, c) in trans:
                box_ac, f_ac = trans[(a, c)]
            elif a == c:
                box_ac, f_ac = charts[a], identity_fn(a)
            else:
                continue
            inter = box_ab.intersect(box_ac, dim)
            if inter is None:
                continue
            witness = None
            for x in inter.samples(dim, grid):
                try:
                    y = base_of(f_ab).evaluate(x)
                except DomainError:
                    continue
                if box_bc.contains(y):
                    witness = x
                    break
            if witness is None:
                continue
            checks += 1
            lhs = compose_fn(f_bc, f_ab)
            if not equal_fn(lhs, f_ac):
                return _fail(
                    "cocycle identity fails",
                    {"triple": [str(a), str(b), str(c)], "x": [str(t) for t in witness]},
                    checks,
                )
    return {"status": "pass", "checks": checks, "witness": None}


def _fail(reason: str, wit: dict, checks: int) -> dict:
    return {"status": "fail", "checks": checks, "witness": dict(wit, reason=reason)}


def _bm_equal(f: BundleMorphism, g: BundleMorphism) -> bool:
    return f.base.arity == g.base.arity and f.base.codim == g.base.codim and rmap_equal(f.base, g.base) and f.fiber == g.fiber


class LocalMultilinearBundle:
    """Charts of the base, a typical fiber cube, and transitions
    ``(α, β) -> (overlap box in chart α, BundleMorphism)``."""

    __slots__ = ("k", "base_dim", "charts", "fiber", "transitions")

    def __init__(self, k: int, base_dim: int, charts: Mapping, fiber: CubeSpace, transitions: Mapping):
        if fiber.k != k:
            raise DimensionError("fiber degree differs from the bundle degree")
        for (a, b), (box, F) in transitions.items():
            if F.base.arity != base_dim or F.base.codim != base_dim:
                raise DimensionError(f"transition {a}->{b} has the wrong base dimension")
            if F.fiber.source != fiber or F.fiber.target != fiber:
                raise DimensionError(f"transition {a}->{b} has the wrong fiber")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "base_dim", base_dim)
        object.__setattr__(self, "charts", dict(charts))
        object.__setattr__(self, "fiber", fiber)
        object.__setattr__(self, "transitions", dict(transitions))

    def __setattr__(self, name, value):
        raise AttributeError("LocalMultilinearBundle is immutable")

    def validate(self, grid: int = 3) -> dict:
        """Cocycle identities plus fiberwise invertibility at sampled base points."""

        def invertible_at(a, b, box, F):
            for x in box.samples(self.base_dim, grid, limit=8):
                try:
                    ok, _ = cube_invert(F.fiber.at(x))
                except (DomainError, ZeroDivisionError):
                    continue
                if not ok:
                    return "fiber transition not invertible", {"x": [str(t) for t in x]}
            return None

        return check_cocycle(
            self.charts,
            self.transitions,
            lambda F: F.base,
            bundle_compose,
            _bm_equal,
            lambda a: BundleMorphism.identity(self.base_dim, self.fiber),
            self.base_dim,
            grid,
            invertible_at,
        )

    def map_transitions(self, fn, fiber: CubeSpace | None = None, k: int | None = None, base_dim: int | None = None, charts=None) -> "LocalMultilinearBundle":
        trans = {ab: (box, fn(F)) for ab, (box, F) in self.transitions.items()}
        fib = fiber if fiber is not None else (next(iter(trans.values()))[1].fiber.source if trans else self.fiber)
        return LocalMultilinearBundle(
            k if k is not None else fib.k,
            base_dim if base_dim is not None else self.base_dim,
            charts if charts is not None else self.charts,
            fib,
            trans,
        )

    def project(self, n: int) -> "LocalMultilinearBundle":
        if n > self.k:
            raise DimensionError(f"cannot project degree {self.k} to {n}")
        fib = redegree(self.fiber.restrict([I for I in self.fiber.dims if I[-1] <= n]), n)
        return self.map_transitions(lambda F: project_bundle_morphism(F, n), fiber=fib, k=n)

    def restrict(self, P) -> "LocalMultilinearBundle":
        fib = self.fiber.restrict(P)
        return self.map_transitions(lambda F: restrict_bundle_morphism(F, P), fiber=fib)

    def tangent(self) -> "LocalMultilinearBundle":
        charts = {a: box.times(DomainBox.all(), self.base_dim, self.base_dim) for a, box in self.charts.items()}
        trans = {
            ab: (box.times(DomainBox.all(), self.base_dim, self.base_dim), tangent_of_morphism(F))
            for ab, (box, F) in self.transitions.items()
        }
        return LocalMultilinearBundle(self.k, 2 * self.base_dim, charts, self.fiber.double(), trans)

    def times(self, other: "LocalMultilinearBundle") -> "LocalMultilinearBundle":
        if self.k != other.k:
            raise DimensionError("bundle degrees differ")
        m, mm = self.base_dim, other.base_dim
        charts = {(a, c): ba.times(bc, m, mm) for a, ba in self.charts.items() for c, bc in other.charts.items()}
        trans = {}
        for a in self.charts:
            for c in other.charts:
                for b in self.charts:
                    for d in other.charts:
                        if (a == b or (a, b) in self.transitions) and (c == d or (c, d) in other.transitions):
                            if a == b and c == d:
                                continue
                            box1, F1 = self.transitions.get((a, b), (self.charts[a], BundleMorphism.identity(m, self.fiber)))
                            box2, F2 = other.transitions.get((c, d), (other.charts[c], BundleMorphism.identity(mm, other.fiber)))
                            trans[((a, c), (b, d))] = (box1.times(box2, m, mm), bundle_times(F1, F2))
        return LocalMultilinearBundle(self.k, m + mm, charts, self.fiber.times(other.fiber), trans)

    def __eq__(self, other):
        if not isinstance(other, LocalMultilinearBundle):
            return NotImplemented
        if (self.k, self.base_dim, self.fiber) != (other.k, other.base_dim, other.fiber):
            return False
        if self.charts != other.charts or set(self.transitions) != set(other.transitions):
            return False
        return all(
            self.transitions[ab][0] == other.transitions[ab][0] and _bm_equal(self.transitions[ab][1], other.transitions[ab][1])
            for ab in self.transitions
        )

    def transition_data(self) -> dict:
        """Canonical JSON-ready transition data."""
        return {f"{a}->{b}": F.to_json() for (a, b), (box, F) in sorted(self.transitions.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1])))}

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "base_dim": self.base_dim,
            "fiber": self.fiber.to_json(),
            "charts": [{"id": str(a), "box": box.to_json()} for a, box in self.charts.items()],
            "transitions": [
                {"from": str(a), "to": str(b), "box": box.to_json(), "morphism": F.to_json()}
                for (a, b), (box, F) in self.transitions.items()
            ],
        }

    @classmethod
    def from_json(cls, doc) -> "LocalMultilinearBundle":
        k = require(doc, "k", int)
        m = require(doc, "base_dim", int)
        fiber = CubeSpace.from_json(require(doc, "fiber", dict))
        charts = {require(c, "id", str): DomainBox.from_json(c.get("box", "all")) for c in require(doc, "charts", list)}
        trans = {}
        for t in require(doc, "transitions", list):
            a, b = require(t, "from", str), require(t, "to", str)
            if a not in charts or b not in charts:
                raise InputError(f"transition {a}->{b} references an unknown chart")
            trans[(a, b)] = (DomainBox.from_json(t.get("box", "all")), BundleMorphism.from_json(require(t, "morphism", dict)))
        return cls(k, m, charts, fiber, trans)


def bundle_minus_even(F: LocalMultilinearBundle) -> LocalMultilinearBundle:
    if not F.fiber.is_purely_even():
        raise ValidationError("bundle is not purely even", {"reason": "odd axis present"})
    return F.map_transitions(minus_bundle_morphism)


def trivial_tangent_bundle(charts: Mapping, transitions: Mapping[tuple, tuple[DomainBox, RationalMap]], m: int, k: int) -> LocalMultilinearBundle:
    """``T^kM`` for a manifold given by charts and base transitions."""
    trans = {ab: (box, higher_tangent(phi, k)) for ab, (box, phi) in transitions.items()}
    return LocalMultilinearBundle(k, m, charts, CubeSpace.uniform(k, m), trans)
