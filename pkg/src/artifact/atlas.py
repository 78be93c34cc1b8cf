"""Supermanifolds and super vector bundles as validated chart data."""

from __future__ import annotations

from typing import Hashable, Mapping, Sequence

import numpy as np

from .errors import DimensionError, InputError, ValidationError
from .grassmann import GrassmannMorphism
from .jsonio import require
from .mulbundle import (
    BundleMorphism,
    LocalMultilinearBundle,
    check_cocycle,
    higher_tangent,
)
from .mulspace import CubeMorphism, CubeSpace, cube_restrict, even_subsets, minus_functor
from .partitions import sign as part_sign
from .skeleton import (
    DomainBox,
    Interval,
    Skeleton,
    compose,
    differential,
    invert,
    is_batchelor as skel_is_batchelor,
    linear_skeleton,
    pair,
    parity_change,
    product_skeleton,
    projection,
    truncate_skeleton,
    ufamily_report,
)
from .superlin import RationalMap, SuperPoint, SuperVectorSpace, apply_point_morphism, rfield


class SuperAtlas:
    """Model space, chart boxes, and transition skeletons whose boxes are the
    overlaps inside the source chart.

    ``split`` optionally declares the model as ``H ⊕ E`` (a super vector
    bundle over a supermanifold modelled on H).
    """

    __slots__ = ("model", "charts", "transitions", "split")

    def __init__(self, model: SuperVectorSpace, charts: Mapping[Hashable, DomainBox], transitions: Mapping[tuple, Skeleton], split: tuple[int, int] | None = None):
        for (a, b), s in transitions.items():
            if a not in charts or b not in charts:
                raise DimensionError(f"transition {a}->{b} references an unknown chart")
            if s.source != model or s.target != model:
                raise DimensionError(f"transition {a}->{b} is not an endomorphism of the model")
        for a, box in charts.items():
            if not box.is_all() and len(box.intervals) != model.p:
                raise DimensionError(f"chart {a} box has the wrong dimension")
        object.__setattr__(self, "model", model)
        object.__setattr__(self, "charts", dict(charts))
        object.__setattr__(self, "transitions", dict(transitions))
        object.__setattr__(self, "split", None if split is None else tuple(split))

    def __setattr__(self, name, value):
        raise AttributeError("SuperAtlas is immutable")

    def __eq__(self, other):
        if not isinstance(other, SuperAtlas):
            return NotImplemented
        return (
            self.model == other.model
            and self.charts == other.charts
            and self.split == other.split
            and set(self.transitions) == set(other.transitions)
            and all(self.transitions[k] == other.transitions[k] and self.transitions[k].box == other.transitions[k].box for k in self.transitions)
        )

    def map_transitions(self, fn, model=None, charts=None, split="same") -> "SuperAtlas":
        return SuperAtlas(
            model if model is not None else self.model,
            charts if charts is not None else self.charts,
            {ab: fn(s) for ab, s in self.transitions.items()},
            self.split if split == "same" else split,
        )

    def to_json(self) -> dict:
        doc = {
            "model": self.model.to_json(),
            "charts": [{"id": str(a), "box": box.to_json()} for a, box in self.charts.items()],
            "overlaps": [{"from": str(a), "to": str(b), "box": s.box.to_json()} for (a, b), s in self.transitions.items()],
            "transitions": [{"from": str(a), "to": str(b), "skeleton": _strip_box(s.to_json())} for (a, b), s in self.transitions.items()],
        }
        if self.split is not None:
            doc["split"] = list(self.split)
        return doc

    @classmethod
    def from_json(cls, doc) -> "SuperAtlas":
        model = SuperVectorSpace.from_json(require(doc, "model", dict))
        charts = {}
        for c in require(doc, "charts", list):
            cid = require(c, "id", str)
            if cid in charts:
                raise InputError(f"duplicate chart id {cid}")
            charts[cid] = DomainBox.from_json(c.get("box", "all"))
        overlaps = {}
        for o in doc.get("overlaps", []):
            overlaps[(require(o, "from", str), require(o, "to", str))] = DomainBox.from_json(o.get("box", "all"))
        trans = {}
        for t in require(doc, "transitions", list):
            a, b = require(t, "from", str), require(t, "to", str)
            if (a, b) in trans:
                raise InputError(f"duplicate transition {a}->{b}")
            if a not in charts or b not in charts:
                raise InputError(f"transition {a}->{b} references an unknown chart")
            s = Skeleton.from_json(require(t, "skeleton", dict))
            box = overlaps.get((a, b), charts[a] if a == b else None)
            if box is None:
                raise InputError(f"transition {a}->{b} has no declared overlap")
            trans[(a, b)] = s.with_box(box)
        split = doc.get("split")
        return cls(model, charts, trans, tuple(split) if split is not None else None)


def _strip_box(doc: dict) -> dict:
    doc = dict(doc)
    doc["source"] = {k: v for k, v in doc["source"].items() if k != "box"}
    return doc


# ---------------------------------------------------------------- validation


def cocycle_check(a: SuperAtlas, grid: int = 3) -> dict:
    """Identity, overlap and two-cocycle identities, the latter exact via
    skeleton composition."""
    return check_cocycle(
        a.charts,
        {ab: (s.box, s) for ab, s in a.transitions.items()},
        lambda s: s.f0(),
        lambda g, f: compose(g, f, check_domain=False),
        lambda x, y: x == y,
        lambda c: Skeleton.identity(a.model),
        a.model.p,
        grid,
    )


class LocalSuperMorphism:
    """Chart-wise skeletons ``f^{αβ}`` from charts of ``source`` to charts
    of ``target``; the box of each skeleton is its domain in chart α."""

    __slots__ = ("source", "target", "maps")

    def __init__(self, source: SuperAtlas, target: SuperAtlas, maps: Mapping[tuple, Skeleton]):
        for (a, b), s in maps.items():
            if a not in source.charts or b not in target.charts:
                raise DimensionError(f"map {a}->{b} references an unknown chart")
            if s.source != source.model or s.target != target.model:
                raise DimensionError(f"map {a}->{b} has the wrong spaces")
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "maps", dict(maps))

    def __setattr__(self, name, value):
        raise AttributeError("LocalSuperMorphism is immutable")


def morphism_check(m: LocalSuperMorphism, grid: int = 3) -> dict:
    """``ψ^{ββ'} ∘ f^{αβ} ∘ φ^{α'α} = f^{α'β'}`` wherever a sample point
    of chart α' reaches all the relevant domains."""
    src, tgt = m.source, m.target
    p = src.model.p
    checks = 0

    def trans(atlas, a, b):
        if a == b:
            return atlas.transitions.get((a, a), Skeleton.identity(atlas.model).with_box(atlas.charts[a]))
        return atlas.transitions.get((a, b))

    for (al, be), f in m.maps.items():
        for al2 in src.charts:
            phi = trans(src, al2, al)
            if phi is None:
                continue
            for be2 in tgt.charts:
                psi = trans(tgt, be, be2)
                g = m.maps.get((al2, be2))
                if psi is None or g is None:
                    continue
                witness = None
                for x in phi.box.intersect(g.box, p).samples(p, grid) if phi.box.intersect(g.box, p) else []:
                    try:
                        y = phi.f0().evaluate(x)
                        if not f.box.contains(y):
                            continue
                        z = f.f0().evaluate(y)
                    except Exception:
                        continue
                    if psi.box.contains(z):
                        witness = x
                        break
                if witness is None:
                    continue
                checks += 1
                lhs = compose(psi, compose(f, phi, check_domain=False), check_domain=False)
                if lhs != g:
                    return {
                        "status": "fail",
                        "checks": checks,
                        "witness": {"reason": "compatibility fails", "maps": [str(al2), str(al), str(be), str(be2)], "x": [str(t) for t in witness]},
                    }
    return {"status": "pass", "checks": checks, "witness": None}


def invert_morphism(m: LocalSuperMorphism, hints: Mapping[tuple, RationalMap] | None = None) -> LocalSuperMorphism:
    """Chart-wise inverse ``g^{βα} = (f^{αβ})^{-1}``."""
    hints = hints or {}
    maps = {}
    for (a, b), f in m.maps.items():
        g = invert(f, hints.get((a, b)))
        maps[(b, a)] = g.with_box(m.target.charts[b])
    return LocalSuperMorphism(m.target, m.source, maps)


# ---------------------------------------------------------------- bundle extraction


def skeleton_cube(phi: Skeleton, n: int) -> CubeMorphism:
    """Transition of the degree-n bundle: each entry is a signed derivative of
    the body map applied to an odd component, even blocks taking E_0 slots first."""
    E = phi.source
    F = phi.target
    src = CubeSpace.graded(n, E.p, E.q)
    tgt = CubeSpace.graded(n, F.p, F.q)
    p = E.p
    fam = {}
    field = rfield(p)
    for om in src.partitions():
        e, o = om.n_even, om.n_odd
        if o > E.q:
            continue
        comp = phi.comp(o)
        if comp.is_zero():
            continue
        sg = part_sign(om)
        shape = (tgt.dims[om.total],) + tuple(src.dims[B] for B in om.blocks)
        t = np.empty(shape, dtype=object)
        t.fill(field.zero)
        if 0 in shape:
            continue
        nonzero = False
        for idx in np.ndindex(*shape):
            a = tuple(sorted(idx[1:1 + e]))
            c = idx[1 + e:]
            s, rm = comp.lookup(c)
            if rm is None:
                continue
            val = rm.partial(a).comps[idx[0]]
            if val != 0:
                t[idx] = sg * s * val
                nonzero = True
        if nonzero:
            fam[om.blocks] = t
    return CubeMorphism(src, tgt, fam, p)


def extract_bundle(a: SuperAtlas, n: int) -> LocalMultilinearBundle:
    """The degree-n multilinear bundle of points over Λ_n."""
    if n < 0:
        raise DimensionError("level must be non-negative")
    trans = {ab: (s.box, BundleMorphism(s.f0(), skeleton_cube(s, n))) for ab, s in a.transitions.items()}
    return LocalMultilinearBundle(n, a.model.p, a.charts, CubeSpace.graded(n, a.model.p, a.model.q), trans)


def point_to_fiber(v: SuperPoint) -> tuple[list, dict]:
    """``(x, (v_I)_I)`` for a point over Λ_n."""
    x = list(v.component(()))
    fib = {}
    from .mulspace import all_subsets

    for I in all_subsets(v.n):
        fib[I] = list(v.component(I))
    return x, fib


def fiber_to_point(space: SuperVectorSpace, n: int, x: Sequence, fib: Mapping) -> SuperPoint:
    comps = {(): list(x)}
    comps.update({I: list(w) for I, w in fib.items()})
    return SuperPoint(space, n, comps)


# ---------------------------------------------------------------- functors on atlases


def truncate(a: SuperAtlas, n: int) -> SuperAtlas:
    if n < 0:
        raise DimensionError("level must be non-negative")
    return a.map_transitions(lambda s: truncate_skeleton(s, n))


def embed_manifold(m: int, charts: Mapping, transitions: Mapping[tuple, tuple[DomainBox, RationalMap]], grid: int = 3) -> SuperAtlas:
    """Purely even super atlas with skeletons ``(φ_0, 0, ...)``."""
    model = SuperVectorSpace(m, 0)
    trans = {}
    for ab, (box, phi) in transitions.items():
        if phi.arity != m or phi.codim != m:
            raise DimensionError(f"transition {ab} has the wrong dimension")
        trans[ab] = Skeleton.build(model, model, {0: {(): phi}}, box)
    a = SuperAtlas(model, charts, trans)
    rep = cocycle_check(a, grid)
    if rep["status"] != "pass":
        raise ValidationError("manifold transitions violate the cocycle condition", rep["witness"])
    return a


def embed_vbundle(p: int, r: int, charts: Mapping, transitions: Mapping[tuple, tuple[DomainBox, RationalMap, RationalMap]], grid: int = 3) -> SuperAtlas:
    """Super atlas of vector-bundle type: transitions with only the base map
    and the fiber map nonzero; the fiber map is given as a map of ``(x, y)``
    that must be linear in y."""
    model = SuperVectorSpace(p, r)
    field = rfield(p + r)
    zero_y = RationalMap(p + r, list(field.gens[:p]) + [field.zero] * r)
    trans = {}
    for ab, (box, phi0, phi1) in transitions.items():
        if phi1.arity != p + r or phi1.codim != r:
            raise DimensionError(f"fiber map {ab} has the wrong shape")
        if not phi1.compose(zero_y).is_zero() or any(
            not phi1.derivative(p + i).derivative(p + j).is_zero() for i in range(r) for j in range(i, r)
        ):
            raise ValidationError("fiber map is not linear", {"pair": [str(x) for x in ab], "reason": "nonlinear fiber map"})
        cols = {}
        for b in range(r):
            col = phi1.derivative(p + b).compose(zero_y)
            col = RationalMap(p, [subst_first(e, p) for e in col.comps])
            if not col.is_zero():
                cols[(b,)] = col
        trans[ab] = Skeleton.build(model, model, {0: {(): phi0}, 1: cols}, box)
    a = SuperAtlas(model, charts, trans)
    rep = cocycle_check(a, grid)
    if rep["status"] != "pass":
        raise ValidationError("bundle transitions violate the cocycle condition", rep["witness"])
    return a


def subst_first(e, p: int):
    """Reinterpret a field element using only the first p variables in arity p."""
    from .superlin import subst as _subst

    field = rfield(p)
    args = list(field.gens) + [field.zero] * (e.field.ngens - p)
    return _subst(e, args, field)


def vbundle_data(a: SuperAtlas) -> dict:
    """``(φ_0, φ_1)`` of each transition, with φ_1 as a map of ``(x, y)``."""
    p, r = a.model.p, a.model.q
    field = rfield(p + r)
    lift = RationalMap.coordinates(p + r, list(range(p)))
    out = {}
    for ab, s in truncate(a, 1).transitions.items():
        acc = [field.zero] * r
        for (b,), col in s.comps[1].entries.items() if r else []:
            lc = col.compose(lift)
            for i in range(r):
                acc[i] = acc[i] + field.gens[p + b] * lc.comps[i]
        out[ab] = (s.f0(), RationalMap(p + r, acc))
    return out


def is_batchelor(a: SuperAtlas | Skeleton) -> bool:
    """No transition component of degree two or more."""
    if isinstance(a, Skeleton):
        return skel_is_batchelor(a)
    return all(skel_is_batchelor(s) for s in a.transitions.values())


def add_chart(
    a: SuperAtlas,
    new_id: Hashable,
    via: Hashable,
    phi: Skeleton,
    inverse_g0: RationalMap | None = None,
    image_box: DomainBox | None = None,
    new_box: DomainBox | None = None,
    grid: int = 3,
) -> SuperAtlas:
    """Refine an atlas by a chart ``new_id`` reached from chart ``via`` by
    the transition ``phi`` (domain ``phi.box`` in chart ``via``).

    Box images are not computed: ``image_box`` is the overlap as seen from
    the new chart and ``new_box`` the new chart's domain, both default to
    everything. Transitions to the other charts are derived only when the
    chart change is global; the result must pass the cocycle check.
    """
    if new_id in a.charts:
        raise InputError(f"chart {new_id} already exists")
    image_box = image_box or DomainBox.all()
    inv = invert(phi, inverse_g0)
    charts = dict(a.charts)
    charts[new_id] = new_box or DomainBox.all()
    trans = dict(a.transitions)
    trans[(via, new_id)] = phi
    trans[(new_id, via)] = inv.with_box(image_box)
    if phi.box.is_all() and image_box.is_all():
        for (c, d), s in a.transitions.items():
            if d == via and c != via:
                trans[(c, new_id)] = compose(phi, s, check_domain=False).with_box(s.box)
                back = a.transitions.get((d, c))
                if back is not None and back.box.is_all():
                    trans[(new_id, c)] = compose(back, inv, check_domain=False).with_box(DomainBox.all())
    out = SuperAtlas(a.model, charts, trans, a.split)
    rep = cocycle_check(out, grid)
    if rep["status"] != "pass":
        raise ValidationError("refined atlas violates the cocycle condition", rep["witness"])
    return out


def atlas_product(a: SuperAtlas, b: SuperAtlas) -> SuperAtlas:
    model = a.model * b.model
    charts = {(x, y): bx.times(by, a.model.p, b.model.p) for x, bx in a.charts.items() for y, by in b.charts.items()}
    trans = {}
    for x in a.charts:
        for y in b.charts:
            for x2 in a.charts:
                for y2 in b.charts:
                    if (x, y) == (x2, y2):
                        continue
                    s1 = a.transitions.get((x, x2)) if x != x2 else Skeleton.identity(a.model, a.charts[x])
                    s2 = b.transitions.get((y, y2)) if y != y2 else Skeleton.identity(b.model, b.charts[y])
                    if s1 is None or s2 is None:
                        continue
                    trans[((x, y), (x2, y2))] = product_skeleton(s1, s2)
    return SuperAtlas(model, charts, trans)


# ---------------------------------------------------------------- tangent atlas and vector bundles


def tangent_skeleton(s: Skeleton) -> Skeleton:
    """Tangent transition on the doubled model: base part plus differential."""
    E = s.source
    d = differential(s)
    base = compose(s.with_box(DomainBox.all()), projection(E, E, 0), check_domain=False)
    return pair(base, d.with_box(DomainBox.all())).with_box(d.box).with_product((E.p, E.q))


def tangent_atlas(a: SuperAtlas) -> SuperAtlas:
    E = a.model
    charts = {c: box.times(DomainBox.all(), E.p, E.p) for c, box in a.charts.items()}
    return SuperAtlas(E * E, charts, {ab: tangent_skeleton(s) for ab, s in a.transitions.items()}, (E.p, E.q))


def split_transition(s: Skeleton, split: tuple[int, int]) -> tuple[Skeleton, Skeleton]:
    """``(φ, ψ)`` of a transition on ``H ⊕ E``: φ restricted to the H block
    of the target and ψ the E block, both as maps of the full source."""
    pH, qH = split
    T = s.target
    H = SuperVectorSpace(pH, qH)
    Fib = SuperVectorSpace(T.p - pH, T.q - qH)
    sel = [linear_skeleton(T, H, [[1 if j == i else 0 for j in range(T.p)] for i in range(pH)], [[1 if j == i else 0 for j in range(T.q)] for i in range(qH)]),
           linear_skeleton(T, Fib, [[1 if j == i + pH else 0 for j in range(T.p)] for i in range(Fib.p)], [[1 if j == i + qH else 0 for j in range(T.q)] for i in range(Fib.q)])]
    phi = compose(sel[0], s.with_box(DomainBox.all()), check_domain=False).with_box(s.box)
    psi = compose(sel[1], s.with_box(DomainBox.all()), check_domain=False).with_box(s.box).with_product((pH, qH))
    return phi, psi


def svbundle_validate(a: SuperAtlas, grid: int = 3) -> dict:
    """Transitions split as ``(φ ∘ pr_H, ψ)`` with ψ a fiberwise linear
    family, plus the cocycle."""
    if a.split is None:
        return {"status": "fail", "checks": 0, "witness": {"reason": "model is not declared as a product"}}
    pH, qH = a.split
    checks = 0
    for (x, y), s in a.transitions.items():
        phi, psi = split_transition(s, a.split)
        checks += 1
        # φ may only see the base block
        for c in phi.comps:
            for t, rm in c.entries.items():
                if any(i >= qH for i in t) or any(not rm.derivative(j).is_zero() for j in range(pH, a.model.p)):
                    return {"status": "fail", "checks": checks, "witness": {"pair": [str(x), str(y)], "reason": "base transition depends on the fiber"}}
        rep = ufamily_report(psi)
        if not rep.ok:
            return {"status": "fail", "checks": checks, "witness": dict(rep.witness, pair=[str(x), str(y)])}
    res = cocycle_check(a, grid)
    res["checks"] += checks
    return res


def svbundle_parity(a: SuperAtlas) -> SuperAtlas:
    """Parity change of the fiber part of every transition, on ``H ⊕ ΠE``."""
    if a.split is None:
        raise ValidationError("model is not declared as a product", {"reason": "no split"})
    pH, qH = a.split
    H = SuperVectorSpace(pH, qH)
    E = SuperVectorSpace(a.model.p - pH, a.model.q - qH)
    newE = E.parity_swap()
    model = H * newE
    trans = {}
    for ab, s in a.transitions.items():
        phi, psi = split_transition(s, a.split)
        ppsi = parity_change(psi)
        # φ only depends on H; re-express it on the new source
        phiH = restrict_to_base(phi, H)
        phi_new = compose(phiH, projection(H, newE, 0), check_domain=False)
        trans[ab] = pair(phi_new, ppsi.with_product(None)).with_box(ppsi.box).with_product(a.split)
    charts = {c: (box if box.is_all() else DomainBox(box.intervals[:pH] + (Interval(),) * newE.p)) for c, box in a.charts.items()}
    return SuperAtlas(model, charts, trans, a.split)


def restrict_to_base(phi: Skeleton, H: SuperVectorSpace) -> Skeleton:
    """A map of ``H ⊕ E`` that ignores E, as a map of H."""
    pH, qH = H.p, H.q
    entries = {}
    for c in phi.comps:
        if c.k > qH:
            break
        ent = {}
        for t, rm in c.entries.items():
            if any(i >= qH for i in t):
                continue
            ent[t] = RationalMap(pH, [subst_first(e, pH) for e in rm.comps])
        entries[c.k] = ent
    box = None if phi.box.is_all() else DomainBox(phi.box.intervals[:pH])
    return Skeleton.build(H, phi.target, entries, box)


# ---------------------------------------------------------------- points and the even model


def point_family(a: SuperAtlas, chart: Hashable, x: Sequence, N: int) -> list[SuperPoint]:
    """``x_Λ`` for Λ_0..Λ_N: the real point viewed over each Grassmann algebra."""
    if chart not in a.charts:
        raise InputError(f"unknown chart {chart}")
    if not a.charts[chart].contains(x):
        raise ValidationError("point lies outside its chart", {"chart": str(chart)})
    return [SuperPoint.real(a.model, n, list(x)) for n in range(N + 1)]


def points_natural(a: SuperAtlas, chart, x: Sequence, rho: GrassmannMorphism) -> bool:
    fam = point_family(a, chart, x, max(rho.n_src, rho.n_tgt))
    return apply_point_morphism(rho, fam[rho.n_src]) == fam[rho.n_tgt]


def even_model_iso(a: SuperAtlas, k: int, n: int) -> dict:
    """Compare the even part of the degree-n bundle of points with the
    sign-twisted even restriction of ``T^k``."""
    if a.model.q != 0:
        return {"status": "fail", "checks": 0, "witness": {"reason": "atlas is not purely even"}}
    if n > k:
        raise DimensionError("need n <= k")
    P = even_subsets(n)
    checks = 0
    for (x, y), s in a.transitions.items():
        lhs = skeleton_cube(s, n)
        lhs = cube_restrict(lhs, P)
        tk = higher_tangent(s.f0(), k).fiber
        rhs = cube_restrict(tk, P)
        rhs = CubeMorphism(CubeSpace(n, rhs.source.dims), CubeSpace(n, rhs.target.dims), rhs.family, rhs.arity)
        rhs = minus_functor(rhs)
        checks += 1
        if lhs != rhs:
            bad = sorted(set(lhs.family) ^ set(rhs.family)) or [nu for nu in lhs.family if not np.array_equal(lhs.family[nu], rhs.family[nu])]
            return {"status": "fail", "checks": checks, "witness": {"pair": [str(x), str(y)], "nu": [list(map(list, nu)) for nu in bad[:1]]}}
    return {"status": "pass", "checks": checks, "witness": None}


def extract_tangent_routes(a: SuperAtlas, n: int) -> tuple[LocalMultilinearBundle, LocalMultilinearBundle]:
    """The bundle of points of the tangent atlas, and the tangent of the
    bundle of points."""
    return extract_bundle(tangent_atlas(a), n), extract_bundle(a, n).tangent()
