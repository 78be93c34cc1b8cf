"""Skeletons of supersmooth morphisms between finite-dimensional superdomains.

A skeleton is a family ``(f_0, ..., f_q)`` where ``f_k`` is an alternating
k-linear map on the odd part of the source with values in the even or odd
part of the target (by parity of k), depending rationally on a point of the
even part of the source.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Callable, Iterable, Mapping, Sequence

from .errors import DimensionError, DomainError, InputError, ValidationError
from .grassmann import Index, merge_sign
from .jsonio import frac_to_str, require, str_to_frac
from .partitions import enumerate_partitions, perm_sign, sign as part_sign
from .superlin import (
    AltComponent,
    RationalMap,
    SuperPoint,
    SuperVectorSpace,
    decompose_point,
    rfield,
    rmap_equal,
    to_qq,
)

# ---------------------------------------------------------------- domain boxes


@dataclass(frozen=True)
class Interval:
    lo: Fraction | None = None
    hi: Fraction | None = None
    lo_closed: bool = False
    hi_closed: bool = False

    def __post_init__(self):
        if self.lo is not None and self.hi is not None:
            if self.lo > self.hi or (self.lo == self.hi and not (self.lo_closed and self.hi_closed)):
                raise DomainError(f"empty interval {self}")

    def contains(self, t: Fraction) -> bool:
        if self.lo is not None and (t < self.lo or (t == self.lo and not self.lo_closed)):
            return False
        if self.hi is not None and (t > self.hi or (t == self.hi and not self.hi_closed)):
            return False
        return True

    def samples(self, g: int) -> list[Fraction]:
        """``g`` rational points in the interior, avoiding round numbers."""
        lo, hi = self.lo, self.hi
        if lo is not None and hi is not None:
            if lo == hi:
                return [lo]
            return [lo + (hi - lo) * Fraction(j + 1, g + 1) for j in range(g)]
        shift = Fraction(1, 7)
        if lo is not None:
            return [lo + j + shift for j in range(g)]
        if hi is not None:
            return [hi - j - shift for j in range(g)]
        return [Fraction(2 * j - (g - 1), 2) + shift for j in range(g)]

    def intersect(self, other: "Interval") -> "Interval | None":
        lo, lc = self.lo, self.lo_closed
        if other.lo is not None and (lo is None or other.lo > lo or (other.lo == lo and not other.lo_closed)):
            lo, lc = other.lo, other.lo_closed
        hi, hc = self.hi, self.hi_closed
        if other.hi is not None and (hi is None or other.hi < hi or (other.hi == hi and not other.hi_closed)):
            hi, hc = other.hi, other.hi_closed
        try:
            return Interval(lo, hi, lc, hc)
        except DomainError:
            return None

    def to_json(self) -> dict:
        return {
            "lo": None if self.lo is None else frac_to_str(self.lo),
            "hi": None if self.hi is None else frac_to_str(self.hi),
            "closed": [self.lo_closed, self.hi_closed],
        }

    @classmethod
    def from_json(cls, doc) -> "Interval":
        lo, hi = doc.get("lo"), doc.get("hi")
        closed = doc.get("closed", [False, False])
        return cls(
            None if lo is None else str_to_frac(lo),
            None if hi is None else str_to_frac(hi),
            bool(closed[0]),
            bool(closed[1]),
        )


class DomainBox:
    """Product of intervals, or the whole space when ``intervals`` is None."""

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[Interval] | None = None):
        object.__setattr__(self, "intervals", None if intervals is None else tuple(intervals))

    def __setattr__(self, name, value):
        raise AttributeError("DomainBox is immutable")

    @classmethod
    def all(cls) -> "DomainBox":
        return cls(None)

    @classmethod
    def open(cls, bounds: Sequence[tuple]) -> "DomainBox":
        return cls([Interval(None if lo is None else Fraction(lo), None if hi is None else Fraction(hi)) for lo, hi in bounds])

    def is_all(self) -> bool:
        return self.intervals is None or all(iv.lo is None and iv.hi is None for iv in self.intervals)

    def contains(self, x: Sequence) -> bool:
        if self.intervals is None:
            return True
        if len(x) != len(self.intervals):
            raise DimensionError("box and point dimensions differ")
        return all(iv.contains(Fraction(t)) for iv, t in zip(self.intervals, x))

    def _ivs(self, dim: int) -> tuple[Interval, ...]:
        return self.intervals if self.intervals is not None else (Interval(),) * dim

    def samples(self, dim: int, g: int, limit: int = 512) -> list[tuple[Fraction, ...]]:
        axes = [iv.samples(g) for iv in self._ivs(dim)]
        total = 1
        for a in axes:
            total *= len(a)
        if total <= limit:
            return [tuple(p) for p in product(*axes)]
        rng = random.Random(0)
        return [tuple(rng.choice(a) for a in axes) for _ in range(limit)]

    def intersect(self, other: "DomainBox", dim: int) -> "DomainBox | None":
        if self.intervals is None:
            return other
        if other.intervals is None:
            return self
        out = []
        for a, b in zip(self._ivs(dim), other._ivs(dim)):
            c = a.intersect(b)
            if c is None:
                return None
            out.append(c)
        return DomainBox(out)

    def times(self, other: "DomainBox", dim_self: int, dim_other: int) -> "DomainBox":
        if self.is_all() and other.is_all():
            return DomainBox.all()
        return DomainBox(self._ivs(dim_self) + other._ivs(dim_other))

    def __eq__(self, other):
        if not isinstance(other, DomainBox):
            return NotImplemented
        if self.is_all() and other.is_all():
            return True
        return self.intervals == other.intervals

    def __hash__(self):
        return hash(None if self.is_all() else self.intervals)

    def __repr__(self):
        return "DomainBox(all)" if self.is_all() else f"DomainBox({self.intervals})"

    def to_json(self):
        return "all" if self.is_all() else [iv.to_json() for iv in self.intervals]

    @classmethod
    def from_json(cls, doc) -> "DomainBox":
        if doc == "all" or doc is None:
            return cls.all()
        if not isinstance(doc, list):
            raise InputError("box must be \"all\" or a list of intervals")
        return cls([Interval.from_json(d) for d in doc])


# ---------------------------------------------------------------- small algebra helpers


def _det(rows: Sequence[Sequence], zero):
    n = len(rows)
    if n == 0:
        return 1
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    acc = zero
    for perm in permutations(range(n)):
        term = perm_sign(perm)
        for i in range(n):
            term = term * rows[i][perm[i]]
            if term == 0:
                break
        acc = acc + term
    return acc


def _mat_inverse(M: list[list], field):
    """Gauss-Jordan over a field; None when singular."""
    n = len(M)
    A = [list(row) + [field.one if i == j else field.zero for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            return None
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [a * inv for a in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return [row[n:] for row in A]


def _multilinear(m: int, l: int, ws, us, p: int, keys: Iterable[tuple], value: Callable, zero, dim: int):
    """``sum_a prod w_i[a_i] sum_c det(u[c]) value(c, sorted a)``.

    This is ``d^m f_l(w_1..w_m)(u_1..u_l)`` for a component whose entries on
    increasing tuples ``c`` have partial derivatives ``value(c, a)``.
    """
    out = [zero] * dim
    minors = []
    for c in keys:
        d = _det([[us[j][ci] for j in range(l)] for ci in c], zero)
        if d != 0:
            minors.append((c, d))
    if not minors:
        return out
    for a in product(range(p), repeat=m):
        coef = 1
        for i in range(m):
            coef = coef * ws[i][a[i]]
            if coef == 0:
                break
        if coef == 0:
            continue
        asrt = tuple(sorted(a))
        for c, d in minors:
            val = value(c, asrt)
            if val is None:
                continue
            s = coef * d
            for r in range(dim):
                if val[r] != 0:
                    out[r] = out[r] + s * val[r]
    return out


# ---------------------------------------------------------------- skeleton type


class Skeleton:
    """Immutable skeleton ``(f_0, ..., f_q)`` of a morphism ``U ⊆ E -> F``.

    ``product`` optionally declares the source as ``H ⊕ E'`` by giving the
    even and odd dimensions of the first factor ``H``.
    """

    __slots__ = ("source", "target", "box", "comps", "product", "_vcache")

    def __init__(
        self,
        source: SuperVectorSpace,
        target: SuperVectorSpace,
        comps: Sequence[AltComponent],
        box: DomainBox | None = None,
        product: tuple[int, int] | None = None,
    ):
        comps = list(comps)
        q = source.q
        if len(comps) > q + 1:
            extra = comps[q + 1:]
            if any(not c.is_zero() for c in extra):
                raise DimensionError(f"components above degree {q} must vanish")
            comps = comps[: q + 1]
        while len(comps) < q + 1:
            k = len(comps)
            comps.append(AltComponent(k, source, target.dim(k)))
        for k, c in enumerate(comps):
            if c.k != k or c.source != source or c.target_dim != target.dim(k):
                raise DimensionError(f"component {k} has the wrong shape")
        if product is not None:
            ph, qh = product
            if not (0 <= ph <= source.p and 0 <= qh <= source.q):
                raise DimensionError("declared product factor exceeds the source")
            product = (ph, qh)
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "comps", tuple(comps))
        object.__setattr__(self, "box", box if box is not None else DomainBox.all())
        object.__setattr__(self, "product", product)
        object.__setattr__(self, "_vcache", {})

    def __setattr__(self, name, value):
        raise AttributeError("Skeleton is immutable")

    # construction -----------------------------------------------------

    @classmethod
    def build(
        cls,
        source: SuperVectorSpace,
        target: SuperVectorSpace,
        entries: Mapping[int, Mapping[tuple, object]],
        box: DomainBox | None = None,
        product: tuple[int, int] | None = None,
    ) -> "Skeleton":
        """``entries[k][tuple]`` is a RationalMap or a list of expression strings."""
        comps = []
        for k in range(source.q + 1):
            ent = {}
            for tup, val in entries.get(k, {}).items():
                if not isinstance(val, RationalMap):
                    val = RationalMap.from_exprs(source.p, val)
                ent[tuple(tup)] = val
            comps.append(AltComponent(k, source, target.dim(k), ent))
        for k in entries:
            if k > source.q and any(not RationalMap.from_exprs(source.p, v).is_zero() if not isinstance(v, RationalMap) else not v.is_zero() for v in entries[k].values()):
                raise DimensionError(f"degree {k} exceeds odd dimension {source.q}")
        return cls(source, target, comps, box, product)

    @classmethod
    def identity(cls, space: SuperVectorSpace, box: DomainBox | None = None) -> "Skeleton":
        return linear_skeleton(space, space, _eye(space.p), _eye(space.q), box=box)

    @property
    def q(self) -> int:
        return self.source.q

    def comp(self, k: int) -> AltComponent:
        if k < len(self.comps):
            return self.comps[k]
        return AltComponent(k, self.source, self.target.dim(k))

    def f0(self) -> RationalMap:
        return self.comps[0].entries.get((), RationalMap.zero(self.source.p, self.target.p))

    def entry(self, k: int, tup: Sequence[int]) -> RationalMap | None:
        if k > self.source.q:
            return None
        return self.comps[k].entries.get(tuple(tup))

    def with_box(self, box: DomainBox) -> "Skeleton":
        return Skeleton(self.source, self.target, self.comps, box, self.product)

    def with_product(self, product: tuple[int, int] | None) -> "Skeleton":
        return Skeleton(self.source, self.target, self.comps, self.box, product)

    def __eq__(self, other):
        if not isinstance(other, Skeleton):
            return NotImplemented
        return self.source == other.source and self.target == other.target and self.comps == other.comps

    def __hash__(self):
        return hash((self.source, self.target, self.comps))

    def __repr__(self):
        parts = []
        for c in self.comps:
            for t, rm in c.entries.items():
                parts.append(f"f{c.k}{list(t)}={[str(e.as_expr()) for e in rm.comps]}")
        return f"Skeleton({self.source.p}|{self.source.q} -> {self.target.p}|{self.target.q}; {', '.join(parts)})"

    def max_degree(self) -> int:
        return max((k for k, c in enumerate(self.comps) if not c.is_zero()), default=-1)

    # JSON ---------------------------------------------------------------

    def to_json(self) -> dict:
        src = self.source.to_json()
        src["box"] = self.box.to_json()
        doc = {
            "source": src,
            "target": self.target.to_json(),
            "comps": [
                {"k": c.k, "entries": [{"tuple": list(t), "map": rm.to_json()} for t, rm in c.entries.items()]}
                for c in self.comps
            ],
        }
        if self.product is not None:
            doc["product"] = list(self.product)
        return doc

    @classmethod
    def from_json(cls, doc) -> "Skeleton":
        sdoc = require(doc, "source", dict)
        source = SuperVectorSpace.from_json(sdoc)
        target = SuperVectorSpace.from_json(require(doc, "target", dict))
        box = DomainBox.from_json(sdoc.get("box", "all"))
        if not box.is_all() and len(box.intervals) != source.p:
            raise InputError("box dimension does not match the even source dimension")
        entries: dict[int, dict] = {}
        for cdoc in require(doc, "comps", list):
            k = require(cdoc, "k", int)
            ent = entries.setdefault(k, {})
            for e in require(cdoc, "entries", list):
                t = tuple(require(e, "tuple", list))
                if t in ent:
                    raise InputError(f"duplicate tuple {list(t)} in degree {k}")
                rm = RationalMap.from_json(require(e, "map", dict))
                if rm.arity != source.p:
                    raise InputError(f"entry {list(t)} of degree {k} has arity {rm.arity}, expected {source.p}")
                ent[t] = rm
        product_ = doc.get("product")
        return cls.build(source, target, entries, box, tuple(product_) if product_ is not None else None)

    # numeric component values -----------------------------------------

    def _value_fn(self, x_qq: tuple, cache: dict):
        def value(l: int):
            comp = self.comps[l]

            def v(c, a):
                key = (l, c, a)
                if key not in cache:
                    rm = comp.entries.get(c)
                    if rm is None:
                        cache[key] = None
                    else:
                        from .superlin import eval_elem

                        cache[key] = [eval_elem(e, x_qq) for e in rm.partial(a).comps]
                return cache[key]

            return v

        return value

    def dmfl(self, m: int, l: int, x: Sequence, ws: Sequence[Sequence], us: Sequence[Sequence], _cache: dict | None = None):
        """``d^m f_l(x)(w_1..w_m)(u_1..u_l)`` as a vector of Fractions."""
        dim = self.target.dim(l)
        if l > self.source.q:
            return [Fraction(0)] * dim
        cache = {} if _cache is None else _cache
        x_qq = tuple(to_qq(a) for a in x)
        value = self._value_fn(x_qq, cache)(l)
        return _multilinear(m, l, ws, us, self.source.p, list(self.comps[l].entries), value, Fraction(0), dim)


def _eye(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


# ---------------------------------------------------------------- evaluation


def _check_point(f: Skeleton, v: SuperPoint) -> tuple:
    if v.space != f.source:
        raise DimensionError(f"point lives in {v.space}, skeleton source is {f.source}")
    x, n0, n1 = decompose_point(v)
    if not f.box.contains(x):
        raise DomainError(f"base point {[str(a) for a in x]} outside the domain box")
    return x, n0, n1


def eval_partition(f: Skeleton, v: SuperPoint) -> SuperPoint:
    """Factorial-free sum over set partitions in graded lexicographic order."""
    x, _, _ = _check_point(f, v)
    n = v.n
    cache: dict = {}
    out: dict[Index, list] = {(): list(f.f0().evaluate(x))}
    comps = dict(v.items())
    for r in range(1, n + 1):
        for I in combinations(range(1, n + 1), r):
            acc = None
            for om in enumerate_partitions(I, "all", "glex"):
                vecs = []
                for B in om.blocks:
                    w = comps.get(B)
                    if w is None:
                        break
                    vecs.append(w)
                else:
                    e, o = om.n_even, om.n_odd
                    if o > f.source.q:
                        continue
                    term = f.dmfl(e, o, x, vecs[:e], vecs[e:], cache)
                    sg = part_sign(om)
                    if acc is None:
                        acc = [Fraction(0)] * len(term)
                    for a in range(len(term)):
                        acc[a] += sg * term[a]
            if acc is not None:
                out[I] = acc
    return SuperPoint(f.target, n, out)


def eval_taylor(f: Skeleton, v: SuperPoint) -> SuperPoint:
    """Double sum over ``(m, l)`` with ``1/(m! l!)`` and ordered tuples."""
    x, n0, n1 = _check_point(f, v)
    n = v.n
    cache: dict = {}
    evens = list(n0.items())
    odds = list(n1.items())
    out: dict[Index, list] = {}

    def add(K, vec, scale):
        acc = out.setdefault(K, [Fraction(0)] * len(vec))
        for a in range(len(vec)):
            acc[a] += scale * vec[a]

    def walk(seq_e, seq_o, used: Index, sgn: int, m: int, l: int):
        if len(seq_e) < m:
            for I, w in evens:
                s = merge_sign(used, I)
                if s:
                    walk(seq_e + [w], seq_o, tuple(sorted(used + I)), sgn * s, m, l)
            return
        if len(seq_o) < l:
            for J, u in odds:
                s = merge_sign(used, J)
                if s:
                    walk(seq_e, seq_o + [u], tuple(sorted(used + J)), sgn * s, m, l)
            return
        val = f.dmfl(m, l, x, seq_e, seq_o, cache)
        add(used, val, Fraction(sgn, math.factorial(m) * math.factorial(l)))

    for m in range(0, n // 2 + 1):
        for l in range(0, min(f.source.q, n - 2 * m) + 1):
            walk([], [], (), 1, m, l)
    return SuperPoint(f.target, n, out)


evaluate = eval_partition


# ---------------------------------------------------------------- linear skeletons and products


def linear_skeleton(
    source: SuperVectorSpace,
    target: SuperVectorSpace,
    even: Sequence[Sequence],
    odd: Sequence[Sequence],
    offset: Sequence | None = None,
    box: DomainBox | None = None,
    product: tuple[int, int] | None = None,
) -> Skeleton:
    """Even affine map with matrices ``even`` (target.p × source.p) and
    ``odd`` (target.q × source.q), given row-wise."""
    p = source.p
    if len(even) != target.p or any(len(r) != p for r in even):
        raise DimensionError("even block has the wrong shape")
    if len(odd) != target.q or any(len(r) != source.q for r in odd):
        raise DimensionError("odd block has the wrong shape")
    f0 = RationalMap.affine(even, offset) if target.p else RationalMap.zero(p, 0)
    if target.p and not even[0]:
        f0 = RationalMap.constant(p, offset or [0] * target.p)
    if p == 0 and target.p:
        f0 = RationalMap.constant(0, offset or [0] * target.p)
    entries = {0: {(): f0}, 1: {}}
    for b in range(source.q):
        col = [odd[i][b] for i in range(target.q)]
        if any(col):
            entries[1][(b,)] = RationalMap.constant(p, col)
    return Skeleton.build(source, target, entries, box, product)


def lift_rmap(rm: RationalMap, arity: int, coords: Sequence[int]) -> RationalMap:
    """Reinterpret ``rm`` as a function of ``arity`` variables, feeding it
    the listed coordinates."""
    return rm.compose(RationalMap.coordinates(arity, coords))


def pair(f: Skeleton, g: Skeleton) -> Skeleton:
    """``x -> (f(x), g(x))`` into the product of the targets."""
    if f.source != g.source:
        raise DimensionError("paired skeletons need a common source")
    tgt = f.target * g.target
    comps = []
    for k in range(f.source.q + 1):
        ent = {}
        fd, gd = f.target.dim(k), g.target.dim(k)
        keys = set(f.comps[k].entries) | set(g.comps[k].entries)
        for t in keys:
            a = f.comps[k].entries.get(t, RationalMap.zero(f.source.p, fd))
            b = g.comps[k].entries.get(t, RationalMap.zero(f.source.p, gd))
            ent[t] = a.concat(b)
        comps.append(AltComponent(k, f.source, tgt.dim(k), ent))
    return Skeleton(f.source, tgt, comps, f.box)


def projection(space_a: SuperVectorSpace, space_b: SuperVectorSpace, which: int) -> Skeleton:
    """Projection of ``A × B`` onto factor ``which`` (0 or 1)."""
    src = space_a * space_b
    tgt = space_a if which == 0 else space_b
    off0 = 0 if which == 0 else space_a.p
    off1 = 0 if which == 0 else space_a.q
    even = [[1 if j == i + off0 else 0 for j in range(src.p)] for i in range(tgt.p)]
    odd = [[1 if j == i + off1 else 0 for j in range(src.q)] for i in range(tgt.q)]
    return linear_skeleton(src, tgt, even, odd)


def product_skeleton(f: Skeleton, g: Skeleton) -> Skeleton:
    """``f × g`` between product spaces."""
    pa = compose(f, projection(f.source, g.source, 0), check_domain=False)
    pb = compose(g, projection(f.source, g.source, 1), check_domain=False)
    box = f.box.times(g.box, f.source.p, g.source.p)
    return pair(pa, pb).with_box(box)


def truncate_skeleton(f: Skeleton, n: int) -> Skeleton:
    comps = [c if c.k <= n else AltComponent(c.k, f.source, f.target.dim(c.k)) for c in f.comps]
    return Skeleton(f.source, f.target, comps, f.box, f.product)


def is_batchelor(f: Skeleton) -> bool:
    return all(c.is_zero() for c in f.comps[2:])


# ---------------------------------------------------------------- composition


def _compositions(n: int):
    """Ordered ``(alpha, beta)`` with even parts ≥ 2, odd parts ≥ 1, total n."""

    def parts(total, allowed):
        if total == 0:
            yield ()
            return
        for a in allowed:
            if a <= total:
                for rest in parts(total - a, allowed):
                    yield (a,) + rest

    evens = list(range(2, n + 1, 2))
    odds = list(range(1, n + 1, 2))
    for s in range(0, n + 1, 2):
        for alpha in parts(s, evens):
            for beta in parts(n - s, odds):
                yield alpha, beta


class _Outer:
    """Partial derivatives of the outer skeleton's entries, optionally
    precomposed with an inner base map, as field elements."""

    def __init__(self, g: Skeleton, inner0: RationalMap | None, arity: int):
        self.g = g
        self.inner0 = inner0
        self.arity = arity
        self.cache: dict = {}

    def value(self, l: int):
        comp = self.g.comps[l]

        def v(c, a):
            key = (l, c, a)
            if key not in self.cache:
                rm = comp.entries.get(c)
                if rm is None:
                    self.cache[key] = None
                else:
                    d = rm.partial(a)
                    if self.inner0 is not None:
                        d = d.compose(self.inner0)
                    self.cache[key] = list(d.comps) if not d.is_zero() else None
            return self.cache[key]

        return v


def _outer_term(outer: _Outer, m: int, l: int, ws, us, field):
    g = outer.g
    dim = g.target.dim(l)
    if l > g.source.q:
        return None
    keys = list(g.comps[l].entries)
    if not keys:
        return None
    return _multilinear(m, l, ws, us, g.source.p, keys, outer.value(l), field.zero, dim)


def _compose_component_collapsed(g: Skeleton, f: Skeleton, b: tuple, outer: _Outer, field, skip_singletons=False):
    n = len(b)
    dim = g.target.dim(n)
    acc = [field.zero] * dim
    for om in enumerate_partitions(range(n), "all", "glex"):
        if skip_singletons and om.length == n:
            continue
        vecs = []
        for B in om.blocks:
            rm = f.entry(len(B), tuple(b[i] for i in B))
            if rm is None:
                break
            vecs.append(rm.comps)
        else:
            e = om.n_even
            term = _outer_term(outer, e, om.n_odd, vecs[:e], vecs[e:], field)
            if term is None:
                continue
            sg = part_sign(om)
            for r in range(dim):
                if term[r] != 0:
                    acc[r] = acc[r] + sg * term[r]
    return acc


def _compose_component_literal(g: Skeleton, f: Skeleton, b: tuple, outer: _Outer, field):
    n = len(b)
    dim = g.target.dim(n)
    acc = [field.zero] * dim
    for alpha, beta in _compositions(n):
        m, l = len(alpha), len(beta)
        if l > g.source.q:
            continue
        denom = math.factorial(m) * math.factorial(l)
        for a in alpha + beta:
            denom *= math.factorial(a)
        sizes = alpha + beta
        for sigma in permutations(range(n)):
            vs = [b[i] for i in sigma]
            vecs = []
            pos = 0
            sgn = perm_sign(sigma)
            for sz in sizes:
                chunk = vs[pos:pos + sz]
                pos += sz
                s, rm = f.comps[sz].lookup(chunk) if sz <= f.source.q else (0, None)
                if rm is None:
                    break
                sgn *= s
                vecs.append(rm.comps)
            else:
                term = _outer_term(outer, m, l, vecs[:m], vecs[m:], field)
                if term is None:
                    continue
                c = Fraction(sgn, denom)
                cq = field(to_qq(c))
                for r in range(dim):
                    if term[r] != 0:
                        acc[r] = acc[r] + cq * term[r]
    return acc


LITERAL_MAX = 8


def compose(g: Skeleton, f: Skeleton, method: str = "auto", check_domain: bool = True, grid: int = 3) -> Skeleton:
    """Skeleton of ``g ∘ f``.

    ``method`` is ``"literal"`` (sum over permutations and ordered block
    sizes), ``"collapsed"`` (one term per set partition) or ``"auto"``
    (literal up to degree 8).
    """
    if f.target != g.source:
        raise DimensionError(f"target {f.target} of the inner map differs from source {g.source} of the outer map")
    if check_domain and not g.box.is_all():
        for x in f.box.samples(f.source.p, grid):
            try:
                y = f.f0().evaluate(x)
            except DomainError:
                continue
            if not g.box.contains(y):
                raise DomainError(f"image {[str(a) for a in y]} of sample {[str(a) for a in x]} leaves the outer domain")
    p = f.source.p
    field = rfield(p)
    h0 = g.f0().compose(f.f0())
    comps = [AltComponent(0, f.source, g.target.p, {(): h0})]
    outer = _Outer(g, f.f0(), p)
    for n in range(1, f.source.q + 1):
        ent = {}
        use_literal = method == "literal" or (method == "auto" and n <= LITERAL_MAX)
        for b in combinations(range(f.source.q), n):
            if use_literal:
                vec = _compose_component_literal(g, f, b, outer, field)
            else:
                vec = _compose_component_collapsed(g, f, b, outer, field)
            rm = RationalMap(p, vec)
            if not rm.is_zero():
                ent[b] = rm
        comps.append(AltComponent(n, f.source, g.target.dim(n), ent))
    return Skeleton(f.source, g.target, comps, f.box)


# ---------------------------------------------------------------- inversion


def _affine_parts(rm: RationalMap):
    """``(A, c)`` when every component has total degree ≤ 1, else None."""
    if not rm.is_polynomial() or rm.degree() > 1:
        return None
    zero = [0] * rm.arity
    c = rm.evaluate(zero)
    A = [[rm.derivative(j).evaluate(zero)[i] for j in range(rm.arity)] for i in range(rm.codim)]
    return A, c


def invert(f: Skeleton, g0: RationalMap | None = None, box: DomainBox | None = None) -> Skeleton:
    """Inverse skeleton, built degree by degree."""
    if f.source != f.target:
        raise DimensionError("inversion needs equal source and target dimensions")
    p, q = f.source.p, f.source.q
    field = rfield(p)
    f0 = f.f0()
    ident = RationalMap.identity(p)
    if g0 is None:
        parts = _affine_parts(f0)
        if parts is None:
            raise ValidationError("base map is not affine; supply its inverse", {"reason": "non-affine base map"})
        A, c = parts
        Ainv = _mat_inverse([[field(to_qq(a)) for a in row] for row in A], field) if p else []
        if Ainv is None:
            raise ValidationError("linear part of the base map is singular", {"reason": "singular base map"})
        gens = field.gens
        comps = []
        for i in range(p):
            acc = field.zero
            for j in range(p):
                acc = acc + Ainv[i][j] * (gens[j] - to_qq(c[j]))
            comps.append(acc)
        g0 = RationalMap(p, comps)
    else:
        if g0.arity != p or g0.codim != p:
            raise DimensionError("supplied inverse base map has the wrong shape")
        if not (rmap_equal(f0.compose(g0), ident) and rmap_equal(g0.compose(f0), ident)):
            raise ValidationError("supplied map is not a two-sided inverse of the base map", {"reason": "bad inverse hint"})
    # odd linear part
    M = [[None] * q for _ in range(q)]
    for bcol in range(q):
        rm = f.entry(1, (bcol,))
        col = rm.compose(g0).comps if rm is not None else [field.zero] * q
        for i in range(q):
            M[i][bcol] = col[i]
    G1 = _mat_inverse(M, field) if q else []
    if G1 is None:
        raise ValidationError("odd linear part is singular", {"reason": "singular odd part"})
    comps = [AltComponent(0, f.source, p, {(): g0})]
    if q:
        ent1 = {}
        for bcol in range(q):
            rm = RationalMap(p, [G1[i][bcol] for i in range(q)])
            if not rm.is_zero():
                ent1[(bcol,)] = rm
        comps.append(AltComponent(1, f.source, q, ent1))
    # inner maps precomposed with g0
    fg = Skeleton(
        f.source,
        f.target,
        [
            AltComponent(k, f.source, f.target.dim(k), {t: rm.compose(g0) for t, rm in c.entries.items()})
            for k, c in enumerate(f.comps)
        ],
    )
    for n in range(2, q + 1):
        partial_g = Skeleton(f.source, f.source, comps)
        outer = _Outer(partial_g, None, p)
        T = {}
        for c in combinations(range(q), n):
            T[c] = _compose_component_collapsed(partial_g, fg, c, outer, field, skip_singletons=True)
        ent = {}
        dim = f.source.dim(n)
        for bp in combinations(range(q), n):
            acc = [field.zero] * dim
            for c, tv in T.items():
                if all(t == 0 for t in tv):
                    continue
                d = _det([[G1[ci][bj] for bj in bp] for ci in c], field.zero)
                if d == 0:
                    continue
                for r in range(dim):
                    acc[r] = acc[r] - d * tv[r]
            rm = RationalMap(p, acc)
            if not rm.is_zero():
                ent[bp] = rm
        comps.append(AltComponent(n, f.source, dim, ent))
    return Skeleton(f.source, f.source, comps, box if box is not None else DomainBox.all())


# ---------------------------------------------------------------- differential


def differential(f: Skeleton) -> Skeleton:
    """Skeleton of the differential on ``(E0 × E0 | E1 × E1)``.

    Even coordinates are ``(x, y)`` (base point, direction); odd indices
    below ``q`` belong to the point, the rest to the direction.
    """
    p, q = f.source.p, f.source.q
    src = SuperVectorSpace(2 * p, 2 * q)
    ar = 2 * p
    field = rfield(ar)
    ys = field.gens[p:]
    base = list(range(p))

    def lifted(rm: RationalMap) -> RationalMap:
        return lift_rmap(rm, ar, base)

    def directional(rm: RationalMap) -> RationalMap:
        acc = [field.zero] * rm.codim
        for a in range(p):
            d = lifted(rm.derivative(a))
            for r in range(rm.codim):
                acc[r] = acc[r] + ys[a] * d.comps[r]
        return RationalMap(ar, acc)

    comps = []
    for n in range(2 * q + 1):
        ent = {}
        dim = f.target.dim(n)
        if n <= q:
            for c in combinations(range(2 * q), n):
                hi = [i for i in c if i >= q]
                if not hi:
                    rm = f.entry(n, c)
                    if rm is not None:
                        ent[c] = directional(rm)
                elif len(hi) == 1:
                    s, rm = f.comp(n).lookup((hi[0] - q,) + c[:-1])
                    if rm is not None:
                        ent[c] = lifted(rm).scale((-1) ** (n - 1) * s)
        comps.append(AltComponent(n, src, dim, {t: v for t, v in ent.items() if not v.is_zero()}))
    box = f.box.times(DomainBox.all(), p, p)
    return Skeleton(src, f.target, comps, box, (p, q))


# ---------------------------------------------------------------- families and parity


@dataclass(frozen=True)
class UFamilyReport:
    ok: bool
    witness: dict

    def __bool__(self):
        return self.ok


def ufamily_report(f: Skeleton) -> UFamilyReport:
    if f.product is None:
        raise DimensionError("source is not declared as a product")
    ph, qh = f.product
    p = f.source.p
    ar = p
    field = rfield(ar)
    ycoords = list(range(ph, p))
    zero_y = RationalMap(ar, list(field.gens[:ph]) + [field.zero] * (p - ph))
    for c in f.comps:
        for t, rm in c.entries.items():
            kE = sum(1 for i in t if i >= qh)
            if kE >= 2:
                return UFamilyReport(False, {"k": c.k, "tuple": list(t), "reason": "more than one fiber slot"})
            if kE == 1:
                for a in ycoords:
                    if not rm.derivative(a).is_zero():
                        return UFamilyReport(False, {"k": c.k, "tuple": list(t), "reason": "depends on the fiber point"})
            else:
                if not rm.compose(zero_y).is_zero():
                    return UFamilyReport(False, {"k": c.k, "tuple": list(t), "reason": "nonzero at the zero section"})
                for a in ycoords:
                    for b in ycoords:
                        if b >= a and not rm.derivative(a).derivative(b).is_zero():
                            return UFamilyReport(False, {"k": c.k, "tuple": list(t), "reason": "nonlinear in the fiber point"})
    return UFamilyReport(True, {})


def is_ufamily(f: Skeleton) -> bool:
    return ufamily_report(f).ok


def parity_change(f: Skeleton) -> Skeleton:
    """Swap the parity of the fiber factor and of the target."""
    rep = ufamily_report(f)
    if not rep.ok:
        raise ValidationError("skeleton is not a fiberwise linear family", rep.witness)
    ph, qh = f.product
    pE, qE = f.source.p - ph, f.source.q - qh
    src = SuperVectorSpace(ph + qE, qh + pE)
    tgt = f.target.parity_swap()
    ar_new = src.p
    field = rfield(ar_new)
    # old maps only ever need (x, y=0) on the old source
    at_zero = RationalMap(ar_new, list(field.gens[:ph]) + [field.zero] * pE)
    yps = field.gens[ph:]

    def base(rm: RationalMap) -> RationalMap:
        return rm.compose(at_zero)

    comps = []
    for l in range(src.q + 1):
        dim = tgt.dim(l)
        ent = {}
        for c in combinations(range(src.q), l):
            hi = [i for i in c if i >= qh]
            acc = [field.zero] * dim
            touched = False
            if not hi:
                if l + 1 <= f.source.q:
                    sgn = (-1) ** l
                    for b in range(qE):
                        rm = f.entry(l + 1, c + (qh + b,))
                        if rm is None:
                            continue
                        touched = True
                        vals = base(rm).comps
                        for r in range(dim):
                            acc[r] = acc[r] + sgn * yps[b] * vals[r]
            elif len(hi) == 1 and l >= 1:
                a = hi[0] - qh
                rm = f.entry(l - 1, c[:-1])
                if rm is not None:
                    touched = True
                    vals = base(rm.derivative(ph + a)).comps
                    sgn = (-1) ** (l - 1)
                    for r in range(dim):
                        acc[r] = acc[r] + sgn * vals[r]
            if touched:
                rmn = RationalMap(ar_new, acc)
                if not rmn.is_zero():
                    ent[c] = rmn
        comps.append(AltComponent(l, src, dim, ent))
    box = None
    if not f.box.is_all():
        box = DomainBox(f.box.intervals[:ph] + (Interval(),) * qE)
    return Skeleton(src, tgt, comps, box, (ph, qh))


def family_compose(g: Skeleton, h: Skeleton, f: Skeleton) -> Skeleton:
    """``(x, v) -> g(h(x), f(x, v))`` for families ``f`` over ``H`` and
    ``g`` over the target of ``h``."""
    if f.product is None or g.product is None:
        raise DimensionError("families need declared product sources")
    ph, qh = f.product
    H = SuperVectorSpace(ph, qh)
    E = SuperVectorSpace(f.source.p - ph, f.source.q - qh)
    if h.source != H:
        raise DimensionError("base map source differs from the family's parameter space")
    gph, gqh = g.product
    if h.target != SuperVectorSpace(gph, gqh):
        raise DimensionError("base map target differs from the outer family's parameter space")
    hp = compose(h, projection(H, E, 0), check_domain=False)
    inner = pair(hp, f.with_product(None))
    if inner.target != g.source:
        raise DimensionError("family targets do not match")
    out = compose(g.with_product(None), inner, check_domain=False)
    return out.with_product((ph, qh)).with_box(f.box)


def point_pair(v: SuperPoint, w: SuperPoint) -> SuperPoint:
    """The point ``(v, w)`` of the product space."""
    if v.n != w.n:
        raise DimensionError("paired points need a common level")
    space = v.space * w.space
    comps = {}
    keys = set(dict(v.items())) | set(dict(w.items()))
    for I in keys:
        par = len(I) % 2
        comps[I] = list(v.component(I)) + list(w.component(I))
        assert len(comps[I]) == space.dim(par)
    return SuperPoint(space, v.n, comps)
