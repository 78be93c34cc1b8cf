"""Multilinear spaces (cubes) and their partition-indexed morphisms.

A cube of degree k has one axis per non-empty subset of ``{1..k}``. A
morphism is a family of multilinear tensors ``f^ν`` indexed by partitions ν
of those subsets; tensors are numpy object arrays of shape
``(d'_I, d_{ν_1}, ..., d_{ν_l})`` with blocks in graded lexicographic order.

Entries are Fractions for constant morphisms and rational-function field
elements when the morphism depends on a base point (``arity`` set).
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np
import sympy

from .errors import DimensionError, InputError, ValidationError
from .jsonio import frac_to_str, require, str_to_frac
from .partitions import Partition, coarser_of, enumerate_partitions, glex_key, restrict, sign as part_sign
from .superlin import RationalMap, eval_elem, rfield, subst, to_qq

Index = tuple[int, ...]
Nu = tuple[Index, ...]


def all_subsets(k: int) -> list[Index]:
    out = [I for r in range(1, k + 1) for I in combinations(range(1, k + 1), r)]
    out.sort(key=glex_key)
    return out


def is_closed(P: Iterable[Index]) -> bool:
    """True when the union of any two disjoint members of P is again in P."""
    P = set(P)
    for I in P:
        for J in P:
            if not set(I) & set(J) and tuple(sorted(I + J)) not in P:
                return False
    return True


def even_subsets(k: int) -> list[Index]:
    return [I for I in all_subsets(k) if len(I) % 2 == 0]


class CubeSpace:
    """Axis dimensions ``d_I`` for I in a set of nonempty subsets of 1..k (default all)."""

    __slots__ = ("k", "dims")

    def __init__(self, k: int, dims: Mapping[Iterable[int], int]):
        if k < 0:
            raise DimensionError("degree must be non-negative")
        d = {}
        for I, n in dims.items():
            I = tuple(I)
            if not I or list(I) != sorted(set(I)) or I[0] < 1 or I[-1] > k:
                raise DimensionError(f"invalid axis index {I} for degree {k}")
            if not isinstance(n, int) or n < 0:
                raise DimensionError(f"axis dimension must be a non-negative int, got {n!r}")
            d[I] = n
        if not is_closed(d):
            raise DimensionError("axis index set is not closed under disjoint unions")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "dims", dict(sorted(d.items(), key=lambda kv: glex_key(kv[0]))))

    def __setattr__(self, name, value):
        raise AttributeError("CubeSpace is immutable")

    @classmethod
    def uniform(cls, k: int, d: int) -> "CubeSpace":
        return cls(k, {I: d for I in all_subsets(k)})

    @classmethod
    def graded(cls, k: int, p: int, q: int) -> "CubeSpace":
        """Axis ``E_{|I| mod 2}`` of a super vector space of dimension (p|q)."""
        return cls(k, {I: (p if len(I) % 2 == 0 else q) for I in all_subsets(k)})

    @property
    def index_set(self) -> list[Index]:
        return list(self.dims)

    def is_full(self) -> bool:
        return len(self.dims) == 2 ** self.k - 1

    def is_purely_even(self) -> bool:
        return all(len(I) % 2 == 0 for I in self.dims)

    def total_dim(self) -> int:
        return sum(self.dims.values())

    def restrict(self, P: Iterable[Index]) -> "CubeSpace":
        P = [tuple(I) for I in P]
        if not is_closed(P):
            raise DimensionError("index set is not closed under disjoint unions")
        missing = [I for I in P if I not in self.dims]
        if missing:
            raise DimensionError(f"axes {missing} are not present")
        return CubeSpace(self.k, {I: self.dims[I] for I in P})

    def double(self) -> "CubeSpace":
        return CubeSpace(self.k, {I: 2 * d for I, d in self.dims.items()})

    def times(self, other: "CubeSpace") -> "CubeSpace":
        if self.k != other.k or set(self.dims) != set(other.dims):
            raise DimensionError("product of cubes needs equal index sets")
        return CubeSpace(self.k, {I: self.dims[I] + other.dims[I] for I in self.dims})

    def partitions(self) -> list[Partition]:
        """Partitions ν of axes I with every block an axis."""
        out = []
        for I in self.dims:
            for nu in enumerate_partitions(I, "all", "glex"):
                if all(B in self.dims for B in nu.blocks):
                    out.append(nu)
        return out

    def __eq__(self, other):
        return isinstance(other, CubeSpace) and self.k == other.k and self.dims == other.dims

    def __hash__(self):
        return hash((self.k, tuple(self.dims.items())))

    def __repr__(self):
        return f"CubeSpace(k={self.k}, {self.dims})"

    def to_json(self) -> dict:
        return {"k": self.k, "dims": [{"I": list(I), "d": d} for I, d in self.dims.items()]}

    @classmethod
    def from_json(cls, doc) -> "CubeSpace":
        k = require(doc, "k", int)
        dims = {}
        for e in require(doc, "dims", list):
            I = tuple(require(e, "I", list))
            if I in dims:
                raise InputError(f"duplicate axis {list(I)}")
            dims[I] = require(e, "d", int)
        return cls(k, dims)


def _is_zero_tensor(t: np.ndarray) -> bool:
    return all(x == 0 for x in t.flat)


def _obj_zeros(shape) -> np.ndarray:
    t = np.empty(shape, dtype=object)
    t.fill(Fraction(0))
    return t


class CubeMorphism:
    """Family of multilinear tensors ``f^ν``; absent ν means zero."""

    __slots__ = ("source", "target", "family", "arity")

    def __init__(self, source: CubeSpace, target: CubeSpace, family: Mapping, arity: int | None = None):
        if source.k != target.k:
            raise DimensionError("cube morphisms need equal degrees")
        if set(source.dims) != set(target.dims):
            raise DimensionError("source and target need the same axis index set")
        fam = {}
        for nu, t in family.items():
            nu = _nu_key(nu)
            I = tuple(sorted(i for B in nu for i in B))
            if I not in target.dims or any(B not in source.dims for B in nu):
                raise DimensionError(f"partition {nu} does not fit the cube axes")
            t = np.array(t, dtype=object)
            shape = (target.dims[I],) + tuple(source.dims[B] for B in nu)
            if t.shape != shape:
                if t.size == 0 and int(np.prod(shape)) == 0:
                    t = np.empty(shape, dtype=object)
                else:
                    raise DimensionError(f"tensor for {nu} has shape {t.shape}, expected {shape}")
            if arity is None:
                t = np.vectorize(Fraction, otypes=[object])(t) if t.size else t
            else:
                field = rfield(arity)
                t = np.vectorize(lambda a: a if getattr(a, "field", None) == field else field(to_qq(Fraction(a))), otypes=[object])(t) if t.size else t
            if not _is_zero_tensor(t):
                fam[nu] = t
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "family", dict(sorted(fam.items(), key=lambda kv: _nu_order(kv[0]))))
        object.__setattr__(self, "arity", arity)

    def __setattr__(self, name, value):
        raise AttributeError("CubeMorphism is immutable")

    @property
    def k(self) -> int:
        return self.source.k

    @classmethod
    def identity(cls, space: CubeSpace, arity: int | None = None) -> "CubeMorphism":
        fam = {}
        for I, d in space.dims.items():
            t = _obj_zeros((d, d))
            for a in range(d):
                t[a, a] = Fraction(1)
            fam[(I,)] = t
        return cls(space, space, fam, arity)

    @classmethod
    def zero(cls, source: CubeSpace, target: CubeSpace, arity: int | None = None) -> "CubeMorphism":
        return cls(source, target, {}, arity)

    def tensor(self, nu) -> np.ndarray:
        nu = _nu_key(nu)
        t = self.family.get(nu)
        if t is not None:
            return t
        I = tuple(sorted(i for B in nu for i in B))
        shape = (self.target.dims[I],) + tuple(self.source.dims[B] for B in nu)
        z = self._zero()
        out = np.empty(shape, dtype=object)
        out.fill(z)
        return out

    def _zero(self):
        return Fraction(0) if self.arity is None else rfield(self.arity).zero

    def lift(self, arity: int) -> "CubeMorphism":
        """Reinterpret a constant morphism as depending on ``arity`` base variables."""
        if self.arity == arity:
            return self
        if self.arity is not None:
            raise DimensionError("morphism already depends on a base point")
        return CubeMorphism(self.source, self.target, self.family, arity)

    def at(self, x: Sequence) -> "CubeMorphism":
        """Constant morphism at the base point ``x``."""
        if self.arity is None:
            return self
        xq = tuple(to_qq(a) for a in x)
        fam = {nu: np.vectorize(lambda e: eval_elem(e, xq), otypes=[object])(t) for nu, t in self.family.items()}
        return CubeMorphism(self.source, self.target, fam)

    def substitute(self, base: RationalMap) -> "CubeMorphism":
        """Entries ``b(base(x))``: pull a parametrized morphism back along a base map."""
        if self.arity is None:
            return self.lift(base.arity)
        if base.codim != self.arity:
            raise DimensionError("base map codomain does not match the parameter count")
        field = rfield(base.arity)
        fam = {nu: np.vectorize(lambda e: subst(e, base.comps, field), otypes=[object])(t) for nu, t in self.family.items()}
        return CubeMorphism(self.source, self.target, fam, base.arity)

    def map_entries(self, fn, arity="same") -> "CubeMorphism":
        ar = self.arity if arity == "same" else arity
        fam = {nu: fn(nu, t) for nu, t in self.family.items()}
        return CubeMorphism(self.source, self.target, fam, ar)

    def __eq__(self, other):
        if not isinstance(other, CubeMorphism):
            return NotImplemented
        if self.source != other.source or self.target != other.target:
            return False
        a, b = self, other
        if a.arity != b.arity:
            if a.arity is None:
                a = a.lift(b.arity)
            elif b.arity is None:
                b = b.lift(a.arity)
            else:
                return False
        if set(a.family) != set(b.family):
            return False
        return all(np.array_equal(a.family[nu], b.family[nu]) for nu in a.family)

    def __hash__(self):
        return hash((self.source, self.target, tuple(self.family)))

    def __repr__(self):
        return f"CubeMorphism(k={self.k}, {len(self.family)} tensors, arity={self.arity})"

    def support(self) -> list[Nu]:
        return list(self.family)

    def to_json(self) -> dict:
        def enc(a):
            if self.arity is None:
                return frac_to_str(a)
            return RationalMap(self.arity, [a]).to_json()

        doc = {
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "family": [{"nu": [list(B) for B in nu], "tensor": _nested(t, enc)} for nu, t in self.family.items()],
        }
        if self.arity is not None:
            doc["arity"] = self.arity
        return doc

    @classmethod
    def from_json(cls, doc) -> "CubeMorphism":
        src = CubeSpace.from_json(require(doc, "source", dict))
        tgt = CubeSpace.from_json(require(doc, "target", dict))
        arity = doc.get("arity")
        if arity is not None and (not isinstance(arity, int) or arity < 0):
            raise InputError("arity must be a non-negative int")

        def dec(a):
            if arity is None:
                return str_to_frac(a)
            rm = RationalMap.from_json(a)
            if rm.codim != 1 or rm.arity != arity:
                raise InputError("tensor entries must be scalar rational maps of the declared arity")
            return rm.comps[0]

        fam = {}
        for e in require(doc, "family", list):
            nu = _nu_key(require(e, "nu", list))
            if nu in fam:
                raise InputError(f"duplicate partition {nu}")
            I = tuple(sorted(i for B in nu for i in B))
            if I not in tgt.dims or any(B not in src.dims for B in nu):
                raise InputError(f"partition {[list(B) for B in nu]} does not fit the cube axes")
            shape = (tgt.dims[I],) + tuple(src.dims[B] for B in nu)
            fam[nu] = _unnested(require(e, "tensor", list), shape, dec)
        return cls(src, tgt, fam, arity)


def _nu_key(nu) -> Nu:
    if isinstance(nu, Partition):
        blocks = nu.blocks
    else:
        blocks = [tuple(sorted(B)) for B in nu]
    return tuple(sorted((tuple(B) for B in blocks), key=glex_key))


def _nu_order(nu: Nu):
    total = tuple(sorted(i for B in nu for i in B))
    return (glex_key(total), len(nu), tuple(glex_key(B) for B in nu))


def _nested(t, enc):
    if not isinstance(t, np.ndarray):
        return enc(t)
    if t.ndim == 0:
        return enc(t[()])
    return [_nested(t[i], enc) for i in range(t.shape[0])]


def _unnested(doc, shape, dec) -> np.ndarray:
    out = np.empty(shape, dtype=object)

    def fill(d, idx, depth):
        if depth == len(shape):
            out[idx] = dec(d)
            return
        if not isinstance(d, list) or len(d) != shape[depth]:
            raise InputError(f"tensor nesting does not match shape {shape}")
        for i, sub in enumerate(d):
            fill(sub, idx + (i,), depth + 1)

    if 0 in shape:
        return out
    fill(doc, (), 0)
    return out


# ---------------------------------------------------------------- application


def _contract(t: np.ndarray, vecs: Sequence[Sequence]) -> np.ndarray:
    res = t
    for v in reversed(vecs):
        if res.shape[-1] == 0:
            z = np.empty(res.shape[:-1], dtype=object)
            z.fill(Fraction(0))
            res = z
        else:
            res = np.tensordot(res, np.array(list(v), dtype=object), axes=([res.ndim - 1], [0]))
    return res


def cube_apply(f: CubeMorphism, v: Mapping[Index, Sequence], x: Sequence | None = None) -> dict[Index, list]:
    """``(sum_ν f^ν(v_ν))_I`` on a total-space vector given per axis."""
    if f.arity is not None:
        if x is None:
            raise DimensionError("parametrized morphism needs a base point")
        f = f.at(x)
    for I, d in f.source.dims.items():
        vec = v.get(I)
        if vec is None or len(vec) != d:
            raise DimensionError(f"vector for axis {I} missing or of wrong length")
    out = {I: [Fraction(0)] * d for I, d in f.target.dims.items()}
    for nu, t in f.family.items():
        I = tuple(sorted(i for B in nu for i in B))
        res = _contract(t, [v[B] for B in nu])
        for a in range(len(out[I])):
            out[I][a] += res[a]
    return out


# ---------------------------------------------------------------- composition


def _harmonize(g: CubeMorphism, f: CubeMorphism) -> tuple[CubeMorphism, CubeMorphism]:
    if g.arity == f.arity:
        return g, f
    if g.arity is None:
        return g.lift(f.arity), f
    if f.arity is None:
        return g, f.lift(g.arity)
    raise DimensionError("morphisms depend on different base dimensions")


def _term(gt: np.ndarray, om: Partition, nu: Partition, ffam: Mapping) -> np.ndarray | None:
    """``g^ω(f^{ω_1|ν}, ...)`` with axes permuted to the storage order of ν."""
    res = gt
    order: list[Index] = []
    pos = 1
    for O in om.blocks:
        sub = restrict(O, nu)
        ft = ffam.get(_nu_key(sub))
        if ft is None:
            return None
        res = _contract_slot(res, ft, pos)
        pos += sub.length
        order.extend(sub.blocks)
    perm = [order.index(B) for B in _nu_key(nu)]
    return np.transpose(res, [0] + [1 + p for p in perm])


def cube_compose(g: CubeMorphism, f: CubeMorphism) -> CubeMorphism:
    """``(g∘f)^ν = sum_{ω ⪯ ν} g^ω(f^{ω_1|ν}, ..., f^{ω_s|ν})`` with factors
    permuted back to the storage order of ν and no sign."""
    if f.target != g.source:
        raise DimensionError("middle cube spaces differ")
    g, f = _harmonize(g, f)
    fam = {}
    for nu in f.source.partitions():
        acc = None
        for om in coarser_of(nu, "glex"):
            gt = g.family.get(_nu_key(om))
            if gt is None:
                continue
            res = _term(gt, om, nu, f.family)
            if res is not None:
                acc = res if acc is None else acc + res
        if acc is not None:
            fam[_nu_key(nu)] = acc
    return CubeMorphism(f.source, g.target, fam, g.arity)


def _contract_slot(res: np.ndarray, ft: np.ndarray, pos: int) -> np.ndarray:
    """Replace axis ``pos`` of ``res`` by the input axes of ``ft``."""
    out = np.tensordot(res, ft, axes=([pos], [0]))
    # tensordot puts ft's remaining axes last; move them to ``pos``
    nres = res.ndim - 1
    nft = ft.ndim - 1
    axes = list(range(pos)) + list(range(nres, nres + nft)) + list(range(pos, nres))
    return np.transpose(out, axes)


# ---------------------------------------------------------------- inversion


def _inverse_matrix(t: np.ndarray, arity: int | None):
    n = t.shape[0]
    if t.shape != (n, n):
        return None
    if arity is None:
        M = sympy.Matrix(n, n, lambda i, j: sympy.Rational(t[i, j].numerator, t[i, j].denominator))
        if M.det() == 0:
            return None
        inv = M.inv()
        return np.array([[Fraction(int(inv[i, j].p), int(inv[i, j].q)) for j in range(n)] for i in range(n)], dtype=object).reshape(n, n)
    from .skeleton import _mat_inverse

    field = rfield(arity)
    inv = _mat_inverse([[t[i, j] for j in range(n)] for i in range(n)], field)
    if inv is None:
        return None
    return np.array(inv, dtype=object).reshape(n, n)


def cube_invert(f: CubeMorphism) -> tuple[bool, CubeMorphism | None]:
    """Inverse built by induction on partition length; ``(False, None)`` when
    some length-one tensor is not a bijection."""
    if f.source != f.target:
        return False, None
    inv1 = {}
    for I, d in f.source.dims.items():
        t = f.tensor(((I),))
        m = _inverse_matrix(t, f.arity) if d else np.empty((0, 0), dtype=object)
        if m is None:
            return False, None
        inv1[I] = m
    fam: dict[Nu, np.ndarray] = {(I,): m for I, m in inv1.items()}
    by_total: dict[Index, list[Partition]] = {}
    for nu in f.source.partitions():
        by_total.setdefault(nu.total, []).append(nu)
    for I, nus in by_total.items():
        for nu in sorted(nus, key=lambda n: n.length):
            if nu.length == 1:
                continue
            partial = CubeMorphism(f.source, f.target, fam, f.arity)
            acc = None
            for om in coarser_of(nu, "glex"):
                if om.length == nu.length:
                    continue
                gt = partial.family.get(_nu_key(om))
                if gt is None:
                    continue
                res = _term(gt, om, nu, f.family)
                if res is not None:
                    acc = res if acc is None else acc + res
            if acc is None:
                continue
            # g^ν ∘ (f^{ν_1} ⊗ ... ) = -acc, so precompose with the inverses
            res = -acc
            for j, B in enumerate(_nu_key(nu)):
                res = _contract_slot(res, inv1[B], 1 + j)
            fam[_nu_key(nu)] = res
    return True, CubeMorphism(f.source, f.target, fam, f.arity)


# ---------------------------------------------------------------- restriction and minus


def cube_restrict(f: CubeMorphism, P: Iterable[Index]) -> CubeMorphism:
    P = [tuple(I) for I in P]
    src = f.source.restrict(P)
    tgt = f.target.restrict(P)
    Ps = set(P)
    fam = {nu: t for nu, t in f.family.items() if all(B in Ps for B in nu)}
    return CubeMorphism(src, tgt, fam, f.arity)


def truncation_set(n: int) -> list[Index]:
    return all_subsets(n)


def redegree(space: CubeSpace, n: int) -> CubeSpace:
    """A cube whose axes are all subsets of 1..n, viewed as a degree-n cube."""
    if any(I[-1] > n for I in space.dims):
        raise DimensionError(f"axes exceed degree {n}")
    return CubeSpace(n, space.dims)


def project_morphism(f: CubeMorphism, n: int) -> CubeMorphism:
    """Degree-n truncation of a degree-k morphism (n ≤ k)."""
    if n > f.k:
        raise DimensionError(f"cannot project degree {f.k} to {n}")
    P = [I for I in f.source.dims if I[-1] <= n]
    r = cube_restrict(f, P)
    return CubeMorphism(redegree(r.source, n), redegree(r.target, n), r.family, r.arity)


def minus_functor(f: CubeMorphism) -> CubeMorphism:
    if not (f.source.is_purely_even() and f.target.is_purely_even()):
        raise ValidationError("minus functor needs purely even cubes", {"reason": "odd axis present"})
    return f.map_entries(lambda nu, t: t * part_sign(Partition.of(nu, "glex")))


def cube_times(f: CubeMorphism, g: CubeMorphism) -> CubeMorphism:
    """Axis-wise product ``f × g`` with block-diagonal tensors."""
    f, g = _harmonize(f, g)
    src = f.source.times(g.source)
    tgt = f.target.times(g.target)
    fam = {}
    for nu in set(f.family) | set(g.family):
        I = tuple(sorted(i for B in nu for i in B))
        shape = (tgt.dims[I],) + tuple(src.dims[B] for B in nu)
        t = np.empty(shape, dtype=object)
        t.fill(f._zero())
        ft, gt = f.family.get(nu), g.family.get(nu)
        if ft is not None:
            t[tuple(slice(0, s) for s in ft.shape)] = ft
        if gt is not None:
            off = (f.target.dims[I],) + tuple(f.source.dims[B] for B in nu)
            t[tuple(slice(o, o + s) for o, s in zip(off, gt.shape))] = gt
        fam[nu] = t
    return CubeMorphism(src, tgt, fam, f.arity)


# ---------------------------------------------------------------- brute force


def total_map(f: CubeMorphism) -> tuple[list, list]:
    """The total-space map as sympy expressions in fresh symbols."""
    if f.arity is not None:
        raise DimensionError("total map needs a constant morphism")
    syms = {}
    flat = []
    for I, d in f.source.dims.items():
        syms[I] = [sympy.Symbol(f"v{''.join(map(str, I))}_{a}") for a in range(d)]
        flat.extend(syms[I])
    out = cube_apply_symbolic(f, syms)
    return flat, [e for I in f.target.dims for e in out[I]]


def cube_apply_symbolic(f: CubeMorphism, v: Mapping[Index, Sequence]) -> dict:
    out = {I: [sympy.Integer(0)] * d for I, d in f.target.dims.items()}
    for nu, t in f.family.items():
        I = tuple(sorted(i for B in nu for i in B))
        ts = np.vectorize(lambda a: sympy.Rational(a.numerator, a.denominator), otypes=[object])(t)
        res = _contract(ts, [v[B] for B in nu])
        for a in range(len(out[I])):
            out[I][a] = sympy.expand(out[I][a] + res[a])
    return out


def brute_force_invertible(f: CubeMorphism) -> bool:
    """Jacobian determinant of the total map is a nonzero constant."""
    if f.source.total_dim() != f.target.total_dim():
        return False
    xs, ys = total_map(f)
    if not xs:
        return True
    J = sympy.Matrix(ys).jacobian(xs)
    det = sympy.expand(J.det(method="berkowitz"))
    return det.is_number and det != 0
