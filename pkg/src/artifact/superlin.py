"""Super vector spaces, Grassmann points, exact rational maps, alternators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Iterable, Mapping, Sequence

import numpy as np
from sympy import sympify
from sympy.polys.domains import QQ
from sympy.polys.fields import FracField, FracElement
from sympy.polys.orderings import lex

from .errors import DimensionError, DomainError, InputError, ParityError
from .grassmann import GrassmannElement, GrassmannMorphism, Index, _check_n, merge_sign
from .jsonio import frac_to_str, require, str_to_frac
from .partitions import perm_sign

Vector = tuple[Fraction, ...]


@dataclass(frozen=True)
class SuperVectorSpace:
    p: int
    q: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise DimensionError("dimensions must be non-negative")

    def dim(self, parity: int) -> int:
        return self.q if parity % 2 else self.p

    def parity_swap(self) -> "SuperVectorSpace":
        return SuperVectorSpace(self.q, self.p)

    def __mul__(self, other: "SuperVectorSpace") -> "SuperVectorSpace":
        return SuperVectorSpace(self.p + other.p, self.q + other.q)

    def to_json(self) -> dict:
        return {"p": self.p, "q": self.q}

    @classmethod
    def from_json(cls, doc) -> "SuperVectorSpace":
        return cls(require(doc, "p", int), require(doc, "q", int))


# ---------------------------------------------------------------- scalars


def to_qq(x):
    x = Fraction(x)
    return QQ(x.numerator, x.denominator)


def from_qq(x) -> Fraction:
    return Fraction(int(QQ.numer(x)), int(QQ.denom(x)))


def _zero_vec(d: int) -> Vector:
    return (Fraction(0),) * d


# ---------------------------------------------------------------- points


class SuperPoint:
    """Point of the Grassmann-level functor: vectors in E0 at even index
    sets and in E1 at odd ones."""

    __slots__ = ("space", "n", "_c")

    def __init__(self, space: SuperVectorSpace, n: int, comps: Mapping[Iterable[int], Sequence] | None = None):
        _check_n(n)
        c: dict[Index, Vector] = {}
        for key, vec in (comps or {}).items():
            I = tuple(key)
            if any(a >= b for a, b in zip(I, I[1:])) or any(i < 1 or i > n for i in I):
                raise DimensionError(f"invalid index set {I} for n={n}")
            v = tuple(Fraction(a) for a in vec)
            if len(v) != space.dim(len(I)):
                raise DimensionError(f"component at {I} has dim {len(v)}, expected {space.dim(len(I))}")
            if any(v):
                c[I] = v
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_c", dict(sorted(c.items(), key=lambda kv: (len(kv[0]), kv[0]))))

    def __setattr__(self, name, value):
        raise AttributeError("SuperPoint is immutable")

    @classmethod
    def real(cls, space: SuperVectorSpace, n: int, x: Sequence) -> "SuperPoint":
        return cls(space, n, {(): x})

    def component(self, I: Iterable[int]) -> Vector:
        I = tuple(I)
        return self._c.get(I, _zero_vec(self.space.dim(len(I))))

    def items(self):
        return self._c.items()

    @property
    def comps(self) -> dict[Index, Vector]:
        return dict(self._c)

    def _same(self, other: "SuperPoint"):
        if self.space != other.space or self.n != other.n:
            raise DimensionError("points live in different spaces or levels")

    def __add__(self, other: "SuperPoint") -> "SuperPoint":
        self._same(other)
        c = dict(self._c)
        for I, v in other._c.items():
            c[I] = tuple(a + b for a, b in zip(c.get(I, _zero_vec(len(v))), v))
        return SuperPoint(self.space, self.n, c)

    def __neg__(self):
        return SuperPoint(self.space, self.n, {I: tuple(-a for a in v) for I, v in self._c.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "SuperPoint":
        s = Fraction(s)
        return SuperPoint(self.space, self.n, {I: tuple(s * a for a in v) for I, v in self._c.items()})

    def __eq__(self, other):
        if not isinstance(other, SuperPoint):
            return NotImplemented
        return self.space == other.space and self.n == other.n and self._c == other._c

    def __hash__(self):
        return hash((self.space, self.n, tuple(self._c.items())))

    def __repr__(self):
        return f"SuperPoint({self.space.p}|{self.space.q}, n={self.n}, {self._c})"

    def to_json(self) -> dict:
        return {
            "space": self.space.to_json(),
            "n": self.n,
            "comps": [{"I": list(I), "v": [frac_to_str(a) for a in v]} for I, v in self._c.items()],
        }

    @classmethod
    def from_json(cls, doc) -> "SuperPoint":
        space = SuperVectorSpace.from_json(require(doc, "space", dict))
        comps = {}
        for e in require(doc, "comps", list):
            I = tuple(require(e, "I", list))
            if I in comps:
                raise InputError(f"duplicate index set {list(I)}")
            comps[I] = [str_to_frac(a) for a in require(e, "v", list)]
        return cls(space, require(doc, "n", int), comps)


def module_action(t: GrassmannElement, v: SuperPoint) -> SuperPoint:
    """Action of an even Grassmann element on a point."""
    if not t.is_even():
        raise ParityError("module action needs an even scalar")
    if t.n != v.n:
        raise DimensionError("levels differ")
    c: dict[Index, list] = {}
    for I, s in t.items():
        for J, vec in v.items():
            sg = merge_sign(I, J)
            if not sg:
                continue
            K = tuple(sorted(I + J))
            acc = c.setdefault(K, [Fraction(0)] * len(vec))
            f = sg * s
            for a in range(len(vec)):
                acc[a] += f * vec[a]
    return SuperPoint(v.space, v.n, c)


def apply_point_morphism(rho: GrassmannMorphism, v: SuperPoint) -> SuperPoint:
    if v.n != rho.n_src:
        raise DimensionError(f"point has level {v.n}, morphism expects {rho.n_src}")
    c: dict[Index, list] = {}
    for I, vec in v.items():
        img = GrassmannElement.scalar(rho.n_tgt)
        for i in I:
            img = img * rho.images[i - 1]
        for K, s in img.items():
            acc = c.setdefault(K, [Fraction(0)] * len(vec))
            for a in range(len(vec)):
                acc[a] += s * vec[a]
    return SuperPoint(v.space, rho.n_tgt, c)


def decompose_point(v: SuperPoint) -> tuple[Vector, SuperPoint, SuperPoint]:
    """Split into real part, even nilpotent part and odd part."""
    x = v.component(())
    n0 = SuperPoint(v.space, v.n, {I: w for I, w in v.items() if I and len(I) % 2 == 0})
    n1 = SuperPoint(v.space, v.n, {I: w for I, w in v.items() if len(I) % 2 == 1})
    return x, n0, n1


# ---------------------------------------------------------------- alternator


def alternator(k: int, f: np.ndarray) -> np.ndarray:
    """Alternating projection over the first ``k`` axes of ``f``."""
    f = np.asarray(f, dtype=object)
    if k <= 1:
        return f.copy()
    rest = tuple(range(k, f.ndim))
    out = np.zeros(f.shape, dtype=object)
    out[...] = Fraction(0)
    for sigma in permutations(range(k)):
        out = out + perm_sign(sigma) * np.transpose(f, tuple(sigma) + rest)
    fk = Fraction(1, math.factorial(k))
    return np.vectorize(lambda a: a * fk, otypes=[object])(out) if out.size else out


# ---------------------------------------------------------------- rational maps


@lru_cache(maxsize=None)
def rfield(arity: int) -> FracField:
    """Rational function field over QQ in ``x0..x{arity-1}``."""
    return FracField(tuple(f"x{i}" for i in range(arity)), QQ, lex)


def _eval_poly(poly, pt) -> object:
    acc = QQ.zero
    for exps, c in poly.terms():
        term = c
        for i, e in enumerate(exps):
            if e:
                term *= pt[i] ** e
        acc += term
    return acc


def _subst_poly(poly, args, field: FracField):
    """Evaluate a polynomial at field elements."""
    ring = field.ring
    polynomial = all(a.denom == ring.one for a in args)
    if polynomial:
        nums = [a.numer for a in args]
        acc = ring.zero
        cache: dict = {}
        for exps, c in poly.terms():
            term = ring(c)
            for i, e in enumerate(exps):
                if e:
                    key = (i, e)
                    if key not in cache:
                        cache[key] = nums[i] ** e
                    term = term * cache[key]
            acc += term
        return field(acc)
    acc = field.zero
    cache = {}
    for exps, c in poly.terms():
        term = field(c)
        for i, e in enumerate(exps):
            if e:
                key = (i, e)
                if key not in cache:
                    cache[key] = args[i] ** e
                term = term * cache[key]
        acc = acc + term
    return acc


def subst(elem: FracElement, args: Sequence[FracElement], field: FracField) -> FracElement:
    """``elem(args)`` for ``args`` in ``field``."""
    num = _subst_poly(elem.numer, args, field)
    den = _subst_poly(elem.denom, args, field)
    if den == 0:
        raise DomainError("substitution produces an identically vanishing denominator")
    return num / den


def eval_elem(elem: FracElement, pt_qq: Sequence) -> Fraction:
    den = _eval_poly(elem.denom, pt_qq)
    if den == 0:
        raise DomainError(f"pole at {[str(from_qq(a)) for a in pt_qq]}")
    return from_qq(_eval_poly(elem.numer, pt_qq) / den)


def diff_elem(elem: FracElement, slot: int) -> FracElement:
    return elem.diff(elem.field.gens[slot])


class RationalMap:
    """Vector of rational functions of ``arity`` variables, kept reduced."""

    __slots__ = ("arity", "comps", "_dcache")

    def __init__(self, arity: int, comps: Iterable):
        fld = rfield(arity)
        cs = []
        for c in comps:
            if isinstance(c, FracElement) and c.field == fld:
                cs.append(c)
            elif isinstance(c, (int, Fraction)):
                cs.append(fld(to_qq(c)))
            else:
                cs.append(fld(c))
        object.__setattr__(self, "arity", arity)
        object.__setattr__(self, "comps", tuple(cs))
        object.__setattr__(self, "_dcache", {})

    def __setattr__(self, name, value):
        raise AttributeError("RationalMap is immutable")

    @property
    def codim(self) -> int:
        return len(self.comps)

    @property
    def field(self) -> FracField:
        return rfield(self.arity)

    @classmethod
    def from_exprs(cls, arity: int, exprs: Iterable) -> "RationalMap":
        """Build from sympy-parsable strings in ``x0, x1, ...``."""
        fld = rfield(arity)
        out = []
        for e in exprs:
            try:
                out.append(fld.from_expr(sympify(e)) if not isinstance(e, (int, Fraction)) else fld(to_qq(e)))
            except Exception as exc:
                raise InputError(f"cannot parse {e!r} as a rational function of arity {arity}") from exc
        return cls(arity, out)

    @classmethod
    def constant(cls, arity: int, values: Sequence) -> "RationalMap":
        return cls(arity, [rfield(arity)(to_qq(v)) for v in values])

    @classmethod
    def zero(cls, arity: int, codim: int) -> "RationalMap":
        return cls(arity, [rfield(arity).zero] * codim)

    @classmethod
    def identity(cls, arity: int) -> "RationalMap":
        return cls(arity, list(rfield(arity).gens))

    @classmethod
    def coordinates(cls, arity: int, idx: Sequence[int]) -> "RationalMap":
        g = rfield(arity).gens
        return cls(arity, [g[i] for i in idx])

    @classmethod
    def affine(cls, matrix: Sequence[Sequence], offset: Sequence | None = None) -> "RationalMap":
        """``x -> A x + c`` with ``A`` given row-wise."""
        rows = [list(r) for r in matrix]
        arity = len(rows[0]) if rows else 0
        fld = rfield(arity)
        g = fld.gens
        comps = []
        for i, row in enumerate(rows):
            acc = fld(to_qq(offset[i])) if offset is not None else fld.zero
            for j, a in enumerate(row):
                if a:
                    acc = acc + fld(to_qq(a)) * g[j]
            comps.append(acc)
        return cls(arity, comps)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.comps)

    def is_polynomial(self) -> bool:
        return all(c.denom.is_ground for c in self.comps)

    def degree(self) -> int:
        """Maximal total degree of numerators and denominators."""
        d = 0
        for c in self.comps:
            for p in (c.numer, c.denom):
                for exps in p.monoms():
                    d = max(d, sum(exps))
        return d

    def evaluate(self, x: Sequence) -> Vector:
        if len(x) != self.arity:
            raise DimensionError(f"expected {self.arity} coordinates, got {len(x)}")
        pt = [to_qq(a) for a in x]
        return tuple(eval_elem(c, pt) for c in self.comps)

    __call__ = evaluate

    def derivative(self, slot: int) -> "RationalMap":
        if not 0 <= slot < self.arity:
            raise DimensionError(f"slot {slot} out of range for arity {self.arity}")
        if slot not in self._dcache:
            self._dcache[slot] = RationalMap(self.arity, [diff_elem(c, slot) for c in self.comps])
        return self._dcache[slot]

    def partial(self, slots: Iterable[int]) -> "RationalMap":
        """Iterated partial derivative; order is irrelevant, sorted for caching."""
        f = self
        for s in sorted(slots):
            f = f.derivative(s)
        return f

    def compose(self, inner: "RationalMap") -> "RationalMap":
        """``self ∘ inner``."""
        if inner.codim != self.arity:
            raise DimensionError(f"cannot compose arity {self.arity} with codim {inner.codim}")
        fld = rfield(inner.arity)
        return RationalMap(inner.arity, [subst(c, inner.comps, fld) for c in self.comps])

    def __add__(self, other: "RationalMap") -> "RationalMap":
        self._same(other)
        return RationalMap(self.arity, [a + b for a, b in zip(self.comps, other.comps)])

    def __sub__(self, other: "RationalMap") -> "RationalMap":
        self._same(other)
        return RationalMap(self.arity, [a - b for a, b in zip(self.comps, other.comps)])

    def __neg__(self):
        return RationalMap(self.arity, [-a for a in self.comps])

    def scale(self, s) -> "RationalMap":
        if not isinstance(s, FracElement):
            s = self.field(to_qq(s))
        return RationalMap(self.arity, [s * a for a in self.comps])

    def concat(self, other: "RationalMap") -> "RationalMap":
        if other.arity != self.arity:
            raise DimensionError("arity mismatch")
        return RationalMap(self.arity, self.comps + other.comps)

    def _same(self, other: "RationalMap"):
        if self.arity != other.arity or self.codim != other.codim:
            raise DimensionError("rational maps of different shape")

    def __eq__(self, other):
        if not isinstance(other, RationalMap):
            return NotImplemented
        return rmap_equal(self, other)

    def __hash__(self):
        return hash((self.arity, self.comps))

    def __repr__(self):
        return f"RationalMap({self.arity}, [{', '.join(str(c.as_expr()) for c in self.comps)}])"

    def to_json(self) -> dict:
        """Common monic denominator; numerators scaled to match."""
        ring = self.field.ring
        den = ring.one
        for c in self.comps:
            den = den.lcm(c.denom)
        lc = den.LC
        den = den.quo_ground(lc)
        nums = [(c.numer * den).exquo(c.denom) for c in self.comps]
        return {"num": [_poly_json(p, self.arity) for p in nums], "den": _poly_json(den, self.arity)}

    @classmethod
    def from_json(cls, doc) -> "RationalMap":
        den_doc = require(doc, "den", list)
        if not den_doc:
            raise InputError("denominator is identically zero")
        arity = len(require(den_doc[0], "exps", list))
        fld = rfield(arity)
        den = _poly_from_json(den_doc, arity)
        if den == 0:
            raise InputError("denominator is identically zero")
        nums = [_poly_from_json(p, arity) for p in require(doc, "num", list)]
        return cls(arity, [fld(n) / fld(den) for n in nums])


def _poly_json(p, arity: int) -> list:
    terms = sorted(p.terms(), key=lambda t: t[0], reverse=True)
    return [{"exps": list(e) if arity else [], "c": frac_to_str(from_qq(c))} for e, c in terms]


def _poly_from_json(doc, arity: int):
    if not isinstance(doc, list):
        raise InputError("polynomial must be a list of terms")
    ring = rfield(arity).ring
    d: dict = {}
    for t in doc:
        e = tuple(require(t, "exps", list))
        if len(e) != arity or any(not isinstance(a, int) or a < 0 for a in e):
            raise InputError(f"bad exponent vector {list(e)} for arity {arity}")
        d[e] = d.get(e, QQ.zero) + to_qq(str_to_frac(require(t, "c")))
    return ring.from_dict(d) if d else ring.zero


def rmap_derivative(f: RationalMap, slot: int) -> RationalMap:
    return f.derivative(slot)


def rmap_equal(f: RationalMap, g: RationalMap) -> bool:
    """Identity of rational functions by cross multiplication."""
    if f.arity != g.arity or f.codim != g.codim:
        raise DimensionError("rational maps of different shape")
    return all(a.numer * b.denom == b.numer * a.denom for a, b in zip(f.comps, g.comps))


def rmap_compose(g: RationalMap, f: RationalMap) -> RationalMap:
    return g.compose(f)


# ---------------------------------------------------------------- alternating components


class AltComponent:
    """Degree-``k`` alternating component stored on increasing basis tuples."""

    __slots__ = ("k", "source", "target_dim", "entries")

    def __init__(self, k: int, source: SuperVectorSpace, target_dim: int, entries: Mapping | None = None):
        ent: dict[tuple, RationalMap] = {}
        for tup, rm in (entries or {}).items():
            tup = tuple(tup)
            if len(tup) != k or any(a >= b for a, b in zip(tup, tup[1:])) or any(not 0 <= i < source.q for i in tup):
                raise DimensionError(f"invalid basis tuple {tup} for degree {k}, q={source.q}")
            if rm.arity != source.p or rm.codim != target_dim:
                raise DimensionError(f"entry at {tup} has shape {rm.arity}->{rm.codim}, expected {source.p}->{target_dim}")
            if not rm.is_zero():
                ent[tup] = rm
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target_dim", target_dim)
        object.__setattr__(self, "entries", dict(sorted(ent.items())))

    def __setattr__(self, name, value):
        raise AttributeError("AltComponent is immutable")

    def lookup(self, tup: Sequence[int]) -> tuple[int, RationalMap | None]:
        """Value on an arbitrary basis tuple as ``(sign, entry)``."""
        tup = tuple(tup)
        if len(set(tup)) != len(tup):
            return 0, None
        srt = tuple(sorted(tup))
        rm = self.entries.get(srt)
        if rm is None:
            return 0, None
        return perm_sign(tup), rm

    def is_zero(self) -> bool:
        return not self.entries

    def __eq__(self, other):
        if not isinstance(other, AltComponent):
            return NotImplemented
        if (self.k, self.source, self.target_dim) != (other.k, other.source, other.target_dim):
            return False
        if self.entries.keys() != other.entries.keys():
            return False
        return all(rmap_equal(self.entries[t], other.entries[t]) for t in self.entries)

    def __hash__(self):
        return hash((self.k, self.source, self.target_dim, tuple(self.entries)))

    def __repr__(self):
        return f"AltComponent(k={self.k}, {self.entries})"
