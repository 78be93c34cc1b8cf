"""Finite Grassmann algebras with rational coefficients.

Basis monomials are indexed by strictly increasing tuples of generator
indices drawn from ``1..n``; the empty tuple is the unit.
"""

from __future__ import annotations

import os
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Mapping

from .errors import DimensionError, InputError, ParityError
from .jsonio import frac_to_str, require, str_to_frac

Index = tuple[int, ...]

_cap = int(os.environ.get("ARTIFACT_MAX_GENERATORS", "12"))


def generator_cap() -> int:
    return _cap


def set_generator_cap(n: int) -> None:
    global _cap
    if n < 0:
        raise ValueError("generator cap must be non-negative")
    _cap = n


def _check_n(n: int) -> None:
    if not isinstance(n, int) or n < 0:
        raise DimensionError(f"generator count must be a non-negative int, got {n!r}")
    if n > _cap:
        raise DimensionError(f"generator count {n} exceeds cap {_cap}")


def merge_sign(I: Index, J: Index) -> int:
    """Sign of moving the concatenation I+J into sorted order; 0 on overlap."""
    sign = 1
    jset = set(J)
    for i in I:
        if i in jset:
            return 0
        # every j < i sitting to the right of i is one inversion
        for j in J:
            if j < i:
                sign = -sign
    return sign


def subsets(n: int, parity: int | None = None, nonempty: bool = False) -> Iterator[Index]:
    """All subsets of 1..n by size then lexicographically."""
    start = 1 if nonempty else 0
    for r in range(start, n + 1):
        if parity is not None and r % 2 != parity:
            continue
        yield from combinations(range(1, n + 1), r)


class GrassmannElement:
    """Immutable element of the Grassmann algebra on ``n`` generators."""

    __slots__ = ("n", "_c", "_hash")

    def __init__(self, n: int, coeffs: Mapping[Iterable[int], object] | None = None):
        _check_n(n)
        c: dict[Index, Fraction] = {}
        for key, val in (coeffs or {}).items():
            I = tuple(key)
            if any(a >= b for a, b in zip(I, I[1:])) or any(i < 1 or i > n for i in I):
                raise DimensionError(f"invalid index set {I} for n={n}")
            v = Fraction(val)
            if v:
                c[I] = c.get(I, Fraction(0)) + v
                if not c[I]:
                    del c[I]
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_c", dict(sorted(c.items(), key=lambda kv: (len(kv[0]), kv[0]))))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("GrassmannElement is immutable")

    @classmethod
    def _raw(cls, n: int, c: dict[Index, Fraction]) -> "GrassmannElement":
        obj = object.__new__(cls)
        object.__setattr__(obj, "n", n)
        object.__setattr__(obj, "_c", dict(sorted(c.items(), key=lambda kv: (len(kv[0]), kv[0]))))
        object.__setattr__(obj, "_hash", None)
        return obj

    @classmethod
    def scalar(cls, n: int, value=1) -> "GrassmannElement":
        return cls(n, {(): value})

    @classmethod
    def basis(cls, n: int, I: Iterable[int], value=1) -> "GrassmannElement":
        """``value * λ_I``; unsorted ``I`` is sorted with the matching sign."""
        I = tuple(I)
        if len(set(I)) != len(I):
            return cls(n)
        srt = tuple(sorted(I))
        return cls(n, {srt: Fraction(value) * _perm_sign(I)})

    @classmethod
    def zero(cls, n: int) -> "GrassmannElement":
        return cls(n)

    @property
    def coeffs(self) -> Mapping[Index, Fraction]:
        return dict(self._c)

    def items(self):
        return self._c.items()

    def coefficient(self, I: Iterable[int]) -> Fraction:
        return self._c.get(tuple(I), Fraction(0))

    def support(self) -> list[Index]:
        return list(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def is_even(self) -> bool:
        return all(len(I) % 2 == 0 for I in self._c)

    def is_odd(self) -> bool:
        return all(len(I) % 2 == 1 for I in self._c)

    @property
    def body(self) -> Fraction:
        return self._c.get((), Fraction(0))

    @property
    def soul(self) -> "GrassmannElement":
        return GrassmannElement._raw(self.n, {I: v for I, v in self._c.items() if I})

    def _same(self, other: "GrassmannElement") -> None:
        if self.n != other.n:
            raise DimensionError(f"generator counts differ: {self.n} vs {other.n}")

    def __add__(self, other):
        if not isinstance(other, GrassmannElement):
            other = GrassmannElement.scalar(self.n, other)
        self._same(other)
        c = dict(self._c)
        for I, v in other._c.items():
            s = c.get(I, Fraction(0)) + v
            if s:
                c[I] = s
            else:
                c.pop(I, None)
        return GrassmannElement._raw(self.n, c)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannElement._raw(self.n, {I: -v for I, v in self._c.items()})

    def __sub__(self, other):
        if not isinstance(other, GrassmannElement):
            other = GrassmannElement.scalar(self.n, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, GrassmannElement):
            return multiply(self, other)
        s = Fraction(other)
        if not s:
            return GrassmannElement._raw(self.n, {})
        return GrassmannElement._raw(self.n, {I: v * s for I, v in self._c.items()})

    def __rmul__(self, other):
        return self * other

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not supported")
        out = GrassmannElement.scalar(self.n)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, GrassmannElement):
            return NotImplemented
        return self.n == other.n and self._c == other._c

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.n, tuple(self._c.items()))))
        return self._hash

    def __repr__(self):
        if not self._c:
            return f"GrassmannElement({self.n}, 0)"
        terms = []
        for I, v in self._c.items():
            mon = "".join(f"l{i}" for i in I)
            terms.append(f"{v}" if not I else f"{v}*{mon}")
        return f"GrassmannElement({self.n}, {' + '.join(terms)})"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "coeffs": [{"I": list(I), "c": frac_to_str(v)} for I, v in self._c.items()],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "GrassmannElement":
        n = require(doc, "n", int)
        entries = require(doc, "coeffs", list)
        c: dict[Index, Fraction] = {}
        for e in entries:
            I = tuple(require(e, "I", list))
            if I in c:
                raise InputError(f"duplicate index set {list(I)}")
            c[I] = str_to_frac(require(e, "c"))
        return cls(n, c)


def _perm_sign(seq: Iterable[int]) -> int:
    seq = list(seq)
    sign = 1
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                sign = -sign
    return sign


def multiply(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    a._same(b)
    c: dict[Index, Fraction] = {}
    for I, u in a._c.items():
        for J, w in b._c.items():
            s = merge_sign(I, J)
            if not s:
                continue
            K = tuple(sorted(I + J))
            v = c.get(K, Fraction(0)) + s * u * w
            if v:
                c[K] = v
            else:
                c.pop(K, None)
    return GrassmannElement._raw(a.n, c)


def split(a: GrassmannElement):
    """Return ``(even, odd, body, soul)``."""
    even = GrassmannElement._raw(a.n, {I: v for I, v in a._c.items() if len(I) % 2 == 0})
    odd = GrassmannElement._raw(a.n, {I: v for I, v in a._c.items() if len(I) % 2 == 1})
    return even, odd, a.body, a.soul


class GrassmannMorphism:
    """Even unital algebra morphism given by images of the generators."""

    __slots__ = ("n_src", "n_tgt", "images")

    def __init__(self, n_src: int, n_tgt: int, images: Iterable[GrassmannElement]):
        _check_n(n_src)
        _check_n(n_tgt)
        images = tuple(images)
        if len(images) != n_src:
            raise DimensionError(f"need {n_src} generator images, got {len(images)}")
        for k, im in enumerate(images, 1):
            if im.n != n_tgt:
                raise DimensionError(f"image of generator {k} lives in n={im.n}, expected {n_tgt}")
            if not im.is_odd():
                raise ParityError(f"image of generator {k} is not odd")
        object.__setattr__(self, "n_src", n_src)
        object.__setattr__(self, "n_tgt", n_tgt)
        object.__setattr__(self, "images", images)

    def __setattr__(self, name, value):
        raise AttributeError("GrassmannMorphism is immutable")

    def __eq__(self, other):
        if not isinstance(other, GrassmannMorphism):
            return NotImplemented
        return (self.n_src, self.n_tgt, self.images) == (other.n_src, other.n_tgt, other.images)

    def __hash__(self):
        return hash((self.n_src, self.n_tgt, self.images))

    def __repr__(self):
        return f"GrassmannMorphism({self.n_src}->{self.n_tgt}, {list(self.images)})"

    def then(self, other: "GrassmannMorphism") -> "GrassmannMorphism":
        """``other ∘ self``."""
        if other.n_src != self.n_tgt:
            raise DimensionError("morphisms are not composable")
        return GrassmannMorphism(self.n_src, other.n_tgt, [apply_morphism(other, im) for im in self.images])

    def to_json(self) -> dict:
        return {"n_src": self.n_src, "n_tgt": self.n_tgt, "images": [im.to_json() for im in self.images]}

    @classmethod
    def from_json(cls, doc: dict) -> "GrassmannMorphism":
        return cls(
            require(doc, "n_src", int),
            require(doc, "n_tgt", int),
            [GrassmannElement.from_json(d) for d in require(doc, "images", list)],
        )


def compose_morphisms(rho: GrassmannMorphism, sigma: GrassmannMorphism) -> GrassmannMorphism:
    """``rho ∘ sigma``."""
    return sigma.then(rho)


def apply_morphism(rho: GrassmannMorphism, a: GrassmannElement) -> GrassmannElement:
    if a.n != rho.n_src:
        raise DimensionError(f"element has n={a.n}, morphism expects {rho.n_src}")
    out = GrassmannElement.zero(rho.n_tgt)
    for I, v in a.items():
        term = GrassmannElement.scalar(rho.n_tgt, v)
        for i in I:
            term = term * rho.images[i - 1]
            if term.is_zero():
                break
        out = out + term
    return out


def canonical_morphism(kind: str, a: int, b: int) -> GrassmannMorphism:
    """Distinguished morphism from Λ_a to Λ_b.

    ``eps`` (a ≥ b) kills the generators above b, ``eta`` (a ≤ b) is the
    inclusion.
    """
    if kind == "eps":
        if a < b:
            raise DimensionError(f"eps({a},{b}) needs a >= b")
        imgs = [GrassmannElement.basis(b, (k,)) if k <= b else GrassmannElement.zero(b) for k in range(1, a + 1)]
        return GrassmannMorphism(a, b, imgs)
    if kind == "eta":
        if a > b:
            raise DimensionError(f"eta({a},{b}) needs a <= b")
        return GrassmannMorphism(a, b, [GrassmannElement.basis(b, (k,)) for k in range(1, a + 1)])
    raise ValueError(f"unknown morphism kind {kind!r}")


def identity_morphism(n: int) -> GrassmannMorphism:
    return GrassmannMorphism(n, n, [GrassmannElement.basis(n, (k,)) for k in range(1, n + 1)])
