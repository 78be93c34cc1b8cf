"""Independent reference computations used to cross-check the calculus.

Nothing here goes through the partition or Taylor sums: skeletons are
evaluated by plugging Grassmann numbers straight into the rational
component functions.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .errors import DomainError
from .grassmann import GrassmannElement
from .skeleton import Skeleton
from .superlin import RationalMap, SuperPoint, decompose_point, from_qq


def _poly_at(poly, xs: Sequence[GrassmannElement], n: int) -> GrassmannElement:
    acc = GrassmannElement.zero(n)
    powers: dict = {}
    for exps, c in poly.terms():
        term = GrassmannElement.scalar(n, from_qq(c))
        for i, e in enumerate(exps):
            if e:
                key = (i, e)
                if key not in powers:
                    powers[key] = xs[i] ** e
                term = term * powers[key]
        acc = acc + term
    return acc


def grassmann_inverse(d: GrassmannElement) -> GrassmannElement:
    """Inverse of an element with nonzero body via a terminating geometric series."""
    b = d.body
    if b == 0:
        raise DomainError("denominator has zero body")
    s = d.soul * (-1 / b)
    acc = GrassmannElement.scalar(d.n, 1)
    term = GrassmannElement.scalar(d.n, 1)
    for _ in range(d.n):
        term = term * s
        if term.is_zero():
            break
        acc = acc + term
    return acc * (1 / b)


def rmap_at(rm: RationalMap, xs: Sequence[GrassmannElement], n: int) -> list[GrassmannElement]:
    """Evaluate each component at even Grassmann arguments."""
    out = []
    for e in rm.comps:
        num = _poly_at(e.numer, xs, n)
        den = _poly_at(e.denom, xs, n)
        out.append(num * grassmann_inverse(den))
    return out


def point_to_grassmann(v: SuperPoint) -> tuple[list[GrassmannElement], list[GrassmannElement]]:
    """Per-coordinate Grassmann numbers of the even and odd parts."""
    p, q = v.space.p, v.space.q
    ev = [dict() for _ in range(p)]
    od = [dict() for _ in range(q)]
    for I, vec in v.items():
        tgt = ev if len(I) % 2 == 0 else od
        for a, c in enumerate(vec):
            if c:
                tgt[a][I] = c
    return [GrassmannElement(v.n, d) for d in ev], [GrassmannElement(v.n, d) for d in od]


def grassmann_to_point(space, n: int, ev: Sequence[GrassmannElement], od: Sequence[GrassmannElement]) -> SuperPoint:
    comps: dict = {}
    for parity, coords in ((0, ev), (1, od)):
        for a, g in enumerate(coords):
            for I, c in g.items():
                if len(I) % 2 != parity:
                    raise AssertionError("parity violated in oracle output")
                comps.setdefault(I, [Fraction(0)] * space.dim(parity))[a] += c
    return SuperPoint(space, n, comps)


def oracle_eval(f: Skeleton, v: SuperPoint) -> SuperPoint:
    """``sum_l sum_{c increasing} f_l[c](X) N_{c_1} ... N_{c_l}`` where X is
    the even part as Grassmann numbers and N the odd part."""
    n = v.n
    x, _, _ = decompose_point(v)
    if not f.box.contains(x):
        raise DomainError("base point outside the domain box")
    X, N = point_to_grassmann(v)
    outs = [[GrassmannElement.zero(n) for _ in range(f.target.dim(par))] for par in (0, 1)]
    for comp in f.comps:
        for c, rm in comp.entries.items():
            mono = GrassmannElement.scalar(n, 1)
            for b in c:
                mono = mono * N[b]
                if mono.is_zero():
                    break
            if mono.is_zero():
                continue
            vals = rmap_at(rm, X, n)
            tgt = outs[comp.k % 2]
            for r, g in enumerate(vals):
                tgt[r] = tgt[r] + g * mono
    return grassmann_to_point(f.target, n, outs[0], outs[1])


def extend_level(v: SuperPoint, extra: int) -> SuperPoint:
    return SuperPoint(v.space, v.n + extra, dict(v.items()))


def taylor_step_oracle(f: Skeleton, v: SuperPoint, w: SuperPoint) -> SuperPoint:
    """Directional derivative of ``f`` at ``v`` along ``w`` by an exact
    nilpotent increment: ``f(v + λ_a λ_b w) - f(v)`` divided by ``λ_a λ_b``
    for two fresh generators ``a, b``."""
    if v.n != w.n or v.space != w.space:
        raise ValueError("points must share space and level")
    n = v.n
    a, b = n + 1, n + 2
    big_v = extend_level(v, 2)
    shifted = {}
    for I, vec in w.items():
        J = I + (a, b)
        shifted[J] = list(vec)
    big_w = SuperPoint(v.space, n + 2, shifted)
    diff = oracle_eval(f, big_v + big_w) - oracle_eval(f, big_v)
    comps = {}
    for J, vec in diff.items():
        if J[-2:] != (a, b):
            if any(vec):
                raise AssertionError("increment produced terms outside the fresh generators")
            continue
        comps[J[:-2]] = vec
    return SuperPoint(f.target, n, comps)
