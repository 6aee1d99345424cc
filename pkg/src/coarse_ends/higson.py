"""Bounded functions with exact rational values, the Higson condition and gluing.

Values are complex numbers with rational parts, stored as ``(re, im)`` pairs of
``Fraction``; size comparisons use squared moduli so they stay exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import subsets as ss
from .coarse_rel import _support_verdict, working_truncation
from .covers import CoarseCover, cover_verdict
from .errors import ConfigError, PreconditionError
from .grid import TruncationGrid
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict

ZERO = (Fraction(0), Fraction(0))
# Thresholds tried when a statement quantifies over every epsilon
DEFAULT_EPSILONS = (Fraction(1, 2), Fraction(1, 10), Fraction(1, 20))


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ConfigError("value", f"expected a rational, got {x!r}")
    try:
        return Fraction(x) if not isinstance(x, float) else Fraction(x).limit_denominator(10 ** 6)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError("value", f"expected a rational, got {x!r}") from exc


def cvalue(x):
    """A complex rational from a number, a string, or a ``[re, im]`` pair."""
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ConfigError("value", "complex values are [re, im] pairs")
        return (frac(x[0]), frac(x[1]))
    return (frac(x), Fraction(0))


def _enc(v):
    re, im = v
    return str(re) if im == 0 else [str(re), str(im)]


def _add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def _mul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def abs2(v) -> Fraction:
    return v[0] * v[0] + v[1] * v[1]


class BoundedFunction:
    kind = "abstract"

    def value(self, space, p):
        raise NotImplementedError

    def bound(self) -> Fraction:
        """An upper bound for ``|f|``."""
        raise NotImplementedError

    def values(self, t):
        """Values on every point of the truncation ``t`` (cached per truncation)."""
        cache = t.__dict__.setdefault("_fn_cache", {})
        hit = cache.get(self)
        if hit is None:
            hit = [self.value(t.space, p) for p in t.points]
            cache[self] = hit
        return hit

    def to_json(self, space) -> dict:
        raise NotImplementedError

    def __add__(self, other):
        return Sum((self, other))

    def __sub__(self, other):
        return Sum((self, Product((Constant((Fraction(-1), Fraction(0))), other))))

    def __mul__(self, other):
        return Product((self, other))


def _fn(kind):
    def wrap(cls):
        cls = dataclass(frozen=True)(cls)
        cls.kind = kind
        return cls
    return wrap


@_fn("constant")
class Constant(BoundedFunction):
    c: tuple = ZERO

    def value(self, space, p):
        return self.c

    def bound(self):
        return abs(self.c[0]) + abs(self.c[1])

    def to_json(self, space):
        return {"kind": "constant", "value": _enc(self.c)}


@_fn("decay")
class Decay(BoundedFunction):
    """``scale / (1 + |x|)``."""
    scale: Fraction = Fraction(1)

    def value(self, space, p):
        return (self.scale / (1 + space.norm(p)), Fraction(0))

    def bound(self):
        return abs(self.scale)

    def to_json(self, space):
        return {"kind": "decay", "scale": str(self.scale)}


@_fn("angle")
class Angle(BoundedFunction):
    """Coordinate over norm, ``x_axis / |x|`` (``0`` at the basepoint); grid spaces only."""
    axis: int = 0

    def value(self, space, p):
        n = space.norm(p)
        if not isinstance(p, tuple) or not p or not isinstance(p[0], int):
            raise ConfigError("angle", "needs integer coordinates")
        return (Fraction(p[self.axis], n) if n else Fraction(0), Fraction(0))

    def bound(self):
        return Fraction(1)

    def to_json(self, space):
        return {"kind": "angle", "axis": self.axis}


@_fn("parity")
class Parity(BoundedFunction):
    """``(-1)^{|x|}``."""

    def value(self, space, p):
        return (Fraction(1 if space.norm(p) % 2 == 0 else -1), Fraction(0))

    def bound(self):
        return Fraction(1)

    def to_json(self, space):
        return {"kind": "parity"}


@_fn("table")
class Table(BoundedFunction):
    """Finitely many explicit values and a default elsewhere."""
    entries: tuple = ()
    default: tuple = ZERO

    def value(self, space, p):
        for q, v in self.entries:
            if q == p:
                return v
        return self.default

    def bound(self):
        vals = [v for _, v in self.entries] + [self.default]
        return max(abs(v[0]) + abs(v[1]) for v in vals)

    def to_json(self, space):
        return {"kind": "table", "entries": [[space.encode_point(q), _enc(v)] for q, v in self.entries],
                "default": _enc(self.default)}


@_fn("restrict")
class Restrict(BoundedFunction):
    """``inner`` on ``subset`` and ``0`` elsewhere."""
    inner: BoundedFunction
    subset: ss.SubsetSpec

    def value(self, space, p):
        return self.inner.value(space, p) if ss.contains(space, self.subset, p) else ZERO

    def values(self, t):
        cache = t.__dict__.setdefault("_fn_cache", {})
        hit = cache.get(self)
        if hit is None:
            m = ss._mask(t, self.subset)
            inner = self.inner.values(t)
            hit = [v if m[i] else ZERO for i, v in enumerate(inner)]
            cache[self] = hit
        return hit

    def bound(self):
        return self.inner.bound()

    def to_json(self, space):
        return {"kind": "restrict", "inner": self.inner.to_json(space), "subset": ss.to_json(self.subset, space)}


@_fn("sum")
class Sum(BoundedFunction):
    parts: tuple

    def value(self, space, p):
        out = ZERO
        for f in self.parts:
            out = _add(out, f.value(space, p))
        return out

    def values(self, t):
        cache = t.__dict__.setdefault("_fn_cache", {})
        hit = cache.get(self)
        if hit is None:
            cols = [f.values(t) for f in self.parts]
            hit = [ZERO] * len(t)
            for col in cols:
                hit = [_add(a, b) for a, b in zip(hit, col)]
            cache[self] = hit
        return hit

    def bound(self):
        return sum((f.bound() for f in self.parts), Fraction(0))

    def to_json(self, space):
        return {"kind": "sum", "parts": [f.to_json(space) for f in self.parts]}


@_fn("product")
class Product(BoundedFunction):
    parts: tuple

    def value(self, space, p):
        out = (Fraction(1), Fraction(0))
        for f in self.parts:
            out = _mul(out, f.value(space, p))
        return out

    def values(self, t):
        cache = t.__dict__.setdefault("_fn_cache", {})
        hit = cache.get(self)
        if hit is None:
            cols = [f.values(t) for f in self.parts]
            hit = [(Fraction(1), Fraction(0))] * len(t)
            for col in cols:
                hit = [_mul(a, b) for a, b in zip(hit, col)]
            cache[self] = hit
        return hit

    def bound(self):
        out = Fraction(1)
        for f in self.parts:
            out *= f.bound()
        return out

    def to_json(self, space):
        return {"kind": "product", "parts": [f.to_json(space) for f in self.parts]}


@_fn("glued")
class Glued(BoundedFunction):
    """``f1`` on ``U1``, ``f2 + g`` on ``U2 - U1``, ``0`` elsewhere."""
    U1: ss.SubsetSpec
    U2: ss.SubsetSpec
    f1: BoundedFunction
    f2: BoundedFunction
    g: BoundedFunction

    def value(self, space, p):
        if ss.contains(space, self.U1, p):
            return self.f1.value(space, p)
        if ss.contains(space, self.U2, p):
            return _add(self.f2.value(space, p), self.g.value(space, p))
        return ZERO

    def values(self, t):
        cache = t.__dict__.setdefault("_fn_cache", {})
        hit = cache.get(self)
        if hit is None:
            m1, m2 = ss._mask(t, self.U1), ss._mask(t, self.U2)
            a, b, c = self.f1.values(t), self.f2.values(t), self.g.values(t)
            hit = [a[i] if m1[i] else _add(b[i], c[i]) if m2[i] else ZERO for i in range(len(t))]
            cache[self] = hit
        return hit

    def bound(self):
        return max(self.f1.bound(), self.f2.bound() + self.g.bound())

    def to_json(self, space):
        return {"kind": "glued", "U1": ss.to_json(self.U1, space), "U2": ss.to_json(self.U2, space),
                "f1": self.f1.to_json(space), "f2": self.f2.to_json(space), "g": self.g.to_json(space)}


def function_from_json(obj, space) -> BoundedFunction:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError("kind", "function must be an object with a 'kind'")
    k = obj["kind"]
    if k == "constant":
        return Constant(cvalue(obj.get("value", 0)))
    if k == "zero":
        return Constant(ZERO)
    if k == "decay":
        return Decay(frac(obj.get("scale", 1)))
    if k == "angle":
        return Angle(int(obj.get("axis", 0)))
    if k == "parity":
        return Parity()
    if k == "table":
        entries = tuple((space.decode_point(q), cvalue(v)) for q, v in obj.get("entries", []))
        return Table(entries, cvalue(obj.get("default", 0)))
    if k == "restrict":
        return Restrict(function_from_json(obj["inner"], space), ss.from_json(obj["subset"], space))
    if k in ("sum", "product"):
        parts = tuple(function_from_json(f, space) for f in obj.get("parts", []))
        if not parts:
            raise ConfigError("parts", f"{k} needs at least one part")
        return Sum(parts) if k == "sum" else Product(parts)
    if k == "complex":
        re = function_from_json(obj["re"], space)
        im = function_from_json(obj["im"], space)
        return Sum((re, Product((Constant((Fraction(0), Fraction(1))), im))))
    if k == "glued":
        return Glued(ss.from_json(obj["U1"], space), ss.from_json(obj["U2"], space),
                     function_from_json(obj["f1"], space), function_from_json(obj["f2"], space),
                     function_from_json(obj["g"], space))
    raise ConfigError("kind", f"unknown function kind {k!r}")


# -- checks -------------------------------------------------------------------------

def _pair_variation(t, f, n):
    I, J = t.pairs_within(int(n), len(t))
    vals = f.values(t)
    var = [abs2(_sub(vals[i], vals[j])) for i, j in zip(I.tolist(), J.tolist())]
    outer = np.maximum(t.norms[I], t.norms[J])
    return I, J, var, outer


def higson_check(space, f, n: int, eps, grid: TruncationGrid) -> Verdict:
    """Least ``R`` in ``{0} + radii`` with ``|f(y) - f(x)| <= eps`` on pairs ``d <= n`` leaving ``ball(R)``.

    Holds at a radius before the last; fails when the variation at the last
    radius exceeds ``eps`` and has not decreased over the trailing window.
    """
    eps = frac(eps)
    t = working_truncation(space, grid)
    I, J, var, outer = _pair_variation(t, f, n)
    var = np.array(var, dtype=object)
    e2 = eps * eps
    candidates = (0,) + tuple(grid.radii)
    sups = []
    for R in candidates:
        sel = outer > R
        sups.append(max(var[sel].tolist(), default=Fraction(0)))
    witness = {"n": int(n), "eps": str(eps), "sup_sq": [str(s) for s in sups], "radii": list(candidates)}
    for R, s in zip(candidates[:-1], sups[:-1]):
        if s <= e2:
            return Verdict(HOLDS, dict(witness, R=R))
    win = grid.trailing(sups)
    if sups[-1] > e2 and not all(b < a for a, b in zip(win, win[1:])):
        sel = np.flatnonzero(outer > candidates[-1])
        bad = [k for k in sel.tolist() if var[k] > e2][:3]
        pairs = [[space.encode_point(t.points[I[k]]), space.encode_point(t.points[J[k]])] for k in bad]
        return Verdict(FAILS, dict(witness, pairs=pairs))
    return Verdict(INCONCLUSIVE, witness)


def tends_to_zero_check(space, f, eps, grid: TruncationGrid, on=ss.ALL) -> Verdict:
    """Boundedness of ``{x in on : |f(x)| >= eps}``."""
    eps = frac(eps)
    t = working_truncation(space, grid)
    vals = f.values(t)
    m = ss._mask(t, on)
    e2 = eps * eps
    support = np.fromiter((bool(m[i]) and abs2(v) >= e2 for i, v in enumerate(vals)), dtype=bool, count=len(t))
    return _support_verdict(t, support, grid, {"eps": str(eps)})


def _all_eps(space, f, grid, on, epsilons):
    rows = [tends_to_zero_check(space, f, e, grid, on) for e in epsilons]
    outs = [r.outcome for r in rows]
    if all(o == HOLDS for o in outs):
        return Verdict(HOLDS, {"per_eps": [r.to_json() for r in rows]})
    if FAILS in outs:
        return Verdict(FAILS, {"per_eps": [r.to_json() for r in rows]})
    return Verdict(INCONCLUSIVE, {"per_eps": [r.to_json() for r in rows]})


def glue(space, U1, U2, f1, f2, g, grid: TruncationGrid, epsilons=DEFAULT_EPSILONS):
    """Glue ``f1`` on ``U1`` and ``f2`` on ``U2`` along a correction ``g``.

    Preconditions: ``(U1, U2)`` coarsely covers ``U1 | U2`` and ``f1 - f2 - g``
    tends to zero on ``U1 & U2``.  Returns ``(glued, report)``; the report holds
    the restriction checks.
    """
    cover = CoarseCover((U1, U2), ss.union(U1, U2))
    cv = cover_verdict(space, cover, grid)
    if cv.outcome != HOLDS:
        raise PreconditionError(f"(U1, U2) does not verify as a coarse cover ({cv.outcome})", cv)
    overlap = ss.intersection(U1, U2)
    diff = f1 - f2 - g
    dz = _all_eps(space, diff, grid, overlap, epsilons)
    if dz.outcome != HOLDS:
        raise PreconditionError(f"f1 - f2 - g does not tend to zero on the overlap ({dz.outcome})", dz)
    out = Glued(U1, U2, f1, f2, g)
    t = working_truncation(space, grid)
    m1 = ss._mask(t, U1)
    vals, v1 = out.values(t), f1.values(t)
    exact = all(vals[i] == v1[i] for i in np.flatnonzero(m1).tolist())
    mod = _all_eps(space, out - (f2 + g), grid, U2, epsilons)
    report = {"restricts_to_f1": exact, "restricts_to_f2_plus_g": mod.outcome}
    return out, report


def global_axiom_check(space, cover: CoarseCover, f, grid: TruncationGrid, epsilons=DEFAULT_EPSILONS) -> Verdict:
    """A function vanishing at infinity on each part vanishes at infinity on their union."""
    if len(cover.parts) != 2:
        raise ConfigError("parts", "the global axiom check takes a two-part cover")
    U1, U2 = cover.parts
    union = ss.union(U1, U2)
    cv = cover_verdict(space, CoarseCover((U1, U2), union), grid)
    if cv.outcome != HOLDS:
        raise PreconditionError(f"cover does not verify ({cv.outcome})", cv)
    for name, U in (("U1", U1), ("U2", U2)):
        v = _all_eps(space, f, grid, U, epsilons)
        if v.outcome != HOLDS:
            raise PreconditionError(f"f restricted to {name} does not tend to zero ({v.outcome})", v)
    res = _all_eps(space, f, grid, union, epsilons)
    within = max((int(r["witness"].get("max_norm", -1)) for r in res.witness["per_eps"]), default=-1)
    return Verdict(res.outcome, dict(res.witness, exceptional_radius=within))
