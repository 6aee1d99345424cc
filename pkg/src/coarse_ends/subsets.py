"""Symbolic subsets of a space, evaluated as boolean masks over truncations.

A :class:`SubsetSpec` is an immutable expression tree.  ``mask(space, S)`` is
its indicator over ``space.truncation()`` (the working horizon ``H`` of the
space), cached per truncation.  ``members(space, S, R)`` is the restriction of
that mask to ``ball(x0, R)``.

Distance-based nodes (``thicken``, ``voronoi_side``, ``far_from``) measure
distances in the induced graph of the working truncation.  On the shipped
spaces balls are geodesically convex, so these distances are exact; the only
truncation effect is that a set's points beyond ``H`` are invisible, which means
``thicken(S, n)`` is exact on ``ball(x0, H - n)``.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import ClassVar

import numpy as np
from scipy.sparse import csgraph

from .errors import ConfigError, DomainError
from .spaces import same_space

_KINDS = {}


def _cached_hash(self):
    h = self.__dict__.get("_hash")
    if h is None:
        h = hash((type(self).__name__,) + tuple(getattr(self, f.name) for f in fields(self)))
        object.__setattr__(self, "_hash", h)
    return h


def _node(kind):
    def wrap(cls):
        cls = dataclass(frozen=True, repr=False)(cls)
        cls.kind = kind
        cls.__hash__ = _cached_hash
        _KINDS[kind] = cls
        return cls
    return wrap


class SubsetSpec:
    kind: ClassVar[str] = "abstract"

    def children(self):
        return ()

    def __repr__(self):
        args = ", ".join(repr(getattr(self, f.name)) for f in fields(self))
        text = f"{self.kind}({args})"
        return text if len(text) < 200 else text[:197] + "..."


@_node("all")
class All(SubsetSpec):
    pass


@_node("empty")
class Empty(SubsetSpec):
    pass


@_node("finite")
class Finite(SubsetSpec):
    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(sorted(set(self.points))))


@_node("ball_complement")
class BallComplement(SubsetSpec):
    """Points at distance strictly greater than ``radius`` from ``center``."""
    center: object
    radius: int


@_node("halfspace")
class HalfSpace(SubsetSpec):
    """``{x : a . x >= c}`` (grid-type spaces only)."""
    a: tuple
    c: int

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(v) for v in self.a))


@_node("axis_ray")
class AxisRay(SubsetSpec):
    """``{t * sign * e_axis : t >= 0}`` (grid-type spaces only)."""
    axis: int
    sign: int


@_node("subtree")
class Subtree(SubsetSpec):
    """Tree vertices whose word starts with ``root``."""
    root: tuple


@_node("component_tag")
class ComponentTag(SubsetSpec):
    """One side of a coproduct."""
    side: int


@_node("side_subset")
class SideSubset(SubsetSpec):
    """The copy of a subset of one coproduct side."""
    side: int
    inner: SubsetSpec

    def children(self):
        return ()


@_node("endpoint_image")
class EndpointImage(SubsetSpec):
    endpoint: object


@_node("union")
class Union(SubsetSpec):
    parts: tuple

    def children(self):
        return self.parts


@_node("intersection")
class Intersection(SubsetSpec):
    parts: tuple

    def children(self):
        return self.parts


@_node("complement")
class Complement(SubsetSpec):
    inner: SubsetSpec

    def children(self):
        return (self.inner,)


@_node("difference")
class Difference(SubsetSpec):
    a: SubsetSpec
    b: SubsetSpec

    def children(self):
        return (self.a, self.b)


@_node("thicken")
class Thicken(SubsetSpec):
    """``E_n[S]``: every point within distance ``n`` of ``S``."""
    inner: SubsetSpec
    n: int

    def children(self):
        return (self.inner,)


@_node("voronoi_side")
class VoronoiSide(SubsetSpec):
    """One of the two disjoint sets produced by separating ``a`` from ``b``.

    With ``n1(x) = d(x, a)`` and ``n2(x) = d(x, b)`` for ``x`` outside both sets,
    ``V1 = {n1 <= n2}`` and ``V2`` the rest.  Side 0 is ``a | V1``; side 1 is
    ``(b - a) | V2``.  Points of ``a & b`` go to side 0 so the sides never meet.
    """
    a: SubsetSpec
    b: SubsetSpec
    side: int

    def children(self):
        return (self.a, self.b)


@_node("far_from")
class FarFrom(SubsetSpec):
    """Points ``x`` of ``inner`` with ``d(x, other) > ceil(|x| / divisor)``."""
    inner: SubsetSpec
    other: SubsetSpec
    divisor: int

    def children(self):
        return (self.inner, self.other)


@_node("ball_component")
class BallComponent(SubsetSpec):
    """Path component of ``{x : |x| >= radius}`` containing ``anchor``."""
    radius: int
    anchor: object


@_node("depth_cut")
class DepthCut(SubsetSpec):
    """Points where the parts in ``chosen`` are clearly deeper than the others.

    With ``w_i(x) = d(x, X - parts[i])`` and ``M(x) = max_i w_i(x)``, the set is
    ``{x : divisor * (min_{i in chosen} w_i - max_{j not in chosen} w_j) >= M}``
    (the maximum over an empty family is 0).
    """
    parts: tuple
    chosen: tuple
    divisor: int

    def children(self):
        return self.parts


@_node("lattice_cell")
class LatticeCell(SubsetSpec):
    """Points whose normalized depth vector is near the lattice point ``cell / scale``.

    With ``w_i`` as in :class:`DepthCut` and ``p_i = w_i / sum(w)``, the set is
    ``{x : max_i |scale * p_i(x) - cell_i| < rho_num / rho_den}``.
    """
    parts: tuple
    cell: tuple
    scale: int
    rho_num: int
    rho_den: int

    def children(self):
        return self.parts


@_node("preimage")
class Preimage(SubsetSpec):
    """``f^{-1}(inner)`` for a map ``f`` whose target holds ``inner``."""
    map: object
    inner: SubsetSpec


@_node("image")
class Image(SubsetSpec):
    """``f(inner)`` for a coarsely proper map ``f`` whose source holds ``inner``."""
    map: object
    inner: SubsetSpec


ALL = All()
EMPTY = Empty()


# -- smart constructors ----------------------------------------------------

def union(*specs):
    parts = []
    for s in specs:
        if isinstance(s, Union):
            parts.extend(s.parts)
        elif isinstance(s, All):
            return ALL
        elif not isinstance(s, Empty):
            parts.append(s)
    parts = list(dict.fromkeys(parts))
    if not parts:
        return EMPTY
    if len(parts) == 1:
        return parts[0]
    return Union(tuple(parts))


def intersection(*specs):
    parts = []
    for s in specs:
        if isinstance(s, Intersection):
            parts.extend(s.parts)
        elif isinstance(s, Empty):
            return EMPTY
        elif not isinstance(s, All):
            parts.append(s)
    parts = list(dict.fromkeys(parts))
    if not parts:
        return ALL
    if len(parts) == 1:
        return parts[0]
    return Intersection(tuple(parts))


def complement(spec):
    if isinstance(spec, Complement):
        return spec.inner
    if isinstance(spec, All):
        return EMPTY
    if isinstance(spec, Empty):
        return ALL
    return Complement(spec)


def difference(a, b):
    return Difference(a, b)


def thicken(spec, n):
    n = int(n)
    if n < 0:
        raise ConfigError("n", "entourage bound must be nonnegative")
    if n == 0 or isinstance(spec, (All, Empty)):
        return spec
    return Thicken(spec, n)


# -- evaluation ------------------------------------------------------------

def mask(space, spec, radius=None):
    """Read-only boolean indicator of ``spec`` over ``space.truncation(radius)``."""
    return _mask(space.truncation(radius), spec)


def _mask(t, spec):
    m = t.masks.get(spec)
    if m is None:
        fn = _EVAL.get(spec.kind)
        if fn is None:
            raise ConfigError("kind", f"unknown subset kind {spec.kind!r}")
        m = np.ascontiguousarray(fn(t, spec), dtype=bool)
        m.setflags(write=False)
        t.masks[spec] = m
    return m


def members(space, spec, radius):
    """``spec`` intersected with ``ball(x0, radius)``, sorted lexicographically."""
    radius = int(radius)
    if radius > space.horizon:
        raise ConfigError("radius", f"{radius} exceeds the space horizon {space.horizon}")
    t = space.truncation()
    m = _mask(t, spec)[: t.count(radius)]
    return sorted(t.points[i] for i in np.flatnonzero(m))


def _point_member(space, spec, p):
    """Direct membership for nodes that need no global computation, else ``None``."""
    k = spec.kind
    if k == "all":
        return True
    if k == "empty":
        return False
    if k == "finite":
        return p in spec.points
    if k == "halfspace":
        if len(spec.a) != len(p):
            return None
        return sum(a * c for a, c in zip(spec.a, p)) >= spec.c
    if k == "axis_ray":
        return p[spec.axis] * spec.sign >= 0 and all(c == 0 for i, c in enumerate(p) if i != spec.axis)
    if k == "ball_complement":
        return space.distance(spec.center, p) > spec.radius
    if k == "subtree":
        return tuple(p[:len(spec.root)]) == spec.root
    if k == "component_tag":
        return p[0] == spec.side
    if k in ("union", "intersection"):
        vals = [_point_member(space, q, p) for q in spec.parts]
        if None in vals:
            return None
        return any(vals) if k == "union" else all(vals)
    if k == "complement":
        v = _point_member(space, spec.inner, p)
        return None if v is None else not v
    if k == "difference":
        a, b = _point_member(space, spec.a, p), _point_member(space, spec.b, p)
        return None if a is None or b is None else (a and not b)
    return None


def contains(space, spec, p):
    """Membership of a single point."""
    space.check_point(p)
    direct = _point_member(space, spec, p)
    if direct is not None:
        return bool(direct)
    r = space.norm(p)
    t = space.truncation() if r <= space.horizon else space.truncation(r)
    return bool(_mask(t, spec)[t.index[p]])


def _need_coords(t, kind):
    if t.coords is None:
        raise ConfigError(kind, "only defined on grid-type spaces")
    return t.coords


def _indices(t, points):
    out = np.zeros(len(t), dtype=bool)
    for p in points:
        i = t.index.get(p)
        if i is not None:
            out[i] = True
    return out


def _eval_finite(t, s):
    for p in s.points:
        t.space.check_point(p)
    return _indices(t, s.points)


def _eval_ball_complement(t, s):
    space = t.space
    space.check_point(s.center)
    if t.coords is not None and hasattr(space, "metric"):
        diff = np.abs(t.coords - np.asarray(s.center, np.int64))
        d = diff.sum(axis=1) if space.metric == "L1" else diff.max(axis=1)
        return d > s.radius
    inside = _indices(t, space.ball(s.center, s.radius))
    return ~inside


def _eval_halfspace(t, s):
    coords = _need_coords(t, "halfspace")
    if len(s.a) != coords.shape[1]:
        raise ConfigError("a", f"expected {coords.shape[1]} coefficients")
    return coords @ np.asarray(s.a, np.int64) >= s.c


def _eval_axis_ray(t, s):
    coords = _need_coords(t, "axis_ray")
    if not 0 <= s.axis < coords.shape[1]:
        raise ConfigError("axis", f"axis {s.axis} out of range")
    if s.sign not in (1, -1):
        raise ConfigError("sign", "must be +1 or -1")
    others = np.delete(coords, s.axis, axis=1)
    return (coords[:, s.axis] * s.sign >= 0) & np.all(others == 0, axis=1)


def _eval_subtree(t, s):
    if t.space.kind != "tree":
        raise ConfigError("subtree", "only defined on tree spaces")
    k = len(s.root)
    return np.fromiter((p[:k] == s.root for p in t.points), dtype=bool, count=len(t))


def _eval_component_tag(t, s):
    if t.space.kind != "coproduct":
        raise ConfigError("component_tag", "only defined on coproduct spaces")
    return np.fromiter((p[0] == s.side for p in t.points), dtype=bool, count=len(t))


def _eval_side_subset(t, s):
    space = t.space
    if space.kind != "coproduct":
        raise ConfigError("side_subset", "only defined on coproduct spaces")
    sub = space.side_space(s.side)
    need = max((sub.norm(p[1]) for p in t.points if p[0] == s.side), default=0)
    st = sub.truncation(max(need, sub.horizon))
    inner = _mask(st, s.inner)
    out = np.zeros(len(t), dtype=bool)
    for i, p in enumerate(t.points):
        if p[0] == s.side:
            out[i] = inner[st.index[p[1]]]
    return out


def _eval_endpoint_image(t, s):
    return _indices(t, s.endpoint.image_points(t.space, t.radius))


def _eval_union(t, s):
    out = np.zeros(len(t), dtype=bool)
    for p in s.parts:
        out |= _mask(t, p)
    return out


def _eval_intersection(t, s):
    out = np.ones(len(t), dtype=bool)
    for p in s.parts:
        out &= _mask(t, p)
    return out


def _eval_thicken(t, s):
    dist, _ = t.distances_from(_mask(t, s.inner), limit=s.n + 0.5)
    return dist <= s.n


def _eval_voronoi(t, s):
    a = _mask(t, s.a)
    b = _mask(t, s.b)
    da, _ = t.distances_from(a)
    db, _ = t.distances_from(b)
    rest = ~a & ~b
    v1 = rest & (da <= db)
    if s.side == 0:
        return a | v1
    return (b & ~a) | (rest & ~v1)


def _eval_far_from(t, s):
    inner = _mask(t, s.inner)
    dist, _ = t.distances_from(_mask(t, s.other))
    threshold = -(-t.norms // s.divisor)
    return inner & (dist > threshold)


def _eval_ball_component(t, s):
    space = t.space
    space.check_point(s.anchor)
    a = t.index.get(s.anchor)
    if a is None or space.norm(s.anchor) < s.radius:
        return np.zeros(len(t), dtype=bool)
    keep = t.norms >= s.radius
    idx = np.flatnonzero(keep)
    sub = t.graph()[idx][:, idx]
    _, labels = csgraph.connected_components(sub, directed=False)
    pos = np.searchsorted(idx, a)
    out = np.zeros(len(t), dtype=bool)
    out[idx[labels == labels[pos]]] = True
    return out


def _depths(t, parts):
    cache = t.__dict__.setdefault("_depth_cache", {})
    w = cache.get(parts)
    if w is None:
        cap = 2 * t.radius + 2
        rows = []
        for p in parts:
            d, _ = t.distances_from(~_mask(t, p))
            rows.append(np.minimum(d, cap).astype(np.int64))
        w = np.stack(rows)
        w.setflags(write=False)
        cache[parts] = w
    return w


def _eval_depth_cut(t, s):
    w = _depths(t, s.parts)
    sel = np.zeros(len(s.parts), dtype=bool)
    sel[list(s.chosen)] = True
    if not sel.any():
        raise ConfigError("chosen", "depth cut needs at least one chosen part")
    inner = w[sel].min(axis=0)
    outer = w[~sel].max(axis=0) if (~sel).any() else np.zeros(len(t), dtype=np.int64)
    return s.divisor * (inner - outer) >= w.max(axis=0)


def _eval_lattice_cell(t, s):
    w = _depths(t, s.parts)
    total = w.sum(axis=0)
    c = np.asarray(s.cell, dtype=np.int64).reshape(-1, 1)
    if c.shape[0] != len(s.parts):
        raise ConfigError("cell", f"expected {len(s.parts)} coordinates")
    dev = np.abs(s.scale * w - c * total).max(axis=0)
    return s.rho_den * dev < s.rho_num * total


def _map_images(t, f):
    cache = t.__dict__.setdefault("_image_cache", {})
    imgs = cache.get(f)
    if imgs is None:
        imgs = [f.apply(p) for p in t.points]
        cache[f] = imgs
    return imgs


def _eval_preimage(t, s):
    f = s.map
    if not same_space(f.source, t.space):
        raise DomainError("preimage: map source does not match the space")
    imgs = _map_images(t, f)
    target = f.target
    need = max((target.norm(q) for q in imgs), default=0)
    tt = target.truncation(max(need, target.horizon))
    inner = _mask(tt, s.inner)
    return np.fromiter((inner[tt.index[q]] for q in imgs), dtype=bool, count=len(t))


def _eval_image(t, s):
    f = s.map
    if not same_space(f.target, t.space):
        raise DomainError("image: map target does not match the space")
    rho = f.preimage_radius(t.radius)
    if rho is None:
        raise DomainError(f"image under {f.kind} is not evaluable: map is not coarsely proper")
    src = f.source.truncation(max(rho, 0))
    inner = _mask(src, s.inner)
    out = np.zeros(len(t), dtype=bool)
    for i in np.flatnonzero(inner):
        j = t.index.get(f.apply(src.points[i]))
        if j is not None:
            out[j] = True
    return out


_EVAL = {
    "all": lambda t, s: np.ones(len(t), dtype=bool),
    "empty": lambda t, s: np.zeros(len(t), dtype=bool),
    "finite": _eval_finite,
    "ball_complement": _eval_ball_complement,
    "halfspace": _eval_halfspace,
    "axis_ray": _eval_axis_ray,
    "subtree": _eval_subtree,
    "component_tag": _eval_component_tag,
    "side_subset": _eval_side_subset,
    "endpoint_image": _eval_endpoint_image,
    "union": _eval_union,
    "intersection": _eval_intersection,
    "complement": lambda t, s: ~_mask(t, s.inner),
    "difference": lambda t, s: _mask(t, s.a) & ~_mask(t, s.b),
    "thicken": _eval_thicken,
    "voronoi_side": _eval_voronoi,
    "far_from": _eval_far_from,
    "ball_component": _eval_ball_component,
    "depth_cut": _eval_depth_cut,
    "lattice_cell": _eval_lattice_cell,
    "preimage": _eval_preimage,
    "image": _eval_image,
}


# -- JSON ------------------------------------------------------------------

def to_json(spec, space):
    """Serialize a spec; ``space`` encodes the points it mentions."""
    k = spec.kind
    if k in ("all", "empty"):
        return {"kind": k}
    if k == "finite":
        return {"kind": k, "points": [space.encode_point(p) for p in spec.points]}
    if k == "ball_complement":
        return {"kind": k, "center": space.encode_point(spec.center), "radius": spec.radius}
    if k == "halfspace":
        return {"kind": k, "a": list(spec.a), "c": spec.c}
    if k == "axis_ray":
        return {"kind": k, "axis": spec.axis, "sign": spec.sign}
    if k == "subtree":
        return {"kind": k, "root": list(spec.root)}
    if k == "component_tag":
        return {"kind": k, "side": spec.side}
    if k == "side_subset":
        return {"kind": k, "side": spec.side, "inner": to_json(spec.inner, space.side_space(spec.side))}
    if k == "endpoint_image":
        return {"kind": k, "endpoint": spec.endpoint.to_json(space)}
    if k in ("union", "intersection"):
        return {"kind": k, "parts": [to_json(p, space) for p in spec.parts]}
    if k == "complement":
        return {"kind": k, "inner": to_json(spec.inner, space)}
    if k == "difference":
        return {"kind": k, "a": to_json(spec.a, space), "b": to_json(spec.b, space)}
    if k == "thicken":
        return {"kind": k, "inner": to_json(spec.inner, space), "n": spec.n}
    if k == "voronoi_side":
        return {"kind": k, "a": to_json(spec.a, space), "b": to_json(spec.b, space), "side": spec.side}
    if k == "far_from":
        return {"kind": k, "inner": to_json(spec.inner, space), "other": to_json(spec.other, space),
                "divisor": spec.divisor}
    if k == "ball_component":
        return {"kind": k, "radius": spec.radius, "anchor": space.encode_point(spec.anchor)}
    if k == "depth_cut":
        return {"kind": k, "parts": [to_json(p, space) for p in spec.parts], "chosen": list(spec.chosen),
                "divisor": spec.divisor}
    if k == "lattice_cell":
        return {"kind": k, "parts": [to_json(p, space) for p in spec.parts], "cell": list(spec.cell),
                "scale": spec.scale, "rho_num": spec.rho_num, "rho_den": spec.rho_den}
    if k in ("preimage", "image"):
        f = spec.map
        inner_space = f.target if k == "preimage" else f.source
        return {"kind": k, "map": f.to_json(), "inner": to_json(spec.inner, inner_space)}
    raise ConfigError("kind", f"cannot serialize {k!r}")


def _get(obj, name):
    if name not in obj:
        raise ConfigError(name, f"missing in {obj.get('kind')!r} subset")
    return obj[name]


def from_json(obj, space, maps=None):
    """Parse a subset spec over ``space``."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError("kind", "subset spec must be an object with a 'kind'")
    k = obj["kind"]
    if k == "all":
        return ALL
    if k == "empty":
        return EMPTY
    if k == "finite":
        return Finite(tuple(space.decode_point(p) for p in _get(obj, "points")))
    if k == "ball_complement":
        return BallComplement(space.decode_point(_get(obj, "center")), int(_get(obj, "radius")))
    if k == "halfspace":
        return HalfSpace(tuple(_get(obj, "a")), int(_get(obj, "c")))
    if k == "axis_ray":
        return AxisRay(int(_get(obj, "axis")), int(_get(obj, "sign")))
    if k == "subtree":
        return Subtree(tuple(int(a) for a in _get(obj, "root")))
    if k == "component_tag":
        return ComponentTag(int(_get(obj, "side")))
    if k == "side_subset":
        side = int(_get(obj, "side"))
        return SideSubset(side, from_json(_get(obj, "inner"), space.side_space(side), maps))
    if k == "endpoint_image":
        from .endpoints import endpoint_from_json
        return EndpointImage(endpoint_from_json(_get(obj, "endpoint"), space, maps))
    if k in ("union", "intersection"):
        parts = tuple(from_json(p, space, maps) for p in _get(obj, "parts"))
        return Union(parts) if k == "union" else Intersection(parts)
    if k == "complement":
        return Complement(from_json(_get(obj, "inner"), space, maps))
    if k == "difference":
        return Difference(from_json(_get(obj, "a"), space, maps), from_json(_get(obj, "b"), space, maps))
    if k == "thicken":
        return thicken(from_json(_get(obj, "inner"), space, maps), int(_get(obj, "n")))
    if k == "voronoi_side":
        return VoronoiSide(from_json(_get(obj, "a"), space, maps), from_json(_get(obj, "b"), space, maps),
                           int(_get(obj, "side")))
    if k == "far_from":
        return FarFrom(from_json(_get(obj, "inner"), space, maps), from_json(_get(obj, "other"), space, maps),
                       int(_get(obj, "divisor")))
    if k == "ball_component":
        return BallComponent(int(_get(obj, "radius")), space.decode_point(_get(obj, "anchor")))
    if k == "depth_cut":
        return DepthCut(tuple(from_json(p, space, maps) for p in _get(obj, "parts")),
                        tuple(sorted(int(i) for i in _get(obj, "chosen"))), int(_get(obj, "divisor")))
    if k == "lattice_cell":
        return LatticeCell(tuple(from_json(p, space, maps) for p in _get(obj, "parts")),
                           tuple(int(c) for c in _get(obj, "cell")), int(_get(obj, "scale")),
                           int(_get(obj, "rho_num")), int(_get(obj, "rho_den")))
    if k in ("preimage", "image"):
        from .maps import map_from_json
        if k == "preimage":
            f = map_from_json(_get(obj, "map"), source=space)
        else:
            f = map_from_json(_get(obj, "map"))
            if not same_space(f.target, space):
                raise ConfigError("map", "image map must land in the enclosing space")
        inner_space = f.target if k == "preimage" else f.source
        node = Preimage if k == "preimage" else Image
        return node(f, from_json(_get(obj, "inner"), inner_space, maps))
    raise ConfigError("kind", f"unknown subset kind {k!r}")
