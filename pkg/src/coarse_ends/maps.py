"""Coarse maps between spaces: a closed catalogue plus checks.

Every map knows its source and target space, applies pointwise, and reports
``preimage_radius(r)``: a radius ``rho`` with ``|f x| <= r  =>  |x| <= rho``, or
``None`` when no such bound exists (the map is not coarsely proper).
"""
from __future__ import annotations

import math

import numpy as np

from . import subsets as ss
from .errors import ConfigError, DomainError
from .grid import TruncationGrid
from .spaces import CoproductSpace, GridSpace, HalfLineSpace, LineSpace, Space, Truncation, make_space, same_space
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict


class SubspaceView(Space):
    """A subset of an ambient space with the restricted metric.

    Graph computations (distances to sets, components) run on the induced
    subgraph, so they agree with the restricted metric when the subset is
    geodesically convex (half-spaces, strips, axis rays, subtrees).
    """

    kind = "subspace"

    def __init__(self, ambient, subset):
        self.ambient = ambient
        self.subset = subset
        super().__init__(ambient.horizon)
        if not ss.contains(ambient, subset, ambient.basepoint):
            raise ConfigError("subset", "must contain the ambient basepoint")

    @property
    def basepoint(self):
        return self.ambient.basepoint

    def norm(self, p):
        return self.ambient.norm(p)

    def distance(self, p, q):
        return self.ambient.distance(p, q)

    def contains(self, p):
        return self.ambient.contains(p) and ss.contains(self.ambient, self.subset, p)

    def neighbors(self, p):
        for q, w in self.ambient.neighbors(p):
            if self.contains(q):
                yield q, w

    @property
    def max_step(self):
        return self.ambient.max_step

    def enumerate_ball(self, radius):
        return list(self._build_truncation(radius).points)

    def _keep(self, radius):
        ta = self.ambient.truncation(radius)
        return ta, np.flatnonzero(ss.mask(self.ambient, self.subset, radius))

    def _build_truncation(self, radius):
        ta, idx = self._keep(radius)
        coords = None if ta.coords is None else ta.coords[idx]
        t = Truncation(self, radius, [ta.points[i] for i in idx], coords=coords)
        if coords is None:
            # points arrive sorted; give the precomputed adjacency directly
            t._adjacency = ta.adjacency()[idx][:, idx].tocsr()
        t._ambient_index = idx
        return t

    def grid_edges(self, t):
        ta = self.ambient.truncation(t.radius)
        idx = t._ambient_index
        sub = ta.adjacency()[idx][:, idx].tocoo()
        return sub.row.astype(np.int64), sub.col.astype(np.int64), sub.data

    def _pairs_within(self, t, k, n):
        if n == 0:
            return np.zeros(0, np.int64), np.zeros(0, np.int64)
        ta = self.ambient.truncation(t.radius)
        idx = t._ambient_index
        na = ta.count(int(t.norms[n - 1]))
        I, J = ta.pairs_within(k, na)
        remap = np.full(len(ta), -1, dtype=np.int64)
        remap[idx] = np.arange(len(idx))
        a, b = remap[I], remap[J]
        ok = (a >= 0) & (b >= 0) & (a < n) & (b < n)
        a, b = a[ok], b[ok]
        return np.minimum(a, b), np.maximum(a, b)

    def encode_point(self, p):
        return self.ambient.encode_point(p)

    def decode_point(self, obj):
        return self.check_point(self.ambient.decode_point(obj))

    def descriptor(self):
        return {"kind": "subspace", "ambient": self.ambient.descriptor(),
                "subset": ss.to_json(self.subset, self.ambient)}


# -- catalogue -----------------------------------------------------------------

class CoarseMap:
    kind = "abstract"

    def __init__(self, source, target):
        self.source = source
        self.target = target

    def apply(self, p):
        if not self.source.contains(p):
            raise DomainError(f"{self.kind}: {p!r} is not in the source {self.source.describe()}")
        return self._apply(p)

    def _apply(self, p):
        raise NotImplementedError

    def preimage_radius(self, r):
        return None

    def _fields(self) -> dict:
        return {}

    def to_json(self) -> dict:
        d = {"kind": self.kind, "source": self.source.descriptor()}
        d.update(self._fields())
        return d

    def __repr__(self):
        extra = ", ".join(f"{k}={v!r}" for k, v in self._fields().items() if k not in ("outer", "inner", "default"))
        return f"<{self.kind}{' ' + extra if extra else ''}>"


class Identity(CoarseMap):
    kind = "identity"

    def __init__(self, space):
        super().__init__(space, space)

    def _apply(self, p):
        return p

    def preimage_radius(self, r):
        return int(r)


class Inclusion(CoarseMap):
    kind = "inclusion"

    def __init__(self, subspace: SubspaceView):
        if not isinstance(subspace, SubspaceView):
            raise ConfigError("source", "inclusion needs a subspace source")
        super().__init__(subspace, subspace.ambient)

    def _apply(self, p):
        return p

    def preimage_radius(self, r):
        return int(r)


class Projection(CoarseMap):
    """Coordinate projection of a grid onto ``Z``; coarsely uniform but not proper."""

    kind = "projection"

    def __init__(self, source, index):
        base = source.ambient if isinstance(source, SubspaceView) else source
        if not isinstance(base, GridSpace):
            raise ConfigError("source", "projection needs a grid source")
        if not 0 <= index < base.dim:
            raise ConfigError("index", f"coordinate {index} out of range")
        self.index = int(index)
        super().__init__(source, LineSpace(max(512, source.horizon)))

    def _apply(self, p):
        return (p[self.index],)

    def _fields(self):
        return {"index": self.index}


class FoldToLine(CoarseMap):
    """Coproduct to ``Z``: the left side goes to ``+|x|``, the right side to ``-|x|``."""

    kind = "fold_to_line"

    def __init__(self, source):
        if not isinstance(source, CoproductSpace):
            raise ConfigError("source", "fold_to_line needs a coproduct source")
        super().__init__(source, LineSpace(max(512, source.horizon)))

    def _apply(self, p):
        n = self.source.norm(p)
        return (n,) if p[0] == 0 else (-n,)

    def preimage_radius(self, r):
        return int(r)


class FloorSqrt(CoarseMap):
    """``n -> floor(sqrt(n))`` on ``Z_+``."""

    kind = "floor_sqrt"

    def __init__(self, source):
        if not isinstance(source, HalfLineSpace):
            raise ConfigError("source", "floor_sqrt needs a halfline source")
        super().__init__(source, source)

    def _apply(self, p):
        return (math.isqrt(p[0]),)

    def preimage_radius(self, r):
        return (int(r) + 1) ** 2 - 1


class Affine(CoarseMap):
    """``n -> scale * n + offset`` on a one-dimensional grid."""

    kind = "affine"

    def __init__(self, source, scale, offset=0, target=None):
        if not isinstance(source, GridSpace) or source.dim != 1:
            raise ConfigError("source", "affine maps need a 1-dimensional source")
        self.scale = int(scale)
        self.offset = int(offset)
        super().__init__(source, target if target is not None else LineSpace(max(512, source.horizon)))

    def _apply(self, p):
        q = (self.scale * p[0] + self.offset,)
        if not self.target.contains(q):
            raise DomainError(f"affine image {q!r} leaves the target {self.target.describe()}")
        return q

    def preimage_radius(self, r):
        if self.scale == 0:
            return None
        return -(-(int(r) + abs(self.offset)) // abs(self.scale))

    def _fields(self):
        d = {"scale": self.scale, "offset": self.offset}
        if not same_space(self.target, LineSpace(max(512, self.source.horizon))):
            d["target"] = self.target.descriptor()
        return d


class Constant(CoarseMap):
    kind = "constant"

    def __init__(self, source, target, value):
        target.check_point(value)
        self.value = value
        super().__init__(source, target)

    def _apply(self, p):
        return self.value

    def _fields(self):
        return {"value": self.target.encode_point(self.value), "target": self.target.descriptor()}


class Swap(CoarseMap):
    """Exchange the two sides of a coproduct of two copies of one space."""

    kind = "swap"

    def __init__(self, source):
        if not isinstance(source, CoproductSpace) or not same_space(source.left, source.right):
            raise ConfigError("source", "swap needs a coproduct of two equal spaces")
        super().__init__(source, source)

    def _apply(self, p):
        return (1 - p[0], p[1])

    def preimage_radius(self, r):
        return int(r) + self.source.gap


class SideInclusion(CoarseMap):
    kind = "side_inclusion"

    def __init__(self, coproduct, side):
        if not isinstance(coproduct, CoproductSpace):
            raise ConfigError("target", "side_inclusion needs a coproduct target")
        if side not in (0, 1):
            raise ConfigError("side", "must be 0 or 1")
        self.side = side
        super().__init__(coproduct.side_space(side), coproduct)

    def _apply(self, p):
        return (self.side, p)

    def preimage_radius(self, r):
        return int(r)

    def _fields(self):
        return {"side": self.side, "target": self.target.descriptor()}


class Compose(CoarseMap):
    """``outer . inner``."""

    kind = "compose"

    def __init__(self, outer, inner):
        if not same_space(inner.target, outer.source):
            raise ConfigError("outer", "source does not match the inner map's target")
        self.outer = outer
        self.inner = inner
        super().__init__(inner.source, outer.target)

    def _apply(self, p):
        return self.outer.apply(self.inner.apply(p))

    def preimage_radius(self, r):
        mid = self.outer.preimage_radius(r)
        return None if mid is None else self.inner.preimage_radius(mid)

    def to_json(self):
        return {"kind": self.kind, "outer": self.outer.to_json(), "inner": self.inner.to_json()}


class Pointwise(CoarseMap):
    """A finite table of overrides on top of a default map."""

    kind = "pointwise"

    def __init__(self, table: dict, default: CoarseMap):
        self.table = dict(table)
        self.default = default
        super().__init__(default.source, default.target)
        for p, q in self.table.items():
            self.source.check_point(p)
            self.target.check_point(q)

    def _apply(self, p):
        q = self.table.get(p)
        return self.default.apply(p) if q is None else q

    def preimage_radius(self, r):
        base = self.default.preimage_radius(r)
        if base is None:
            return None
        return max([base] + [self.source.norm(p) for p in self.table])

    def to_json(self):
        rows = [[self.source.encode_point(p), self.target.encode_point(q)] for p, q in sorted(self.table.items())]
        return {"kind": self.kind, "table": rows, "default": self.default.to_json()}


def map_from_json(obj, source=None) -> CoarseMap:
    """Parse a map; ``source`` is used when the JSON omits its source space."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError("map", "map spec must be an object with a 'kind'")
    k = obj["kind"]
    if k == "compose":
        for name in ("outer", "inner"):
            if name not in obj:
                raise ConfigError(name, "missing in compose")
        inner = map_from_json(obj["inner"], source)
        return Compose(map_from_json(obj["outer"], inner.target), inner)
    if k == "pointwise":
        default = map_from_json(obj.get("default", {"kind": "identity"}), source)
        table = {default.source.decode_point(p): default.target.decode_point(q) for p, q in obj.get("table", [])}
        return Pointwise(table, default)
    if k == "side_inclusion":
        if "target" not in obj:
            raise ConfigError("target", "missing in side_inclusion")
        return SideInclusion(make_space(obj["target"]), int(obj.get("side", 0)))
    src = make_space(obj["source"]) if "source" in obj else source
    if src is None:
        raise ConfigError("source", f"map {k!r} needs a source space")
    if k == "identity":
        return Identity(src)
    if k == "inclusion":
        return Inclusion(src)
    if k == "projection":
        return Projection(src, int(obj.get("index", 0)))
    if k == "fold_to_line":
        return FoldToLine(src)
    if k == "floor_sqrt":
        return FloorSqrt(src)
    if k == "affine":
        target = make_space(obj["target"]) if "target" in obj else None
        return Affine(src, int(obj.get("scale", 1)), int(obj.get("offset", 0)), target)
    if k == "negate":
        return Affine(src, -1, 0)
    if k == "constant":
        target = make_space(obj["target"]) if "target" in obj else src
        return Constant(src, target, target.decode_point(obj["value"]))
    if k == "swap":
        return Swap(src)
    raise ConfigError("kind", f"unknown map kind {k!r}")


def apply_map(f: CoarseMap, p):
    return f.apply(p)


# -- checks ------------------------------------------------------------------

def _images(t, f):
    return ss._map_images(t, f)


def _image_distances(f, imgs, I, J):
    tgt = f.target
    if isinstance(tgt, GridSpace) and len(I):
        arr = np.asarray(imgs, dtype=np.int64).reshape(len(imgs), -1)
        diff = np.abs(arr[I] - arr[J])
        return diff.sum(axis=1) if tgt.metric == "L1" else diff.max(axis=1)
    return np.fromiter((tgt.distance(imgs[i], imgs[j]) for i, j in zip(I, J)), dtype=np.int64, count=len(I))


def _image_norms(f, imgs):
    tgt = f.target
    if isinstance(tgt, GridSpace) and imgs:
        arr = np.abs(np.asarray(imgs, dtype=np.int64).reshape(len(imgs), -1))
        return arr.sum(axis=1) if tgt.metric == "L1" else arr.max(axis=1)
    return np.fromiter((tgt.norm(q) for q in imgs), dtype=np.int64, count=len(imgs))


def _working(space, grid):
    if grid.r_max > space.horizon:
        raise ConfigError("grid", f"largest radius {grid.r_max} exceeds the horizon {space.horizon} "
                                  f"of {space.describe()}")
    return space.truncation()


def _window_trend(seq, grid):
    """'stable', 'growing' (strictly increasing) or 'mixed' on the trailing window."""
    win = grid.trailing(seq)
    if all(v == win[0] for v in win):
        return "stable"
    if all(b > a for a, b in zip(win, win[1:])):
        return "growing"
    return "mixed"


def validate_coarse_map(f: CoarseMap, grid: TruncationGrid) -> Verdict:
    """Coarse uniformity at scale 1 and coarse properness on the truncation grid."""
    t = _working(f.source, grid)
    imgs = _images(t, f)
    n_max = t.count(grid.r_max)
    I, J = t.pairs_within(1, n_max)
    dist = _image_distances(f, imgs, I, J)
    expansion, worst = [], []
    for R in grid.radii:
        n = t.count(R)
        sel = (J < n)
        if sel.any():
            k = int(np.argmax(np.where(sel, dist, -1)))
            expansion.append(int(dist[k]))
            worst.append([f.source.encode_point(t.points[I[k]]), f.source.encode_point(t.points[J[k]])])
        else:
            expansion.append(0)
            worst.append(None)
    uniform = _window_trend(expansion, grid)

    img_norms = _image_norms(f, imgs)
    m = len(grid.radii) - 1
    tested = [grid.tau(grid.radii[k]) for k in range(m - grid.window + 2)]
    table = []
    escaping = []
    unresolved = []
    for r in tested:
        row = []
        for R in grid.radii:
            n = t.count(R)
            hit = np.flatnonzero(img_norms[:n] <= r)
            row.append(int(t.norms[hit[-1]]) if hit.size else -1)
        table.append({"r": r, "max_preimage_norm": row})
        win_R = grid.trailing(grid.radii)
        win = grid.trailing(row)
        if all(v == win[0] for v in win):
            continue
        tops = [int(t.norms[t.count(R) - 1]) for R in win_R]
        if all(v == top for v, top in zip(win, tops)) and _window_trend(win, grid) == "growing":
            escaping.append(r)
        else:
            unresolved.append(r)
    witness = {"L": expansion[-1], "expansion_profile": expansion, "properness": table}
    if uniform == "growing":
        witness["pair"] = worst[-1]
        return Verdict(FAILS, dict(witness, failed="coarsely uniform"))
    if escaping:
        r = escaping[0]
        row = next(rw["max_preimage_norm"] for rw in table if rw["r"] == r)
        witness["escaping"] = {"r": r, "preimage_norms": row}
        return Verdict(FAILS, dict(witness, failed="coarsely proper"))
    if uniform == "stable" and table and not (set(tested[:1]) & set(unresolved)):
        witness["unresolved_r"] = unresolved
        return Verdict(HOLDS, witness)
    return Verdict(INCONCLUSIVE, witness)


def maps_close(f: CoarseMap, g: CoarseMap, grid: TruncationGrid) -> Verdict:
    """Closeness of two maps: ``sup d(f x, g x)`` over ``ball(R)`` along the grid."""
    if not (same_space(f.source, g.source) and same_space(f.target, g.target)):
        raise ConfigError("map", "maps_close needs maps with the same source and target")
    t = _working(f.source, grid)
    n_max = t.count(grid.r_max)
    fi = _images(t, f)[:n_max]
    gi = _images(t, g)[:n_max]
    idx = np.arange(n_max)
    combined = fi + gi
    d = _image_distances(f, combined, idx, idx + n_max)
    sups, realizers, first_over = [], [], []
    for R in grid.radii:
        n = t.count(R)
        k = int(np.argmax(d[:n]))
        sups.append(int(d[k]))
        realizers.append(f.source.encode_point(t.points[k]))
        over = np.flatnonzero(d[:n] > grid.tau(R))
        first_over.append(f.source.encode_point(t.points[over[0]]) if over.size else None)
    win = grid.trailing(range(len(grid.radii)))
    witness = {"profile": sups, "radii": list(grid.radii)}
    apart = all(sups[i] > grid.tau(grid.radii[i]) for i in win)
    close = all(sups[i] == sups[-1] for i in win)
    if apart and not close:
        witness["indices"] = win
        witness["witness_points"] = [first_over[i] for i in win]
        witness["realizers"] = [realizers[i] for i in win]
        return Verdict("apart", witness)
    if close and not apart:
        witness["bound"] = sups[-1]
        return Verdict("close", witness)
    return Verdict(INCONCLUSIVE, witness)
