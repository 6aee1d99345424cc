"""Locally finite integer metric spaces given as oracles.

Every shipped space is the vertex set of a connected graph with positive integer
edge weights, and its metric is the path metric.  Points are plain hashable
Python values: integer tuples for grids, half-lines and trees, ``(side, point)``
pairs for coproducts, ints for file-loaded graphs.

Bulk work happens on a :class:`Truncation`, the closed ball ``ball(x0, W)``
with its points sorted by ``(norm, point)``.  Because of that ordering the ball
of any radius ``R <= W`` is a prefix of the truncation, so masks computed at
``W`` restrict to smaller balls by slicing.
"""
from __future__ import annotations

import csv
import heapq
import itertools
import json
import threading
from collections import deque
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import ConfigError, DomainError


class Space:
    """Base class for metric-space oracles."""

    kind = "abstract"
    coords_available = False

    def __init__(self, horizon):
        if horizon is None or int(horizon) < 0:
            raise ConfigError("horizon", "must be a nonnegative integer")
        self.horizon = int(horizon)
        self._truncations = {}
        self._lock = threading.Lock()

    # -- oracle interface -------------------------------------------------
    @property
    def basepoint(self):
        raise NotImplementedError

    def norm(self, p) -> int:
        """Distance from the basepoint."""
        return self.distance(self.basepoint, p)

    def distance(self, p, q) -> int:
        raise NotImplementedError

    def neighbors(self, p):
        """Yield ``(q, weight)`` for the graph edges at ``p``."""
        raise NotImplementedError

    def contains(self, p) -> bool:
        raise NotImplementedError

    def enumerate_ball(self, radius):
        """All points of norm at most ``radius``, in any order."""
        raise NotImplementedError

    @property
    def max_step(self) -> int:
        return 1

    def encode_point(self, p):
        return list(p)

    def decode_point(self, obj):
        p = tuple(int(c) for c in obj)
        if not self.contains(p):
            raise DomainError(f"{obj!r} is not a point of {self.describe()}")
        return p

    def descriptor(self) -> dict:
        raise NotImplementedError

    def describe(self) -> str:
        return json.dumps(self.descriptor(), sort_keys=True)

    def __repr__(self):
        return f"<{type(self).__name__} {self.describe()}>"

    # -- derived operations ----------------------------------------------
    def check_point(self, p):
        if not self.contains(p):
            raise DomainError(f"{p!r} is not a point of {self.describe()}")
        return p

    def ball(self, center, radius):
        """Sorted list of points within ``radius`` of ``center``."""
        radius = int(radius)
        if radius < 0:
            return []
        self.check_point(center)
        if center == self.basepoint:
            t = self.truncation(radius)
            return list(t.points)
        dist = {center: 0}
        heap = [(0, 0, center)]
        counter = itertools.count(1)
        while heap:
            d, _, p = heapq.heappop(heap)
            if d > dist.get(p, d):
                continue
            for q, w in self.neighbors(p):
                nd = d + w
                if nd <= radius and nd < dist.get(q, radius + 1):
                    dist[q] = nd
                    heapq.heappush(heap, (nd, next(counter), q))
        return sorted(dist, key=lambda p: (self.norm(p), p))

    def truncation(self, radius=None) -> "Truncation":
        radius = self.horizon if radius is None else int(radius)
        t = self._truncations.get(radius)
        if t is None:
            with self._lock:
                t = self._truncations.get(radius)
                if t is None:
                    t = self._build_truncation(radius)
                    self._truncations[radius] = t
        return t

    def _build_truncation(self, radius):
        return Truncation(self, radius, self.enumerate_ball(radius))


class Truncation:
    """The ball ``ball(x0, radius)`` with sorted points, norms and adjacency."""

    def __init__(self, space, radius, points, coords=None):
        self.space = space
        self.radius = int(radius)
        pts = sorted(points, key=lambda p: (space.norm(p), p)) if coords is None else list(points)
        self.points = pts
        self.norms = np.fromiter((space.norm(p) for p in pts), dtype=np.int64, count=len(pts))
        self.index = {p: i for i, p in enumerate(pts)}
        self.coords = coords
        self._graphs = {}
        self._adjacency = None
        self.masks = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self.points)

    def count(self, radius) -> int:
        """Number of points with norm at most ``radius`` (ball is a prefix)."""
        return int(np.searchsorted(self.norms, int(radius), side="right"))

    def outside(self, radius, n=None):
        """Boolean array over the first ``n`` points: norm strictly above ``radius``."""
        n = len(self) if n is None else n
        return self.norms[:n] > int(radius)

    # adjacency ------------------------------------------------------------
    def _edges(self):
        if self.coords is not None:
            return self.space.grid_edges(self)
        rows, cols, weights = [], [], []
        index = self.index
        for i, p in enumerate(self.points):
            for q, w in self.space.neighbors(p):
                j = index.get(q)
                if j is not None:
                    rows.append(i)
                    cols.append(j)
                    weights.append(w)
        return np.asarray(rows, np.int64), np.asarray(cols, np.int64), np.asarray(weights, np.float64)

    def adjacency(self):
        if self._adjacency is None:
            rows, cols, weights = self._edges()
            n = len(self)
            self._adjacency = sparse.csr_matrix((weights, (rows, cols)), shape=(n, n))
        return self._adjacency

    def graph(self, n=None):
        """CSR adjacency of the induced graph on the first ``n`` points."""
        n = len(self) if n is None else int(n)
        g = self._graphs.get(n)
        if g is None:
            adj = self.adjacency()
            g = adj if n == len(self) else adj[:n, :n].tocsr()
            self._graphs[n] = g
        return g

    def distances_from(self, mask, n=None, limit=np.inf):
        """Graph distance (float, ``inf`` if unreachable) from the masked set.

        Distances are measured inside the induced graph on the first ``n`` points.
        Returns ``(dist, source)`` where ``source[j]`` is the index of a nearest
        masked point (``-1`` where unreachable).
        """
        n = len(self) if n is None else int(n)
        src = np.flatnonzero(np.asarray(mask[:n]))
        if src.size == 0:
            return np.full(n, np.inf), np.full(n, -1, dtype=np.int64)
        dist, _, sources = csgraph.dijkstra(
            self.graph(n), directed=True, indices=src, min_only=True,
            return_predecessors=True, limit=limit,
        )
        return dist, sources.astype(np.int64)

    def pairs_within(self, k, n=None):
        """Unordered pairs ``(i, j)``, ``i <= j``, of the first ``n`` points with ``d <= k``.

        Distances are those of the space itself (not of the induced subgraph).
        """
        n = len(self) if n is None else int(n)
        k = int(k)
        return self.space._pairs_within(self, k, n)


def same_space(a, b) -> bool:
    """Identity of spaces up to their descriptors."""
    return a is b or a.descriptor() == b.descriptor()


# -- grids ------------------------------------------------------------------

class GridSpace(Space):
    """``Z^d`` with the L1 or L-infinity metric (grid or king-move graph)."""

    kind = "grid"
    coords_available = True

    def __init__(self, dim, metric="L1", horizon=None):
        if not isinstance(dim, int) or dim < 1:
            raise ConfigError("dim", "must be an integer >= 1")
        if metric not in ("L1", "Linf"):
            raise ConfigError("metric", "must be 'L1' or 'Linf'")
        self.dim = dim
        self.metric = metric
        if horizon is None:
            horizon = {1: 512, 2: 160}.get(dim, 24)
        super().__init__(horizon)
        self._origin = (0,) * dim
        if metric == "L1":
            steps = []
            for i in range(dim):
                for s in (1, -1):
                    e = [0] * dim
                    e[i] = s
                    steps.append(tuple(e))
        else:
            steps = [d for d in itertools.product((-1, 0, 1), repeat=dim) if any(d)]
        self._steps = tuple(steps)

    @property
    def basepoint(self):
        return self._origin

    def _vnorm(self, v):
        if self.metric == "L1":
            return sum(abs(c) for c in v)
        return max((abs(c) for c in v), default=0)

    def norm(self, p):
        return self._vnorm(p)

    def distance(self, p, q):
        return self._vnorm([a - b for a, b in zip(p, q)])

    def neighbors(self, p):
        for s in self._steps:
            q = tuple(a + b for a, b in zip(p, s))
            if self.contains(q):
                yield q, 1

    def contains(self, p):
        return (isinstance(p, tuple) and len(p) == self.dim
                and all(isinstance(c, (int, np.integer)) and not isinstance(c, bool) for c in p))

    def _coord_array(self, radius):
        axis = np.arange(-radius, radius + 1, dtype=np.int64)
        grid = np.stack(np.meshgrid(*([axis] * self.dim), indexing="ij"), axis=-1).reshape(-1, self.dim)
        norms = np.abs(grid).sum(axis=1) if self.metric == "L1" else np.abs(grid).max(axis=1)
        return grid[norms <= radius]

    def _filter_coords(self, arr):
        return arr

    def enumerate_ball(self, radius):
        if radius < 0:
            return []
        arr = self._filter_coords(self._coord_array(int(radius)))
        return [tuple(r) for r in arr.tolist()]

    def _build_truncation(self, radius):
        arr = self._filter_coords(self._coord_array(radius)) if radius >= 0 else np.zeros((0, self.dim), np.int64)
        norms = np.abs(arr).sum(axis=1) if self.metric == "L1" else np.abs(arr).max(axis=1)
        # sort by norm, then lexicographically by coordinates
        order = np.lexsort(tuple(arr[:, k] for k in range(self.dim - 1, -1, -1)) + (norms,))
        arr = arr[order]
        points = [tuple(r) for r in arr.tolist()]
        t = Truncation(self, radius, points, coords=arr)
        t._grid_radius = radius
        return t

    def _keys(self, arr, radius):
        base = 2 * radius + 3
        key = np.zeros(len(arr), dtype=np.int64)
        for k in range(self.dim):
            key = key * base + (arr[:, k] + radius + 1)
        return key

    def _lookup(self, t, arr, n):
        """Indices (or -1) of coordinate rows ``arr`` among the first ``n`` points of ``t``."""
        cache = getattr(t, "_key_cache", None)
        if cache is None:
            keys = self._keys(t.coords, t.radius + 1)
            order = np.argsort(keys, kind="stable")
            cache = (keys[order], order)
            t._key_cache = cache
        skeys, order = cache
        inside = np.all(np.abs(arr) <= t.radius + 1, axis=1)
        q = self._keys(np.where(inside[:, None], arr, 0), t.radius + 1)
        pos = np.searchsorted(skeys, q)
        pos = np.minimum(pos, len(skeys) - 1)
        found = inside & (skeys[pos] == q) if len(skeys) else np.zeros(len(arr), bool)
        idx = np.where(found, order[pos] if len(skeys) else -1, -1)
        return np.where(idx < n, idx, -1)

    def grid_edges(self, t):
        rows, cols, weights = [], [], []
        src = np.arange(len(t), dtype=np.int64)
        for s in self._steps:
            j = self._lookup(t, t.coords + np.asarray(s, np.int64), len(t))
            ok = j >= 0
            rows.append(src[ok])
            cols.append(j[ok])
        rows = np.concatenate(rows) if rows else np.zeros(0, np.int64)
        cols = np.concatenate(cols) if cols else np.zeros(0, np.int64)
        return rows, cols, np.ones(len(rows))

    def _pairs_within(self, t, k, n):
        offsets = self._coord_array(k)
        half = [o for o in offsets.tolist() if tuple(o) >= (0,) * self.dim]
        src = np.arange(n, dtype=np.int64)
        I, J = [], []
        base = t.coords[:n]
        for o in half:
            j = self._lookup(t, base + np.asarray(o, np.int64), n)
            ok = j >= 0
            I.append(src[ok])
            J.append(j[ok])
        if not I:
            return np.zeros(0, np.int64), np.zeros(0, np.int64)
        I = np.concatenate(I)
        J = np.concatenate(J)
        lo, hi = np.minimum(I, J), np.maximum(I, J)
        return lo, hi

    def descriptor(self):
        return {"kind": "grid", "dim": self.dim, "metric": self.metric, "horizon": self.horizon}


class LineSpace(GridSpace):
    """The integers ``Z``."""

    kind = "line"

    def __init__(self, horizon=None):
        super().__init__(1, "L1", horizon)

    def descriptor(self):
        return {"kind": "line", "horizon": self.horizon}


class HalfLineSpace(GridSpace):
    """The nonnegative integers ``Z_+`` with points ``(n,)``."""

    kind = "halfline"

    def __init__(self, horizon=None):
        super().__init__(1, "L1", 192 if horizon is None else horizon)

    def contains(self, p):
        return super().contains(p) and p[0] >= 0

    def _filter_coords(self, arr):
        return arr[arr[:, 0] >= 0]

    def descriptor(self):
        return {"kind": "halfline", "horizon": self.horizon}


# -- trees --------------------------------------------------------------

class TreeSpace(Space):
    """The ``k``-regular tree.

    A vertex is the tuple of turns on the path from the root: the first letter is
    in ``range(k)`` and every later letter in ``range(k - 1)`` (which child).
    """

    kind = "tree"

    def __init__(self, valence, horizon=None):
        if not isinstance(valence, int) or valence < 3:
            raise ConfigError("valence", "must be an integer >= 3")
        self.valence = valence
        super().__init__(12 if horizon is None else horizon)

    @property
    def basepoint(self):
        return ()

    def norm(self, p):
        return len(p)

    def distance(self, p, q):
        lcp = 0
        for a, b in zip(p, q):
            if a != b:
                break
            lcp += 1
        return len(p) + len(q) - 2 * lcp

    def _children(self, p):
        width = self.valence if not p else self.valence - 1
        return [p + (a,) for a in range(width)]

    def neighbors(self, p):
        if p:
            yield p[:-1], 1
        for c in self._children(p):
            yield c, 1

    def contains(self, p):
        if not isinstance(p, tuple):
            return False
        for i, a in enumerate(p):
            if not isinstance(a, (int, np.integer)) or isinstance(a, bool):
                return False
            if not 0 <= a < (self.valence if i == 0 else self.valence - 1):
                return False
        return True

    def enumerate_ball(self, radius):
        if radius < 0:
            return []
        out = [()]
        layer = [()]
        for _ in range(int(radius)):
            layer = [c for p in layer for c in self._children(p)]
            out.extend(layer)
        return out

    def _pairs_within(self, t, k, n):
        return _pairs_within_bfs(t, k, n)

    def descriptor(self):
        return {"kind": "tree", "valence": self.valence, "horizon": self.horizon}


# -- coproducts -----------------------------------------------------------

class CoproductSpace(Space):
    """Coarse disjoint union of two spaces, glued basepoint-to-basepoint.

    Points are ``(0, p)`` (left) and ``(1, q)`` (right).  The two basepoints are
    joined by one edge of weight ``gap``, so the cross distance is
    ``d(x, y) = d_L(p, l0) + gap + d_R(q, r0)``.  This is a path metric, and for
    cross pairs ``d(x, y) <= n`` forces both points into balls of radius ``n``,
    which is exactly the coarse disjointness of the two sides.  The basepoint is
    the left basepoint.
    """

    kind = "coproduct"

    def __init__(self, left, right, gap=1, horizon=None):
        if not isinstance(gap, int) or gap < 1:
            raise ConfigError("gap", "must be an integer >= 1")
        self.left = left
        self.right = right
        self.gap = gap
        if horizon is None:
            horizon = min(left.horizon, right.horizon)
        super().__init__(horizon)

    def side_space(self, side):
        return self.left if side == 0 else self.right

    @property
    def basepoint(self):
        return (0, self.left.basepoint)

    def norm(self, p):
        side, q = p
        if side == 0:
            return self.left.norm(q)
        return self.gap + self.right.norm(q)

    def distance(self, p, q):
        (s1, a), (s2, b) = p, q
        if s1 == s2:
            return self.side_space(s1).distance(a, b)
        return self.side_space(s1).norm(a) + self.gap + self.side_space(s2).norm(b)

    def neighbors(self, p):
        side, q = p
        sp = self.side_space(side)
        for r, w in sp.neighbors(q):
            yield (side, r), w
        if q == sp.basepoint:
            other = 1 - side
            yield (other, self.side_space(other).basepoint), self.gap

    @property
    def max_step(self):
        return max(self.gap, self.left.max_step, self.right.max_step)

    def contains(self, p):
        return (isinstance(p, tuple) and len(p) == 2 and p[0] in (0, 1)
                and self.side_space(p[0]).contains(p[1]))

    def enumerate_ball(self, radius):
        if radius < 0:
            return []
        out = [(0, q) for q in self.left.enumerate_ball(radius)]
        if radius >= self.gap:
            out += [(1, q) for q in self.right.enumerate_ball(radius - self.gap)]
        return out

    def encode_point(self, p):
        return [p[0], self.side_space(p[0]).encode_point(p[1])]

    def decode_point(self, obj):
        try:
            side, inner = obj
        except (TypeError, ValueError) as exc:
            raise DomainError(f"{obj!r} is not a coproduct point") from exc
        if side not in (0, 1):
            raise DomainError(f"{obj!r}: side must be 0 or 1")
        return (int(side), self.side_space(side).decode_point(inner))

    def _pairs_within(self, t, k, n):
        return _pairs_within_bfs(t, k, n)

    def descriptor(self):
        return {"kind": "coproduct", "left": self.left.descriptor(),
                "right": self.right.descriptor(), "gap": self.gap, "horizon": self.horizon}


# -- file-loaded graphs -------------------------------------------------

class GraphSpace(Space):
    """A finite connected graph from an undirected edge list; vertex 0 is the basepoint."""

    kind = "graph"

    def __init__(self, edges, horizon=None, path=None):
        adj = {}
        for u, v in edges:
            if u < 0 or v < 0:
                raise ConfigError("path", "vertex ids must be nonnegative integers")
            if u == v:
                continue
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
        if 0 not in adj:
            raise ConfigError("path", "vertex 0 (the basepoint) has no edges")
        self._adj = {u: tuple(sorted(vs)) for u, vs in adj.items()}
        self.path = path
        self._dist_cache = {}
        self._norms = self._bfs(0)
        if len(self._norms) != len(self._adj):
            raise ConfigError("path", "graph is not connected; distances must be finite")
        super().__init__(max(self._norms.values()) if horizon is None else horizon)

    def _bfs(self, src):
        dist = {src: 0}
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v in self._adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    @property
    def basepoint(self):
        return 0

    def norm(self, p):
        return self._norms[p]

    def distance(self, p, q):
        if p == 0:
            return self._norms[q]
        d = self._dist_cache.get(p)
        if d is None:
            d = self._bfs(p)
            self._dist_cache[p] = d
        return d[q]

    def neighbors(self, p):
        for q in self._adj[p]:
            yield q, 1

    def contains(self, p):
        return isinstance(p, (int, np.integer)) and not isinstance(p, bool) and p in self._adj

    def enumerate_ball(self, radius):
        return [v for v, d in self._norms.items() if d <= radius]

    def encode_point(self, p):
        return int(p)

    def decode_point(self, obj):
        p = int(obj)
        return self.check_point(p)

    def _pairs_within(self, t, k, n):
        return _pairs_within_bfs(t, k, n)

    def descriptor(self):
        d = {"kind": "graph", "horizon": self.horizon}
        if self.path is not None:
            d["path"] = str(self.path)
        return d


def _pairs_within_bfs(t, k, n):
    """Pair enumeration by bounded Dijkstra from every point (space metric)."""
    space = t.space
    index = t.index
    I, J = [], []
    for i in range(n):
        p = t.points[i]
        for q in space.ball(p, k):
            j = index.get(q)
            if j is not None and i <= j < n:
                I.append(i)
                J.append(j)
    return np.asarray(I, np.int64), np.asarray(J, np.int64)


# -- factory ---------------------------------------------------------------

def _int_field(desc, name, default=None):
    if name not in desc:
        if default is None:
            raise ConfigError(name, "missing")
        return default
    v = desc[name]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(name, f"expected an integer, got {v!r}")
    return v


def read_edge_csv(path):
    edges = []
    try:
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), 1):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    u, v = (int(x) for x in row[:2])
                except ValueError as exc:
                    if lineno == 1:
                        continue  # header row
                    raise ConfigError("path", f"line {lineno}: {exc}") from exc
                edges.append((u, v))
    except OSError as exc:
        raise ConfigError("path", f"cannot read {path}: {exc}") from exc
    return edges


def make_space(desc, base_dir=None) -> Space:
    """Build a space from a descriptor dict (the JSON space-definition format)."""
    if not isinstance(desc, dict):
        raise ConfigError("kind", "space descriptor must be a JSON object")
    kind = desc.get("kind")
    horizon = desc.get("horizon")
    if horizon is not None:
        horizon = _int_field(desc, "horizon")
    if kind == "grid":
        dim = _int_field(desc, "dim")
        metric = desc.get("metric", "L1")
        return GridSpace(dim, metric, horizon)
    if kind == "line":
        return LineSpace(horizon)
    if kind == "halfline":
        return HalfLineSpace(horizon)
    if kind == "tree":
        return TreeSpace(_int_field(desc, "valence"), horizon)
    if kind == "coproduct":
        for name in ("left", "right"):
            if name not in desc:
                raise ConfigError(name, "missing")
        left = make_space(desc["left"], base_dir)
        right = make_space(desc["right"], base_dir)
        return CoproductSpace(left, right, _int_field(desc, "gap", 1), horizon)
    if kind == "subspace":
        from .maps import SubspaceView
        from .subsets import from_json
        for name in ("ambient", "subset"):
            if name not in desc:
                raise ConfigError(name, "missing")
        ambient = make_space(desc["ambient"], base_dir)
        return SubspaceView(ambient, from_json(desc["subset"], ambient))
    if kind == "graph":
        if "path" not in desc:
            raise ConfigError("path", "missing")
        path = Path(desc["path"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return GraphSpace(read_edge_csv(path), horizon, path=desc["path"])
    raise ConfigError("kind", f"unknown space kind {kind!r}")


def load_space(path) -> Space:
    path = Path(path)
    try:
        desc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError("space", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("space", f"invalid JSON in {path}: {exc}") from exc
    return make_space(desc, base_dir=path.parent)
