"""Coarse rays ``Z+ -> X`` as deterministic, serializable generators.

Every generator answers ``point(i)`` and ``index_bound(space, R)``: an index
``N`` with ``|phi(i)| > R`` for every ``i >= N`` and a flag telling whether that
claim is proven (rather than found by scanning).  The image inside a ball is the
set of ``phi(i)`` with ``i < N`` and norm at most the radius.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, fields

from .errors import ConfigError, DomainError
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict

# Scan limit (in multiples of the radius) for generators without a proven bound
SCAN_FACTOR = 8


def _cached_hash(self):
    h = self.__dict__.get("_hash")
    if h is None:
        h = hash((type(self).__name__,) + tuple(getattr(self, f.name) for f in fields(self)))
        object.__setattr__(self, "_hash", h)
    return h


def _endpoint(kind):
    def wrap(cls):
        cls = dataclass(frozen=True, repr=False)(cls)
        cls.kind = kind
        cls.__hash__ = _cached_hash
        return cls
    return wrap


class Endpoint:
    kind = "abstract"

    def point(self, i):
        raise NotImplementedError

    def index_bound(self, space, radius):
        raise NotImplementedError

    def points(self, n):
        return [self.point(i) for i in range(n)]

    def image_points(self, space, radius):
        """Sorted distinct image points of norm at most ``radius``."""
        cache = self.__dict__.setdefault("_image_cache", {})
        key = (id(space), int(radius))
        hit = cache.get(key)
        if hit is None:
            n, _ = self.index_bound(space, radius)
            pts = set()
            for i in range(n):
                p = self.point(i)
                if space.norm(p) <= radius:
                    pts.add(p)
            hit = sorted(pts, key=lambda p: (space.norm(p), p))
            cache[key] = hit
        return hit

    def descriptor(self, space) -> dict:
        raise NotImplementedError

    def to_json(self, space) -> dict:
        return self.descriptor(space)

    def sort_key(self, space) -> str:
        return json.dumps(self.descriptor(space), sort_keys=True)

    def __repr__(self):
        text = f"{self.kind}(" + ", ".join(f"{f.name}={getattr(self, f.name)!r}" for f in fields(self)) + ")"
        return text if len(text) < 160 else text[:157] + "..."


def _grid_of(space):
    """The grid space underlying ``space`` (itself or the ambient of a subspace)."""
    g = space
    while getattr(g, "kind", None) == "subspace":
        g = g.ambient
    if not hasattr(g, "_vnorm"):
        raise ConfigError("endpoint", f"periodic rays need a grid-type space, got {space.kind}")
    return g


@_endpoint("periodic")
class PeriodicRay(Endpoint):
    """An explicit prefix followed by a periodic displacement rule.

    ``phi(i) = prefix[i]`` for ``i < len(prefix)``; afterwards the walk continues
    from the last prefix point (the basepoint when the prefix is empty) adding
    ``steps[0], steps[1], ...`` cyclically.
    """
    prefix: tuple
    steps: tuple
    start: tuple = None

    def __post_init__(self):
        if not self.steps:
            raise ConfigError("steps", "a periodic ray needs at least one step")
        dims = {len(s) for s in self.steps}
        if len(dims) != 1:
            raise ConfigError("steps", "all steps must have the same dimension")

    def _origin(self):
        if self.prefix:
            return self.prefix[-1]
        if self.start is not None:
            return self.start
        return (0,) * len(self.steps[0])

    @property
    def _offset(self):
        return max(len(self.prefix) - 1, 0)

    def point(self, i):
        if i < 0:
            raise DomainError("endpoint index must be nonnegative")
        if i < len(self.prefix):
            return self.prefix[i]
        j = i - self._offset
        P = len(self.steps)
        q, r = divmod(j, P)
        base = self._origin()
        disp = [q * sum(s[d] for s in self.steps) + sum(s[d] for s in self.steps[:r])
                for d in range(len(base))]
        return tuple(int(b + v) for b, v in zip(base, disp))

    def period_displacement(self):
        return tuple(sum(s[d] for s in self.steps) for d in range(len(self.steps[0])))

    def index_bound(self, space, radius):
        grid = _grid_of(space)
        v = grid._vnorm(self.period_displacement())
        P = len(self.steps)
        if v == 0:
            n = len(self.prefix) + P * (SCAN_FACTOR * (radius + 1))
            return n, False
        base = self._origin()
        partial = 0
        acc = [0] * len(base)
        for s in self.steps:
            acc = [a + b for a, b in zip(acc, s)]
            partial = max(partial, grid._vnorm(tuple(acc)))
        # |phi(off + qP + r)| >= q|v| - |base| - max partial (the norm is homogeneous)
        q = (radius + grid._vnorm(base) + partial) // v + 1
        return max(len(self.prefix), self._offset + P * q), True

    def descriptor(self, space):
        d = {"kind": "periodic", "prefix": [list(p) for p in self.prefix], "steps": [list(s) for s in self.steps]}
        if self.start is not None:
            d["start"] = list(self.start)
        return d


def direction_ray(direction, start=None):
    """The ray ``start + i * direction``."""
    return PeriodicRay((), (tuple(int(c) for c in direction),), None if start is None else tuple(start))


@_endpoint("word")
class WordRay(Endpoint):
    """Tree ray through the prefixes of ``prefix + period + period + ...``."""
    prefix: tuple
    period: tuple

    def __post_init__(self):
        if not self.period:
            raise ConfigError("period", "a word ray needs a nonempty period")

    def letter(self, k):
        if k < len(self.prefix):
            return self.prefix[k]
        return self.period[(k - len(self.prefix)) % len(self.period)]

    def point(self, i):
        if i < 0:
            raise DomainError("endpoint index must be nonnegative")
        return tuple(self.letter(k) for k in range(i))

    def index_bound(self, space, radius):
        return int(radius) + 1, True

    def descriptor(self, space):
        return {"kind": "word", "prefix": list(self.prefix), "period": list(self.period)}


@_endpoint("tagged")
class Tagged(Endpoint):
    """A ray of one side of a coproduct, tagged with that side."""
    side: int
    inner: Endpoint

    def point(self, i):
        return (self.side, self.inner.point(i))

    def index_bound(self, space, radius):
        return self.inner.index_bound(space.side_space(self.side), radius)

    def descriptor(self, space):
        return {"kind": "tagged", "side": self.side, "inner": self.inner.descriptor(space.side_space(self.side))}


@_endpoint("pushforward")
class Pushforward(Endpoint):
    """``f o phi`` for a coarse map ``f``."""
    map: object
    inner: Endpoint

    def point(self, i):
        return self.map.apply(self.inner.point(i))

    def index_bound(self, space, radius):
        r = self.map.preimage_radius(int(radius))
        if r is not None:
            return self.inner.index_bound(self.map.source, r)
        n, _ = self.inner.index_bound(self.map.source, SCAN_FACTOR * (int(radius) + 1))
        return n, False

    def descriptor(self, space):
        return {"kind": "pushforward", "map": self.map.to_json(),
                "inner": self.inner.descriptor(self.map.source)}


@_endpoint("path")
class PathRay(Endpoint):
    """A finite explicit path; it is a ray only up to the norm of its far end.

    Indices past the end repeat the last point, so the index bound is proven only
    for radii below the norm of that point.
    """
    path: tuple

    def __post_init__(self):
        if not self.path:
            raise ConfigError("path", "must be nonempty")

    def point(self, i):
        if i < 0:
            raise DomainError("endpoint index must be nonnegative")
        return self.path[min(i, len(self.path) - 1)]

    def index_bound(self, space, radius):
        norms = [space.norm(p) for p in self.path]
        if norms[-1] <= radius:
            return len(self.path), False
        last = max((i for i, r in enumerate(norms) if r <= radius), default=-1)
        return last + 1, True

    def descriptor(self, space):
        return {"kind": "path", "path": [space.encode_point(p) for p in self.path]}


@_endpoint("restricted")
class Restricted(Endpoint):
    """``phi`` pushed into ``keep & allowed`` by substituting nearby points of ``other``.

    ``phi(i)`` is kept when it lies in ``keep``; otherwise it becomes the first
    ``other(j)`` in ``allowed`` within distance ``bound`` of it, and ``fallback``
    when there is none.
    """
    base: Endpoint
    other: Endpoint
    keep: object
    allowed: object
    bound: int
    fallback: tuple
    space: object

    def _choose(self, i):
        from . import subsets as ss
        sp = self.space
        p = self.base.point(i)
        if ss.contains(sp, self.keep, p):
            return p, "kept"
        r = sp.norm(p)
        lo = max(r - self.bound, 0)
        n, _ = self.other.index_bound(sp, r + self.bound)
        for j in range(n):
            q = self.other.point(j)
            if sp.norm(q) < lo:
                continue
            if sp.distance(p, q) <= self.bound and ss.contains(sp, self.allowed, q):
                return q, j
        return self.fallback, "fallback"

    def decision(self, i):
        memo = self.__dict__.setdefault("_memo", {})
        hit = memo.get(i)
        if hit is None:
            hit = self._choose(i)
            memo[i] = hit
        return hit

    def point(self, i):
        if i < 0:
            raise DomainError("endpoint index must be nonnegative")
        return self.decision(i)[0]

    def index_bound(self, space, radius):
        n, cert = self.base.index_bound(space, int(radius) + self.bound)
        return n, cert

    def descriptor(self, space):
        from . import subsets as ss
        return {"kind": "restricted", "base": self.base.descriptor(space), "other": self.other.descriptor(space),
                "keep": ss.to_json(self.keep, space), "allowed": ss.to_json(self.allowed, space),
                "bound": self.bound, "fallback": space.encode_point(self.fallback)}


def _get(obj, name):
    if name not in obj:
        raise ConfigError(name, f"missing in {obj.get('kind')!r} endpoint")
    return obj[name]


def endpoint_from_json(obj, space, maps=None) -> Endpoint:
    """Parse an endpoint over ``space``."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError("kind", "endpoint must be an object with a 'kind'")
    k = obj["kind"]
    if k == "periodic":
        start = obj.get("start")
        return PeriodicRay(tuple(tuple(int(c) for c in p) for p in obj.get("prefix", [])),
                           tuple(tuple(int(c) for c in s) for s in _get(obj, "steps")),
                           None if start is None else tuple(int(c) for c in start))
    if k == "direction":
        return direction_ray(_get(obj, "direction"), obj.get("start"))
    if k == "word":
        return WordRay(tuple(int(a) for a in obj.get("prefix", [])), tuple(int(a) for a in _get(obj, "period")))
    if k == "tagged":
        side = int(_get(obj, "side"))
        if space.kind != "coproduct":
            raise ConfigError("tagged", "only defined on coproduct spaces")
        return Tagged(side, endpoint_from_json(_get(obj, "inner"), space.side_space(side), maps))
    if k == "pushforward":
        from .maps import map_from_json
        f = map_from_json(_get(obj, "map"))
        return Pushforward(f, endpoint_from_json(_get(obj, "inner"), f.source, maps))
    if k == "path":
        return PathRay(tuple(space.decode_point(p) for p in _get(obj, "path")))
    if k == "restricted":
        from . import subsets as ss
        return Restricted(endpoint_from_json(_get(obj, "base"), space, maps),
                          endpoint_from_json(_get(obj, "other"), space, maps),
                          ss.from_json(_get(obj, "keep"), space, maps),
                          ss.from_json(_get(obj, "allowed"), space, maps),
                          int(_get(obj, "bound")), space.decode_point(_get(obj, "fallback")), space)
    raise ConfigError("kind", f"unknown endpoint kind {k!r}")


def load_endpoints(obj, space):
    """A list of ``(name, endpoint)`` from ``{"endpoints": [{"name": ..., ...}]}`` or a bare list."""
    items = obj.get("endpoints") if isinstance(obj, dict) else obj
    if not isinstance(items, list) or not items:
        raise ConfigError("endpoints", "expected a nonempty list")
    out = []
    for k, item in enumerate(items):
        name = item.get("name", f"e{k}") if isinstance(item, dict) else f"e{k}"
        body = {a: b for a, b in item.items() if a != "name"}
        out.append((str(name), endpoint_from_json(body, space)))
    return out



def geodesic_ray(space, target):
    """Explicit path along BFS parents from the basepoint to vertex ``target``."""
    if not space.contains(target):
        raise DomainError(f"{target!r} is not a vertex of {space.describe()}")
    parent = {space.basepoint: None}
    frontier = [space.basepoint]
    while frontier and target not in parent:
        nxt = []
        for u in frontier:
            for v, _ in space.neighbors(u):
                if v not in parent:
                    parent[v] = u
                    nxt.append(v)
        frontier = nxt
    path = [target]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return PathRay(tuple(reversed(path)))


def _trend(seq, grid):
    win = grid.trailing(seq)
    if all(v == win[0] for v in win):
        return "stable"
    if all(b > a for a, b in zip(win, win[1:])):
        return "growing"
    return "mixed"


def validate_endpoint(space, phi: Endpoint, grid) -> Verdict:
    """Check that ``phi`` is a coarse map ``Z+ -> X`` on the index ranges ``[0, R]``.

    Uniformity: the step profile ``max_{i < R} d(phi(i), phi(i+1))`` must be
    stable on the trailing window; its value is the step bound ``L``.
    Properness: for each tested norm ``r`` the last index ``i <= R`` with
    ``|phi(i)| <= r`` must settle; it fails when it tracks ``R`` and keeps growing.
    """
    radii = list(grid.radii)
    top = radii[-1]
    try:
        pts = [phi.point(i) for i in range(top + 1)]
        for p in pts:
            space.check_point(p)
    except DomainError as exc:
        return Verdict(FAILS, {"failed": "generator", "reason": str(exc)})
    steps = [space.distance(pts[i], pts[i + 1]) for i in range(top)]
    norms = [space.norm(p) for p in pts]
    profile = [max(steps[:R]) if R else 0 for R in radii]
    uniform = _trend(profile, grid)
    m = len(radii) - 1
    tested = [grid.tau(radii[k]) for k in range(max(m - grid.window + 2, 1))]
    table, escaping, unresolved = [], [], []
    for r in tested:
        row = [max((i for i in range(R + 1) if norms[i] <= r), default=-1) for R in radii]
        table.append({"r": r, "last_index": row})
        win = grid.trailing(row)
        if all(v == win[0] for v in win):
            continue
        if all(v == R for v, R in zip(win, grid.trailing(radii))):
            escaping.append(r)
        else:
            unresolved.append(r)
    witness = {"L": profile[-1], "step_profile": profile, "properness": table}
    if uniform == "growing":
        k = max(range(top), key=lambda i: (steps[i], -i))
        witness["pair"] = [space.encode_point(pts[k]), space.encode_point(pts[k + 1])]
        return Verdict(FAILS, dict(witness, failed="coarsely uniform"))
    if escaping:
        return Verdict(FAILS, dict(witness, failed="coarsely proper", escaping_r=escaping[0]))
    if uniform == "stable" and tested[0] not in unresolved:
        witness["unresolved_r"] = unresolved
        return Verdict(HOLDS, witness)
    return Verdict(INCONCLUSIVE, witness)
