"""Topological ends by ball-complement components, and the comparison with E(X)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csgraph

from . import subsets as ss
from .covers import CoarseCover
from .endpoints import PeriodicRay, validate_endpoint
from .ends import dedupe_endpoints, in_u_neighborhood
from .errors import ConfigError, PreconditionError
from .grid import TruncationGrid
from .verdict import FAILS, HOLDS, IN, INCONCLUSIVE, Verdict


@dataclass
class ComponentCount:
    radius: int
    horizon: int
    count: int
    labels: list
    sizes: list

    def to_json(self):
        return {"R": self.radius, "horizon": self.horizon, "count": self.count,
                "labels": self.labels, "sizes": self.sizes}


def component_count(space, R: int, horizon: int = None) -> ComponentCount:
    """Components of ``{|x| >= R}`` inside ``ball(horizon)`` reaching the horizon sphere.

    A component counts when it holds a point of norm above ``horizon - max_step``
    (nothing beyond that can be reached from it otherwise).  Each component is
    labelled by its least point in ``(norm, point)`` order.
    """
    H = space.horizon if horizon is None else int(horizon)
    step = space.max_step
    if H < R + 2 * step:
        raise ConfigError("horizon", f"horizon {H} must be at least R + 2 * max_step = {R + 2 * step}")
    t = space.truncation(H)
    idx = np.flatnonzero(t.norms >= R)
    sub = t.graph()[idx][:, idx]
    n, labels = csgraph.connected_components(sub, directed=False)
    rim = t.norms[idx] > H - step
    reaching = np.unique(labels[rim])
    out = []
    for c in reaching:
        members = idx[labels == c]
        out.append((int(members[0]), int(members.size)))
    out.sort()
    return ComponentCount(int(R), H, len(out), [space.encode_point(t.points[i]) for i, _ in out],
                          [s for _, s in out])


def stable_component_count(space, R: int, grid: TruncationGrid) -> Verdict:
    """Component counts at ``R`` for shrinking horizons; holds when the labels agree."""
    H = space.horizon
    step = space.max_step
    cands = sorted({H - k * (H - R - 2 * step) // (2 * grid.window) for k in range(grid.window)})
    cands = [h for h in cands if h >= R + 2 * step]
    runs = [component_count(space, R, h) for h in cands]
    witness = {"R": int(R), "horizons": cands, "counts": [r.count for r in runs], "labels": runs[-1].labels}
    if all(r.labels == runs[-1].labels for r in runs):
        return Verdict(HOLDS, dict(witness, count=runs[-1].count))
    return Verdict(INCONCLUSIVE, witness)


def freudenthal_count(space, grid: TruncationGrid, radii=None) -> Verdict:
    """The number of ends: stable counts agreeing over the trailing radii."""
    step = space.max_step
    radii = [R for R in (radii or grid.radii) if R + 2 * step <= space.horizon]
    if not radii:
        raise ConfigError("radii", "no radius fits inside the horizon")
    rows = [stable_component_count(space, R, grid) for R in radii]
    counts = [r.witness["counts"][-1] for r in rows]
    win = list(range(max(0, len(radii) - grid.window), len(radii)))
    witness = {"radii": radii, "counts": counts}
    if all(rows[i].outcome == HOLDS for i in win) and len({counts[i] for i in win}) == 1:
        return Verdict(HOLDS, dict(witness, count=counts[-1], R=radii[-1], labels=rows[-1].witness["labels"]))
    return Verdict(INCONCLUSIVE, witness)


def discretize_ray(space, path, grid: TruncationGrid = None) -> PeriodicRay:
    """Unit-step resampling of a path of adjacent points, continued along its last step.

    Sample ``t_0 = 0`` and ``t_i`` the first later time at distance exactly one
    from the previous sample; repeated points (stutter) are skipped this way.
    """
    pts = [tuple(p) for p in path]
    if len(pts) < 2:
        raise ConfigError("path", "needs at least two points")
    if not hasattr(space, "_vnorm") and getattr(space, "kind", None) != "subspace":
        raise ConfigError("path", "discretization is implemented for grid-type spaces")
    for p in pts:
        space.check_point(p)
    for a, b in zip(pts, pts[1:]):
        if space.distance(a, b) > 1:
            raise ConfigError("path", f"consecutive points {a} and {b} are not adjacent")
    norms = [space.norm(p) for p in pts]
    if norms[-1] == 0 or norms[-1] < max(norms):
        raise PreconditionError("path does not escape: its last point is not its farthest")
    samples = [pts[0]]
    for p in pts[1:]:
        if space.distance(samples[-1], p) == 1:
            samples.append(p)
    if len(samples) < 2:
        raise PreconditionError("path never leaves its starting point")
    last = tuple(b - a for a, b in zip(samples[-2], samples[-1]))
    ray = PeriodicRay(tuple(samples), (last,))
    if grid is not None:
        v = validate_endpoint(space, ray, grid)
        if v.outcome != HOLDS:
            raise PreconditionError(f"resampled path does not validate ({v.outcome})", v)
    return ray


def hausdorff_to_path(space, ray, path):
    """Hausdorff distance between the samples of ``ray`` on the path and the path."""
    pts = [tuple(p) for p in path]
    samples = [ray.point(i) for i in range(len(ray.prefix))]
    fwd = max(min(space.distance(p, q) for q in samples) for p in pts)
    bwd = max(min(space.distance(q, p) for p in pts) for q in samples)
    return max(fwd, bwd)


def freudenthal_covers(space, R: int, horizon: int = None):
    """One cover ``{C, X - C}`` per unbounded component ``C`` of ``{|x| >= R}``."""
    cc = component_count(space, R, horizon)
    out = []
    for anchor in cc.labels:
        C = ss.BallComponent(int(R), space.decode_point(anchor))
        out.append(CoarseCover((C, ss.complement(C)), labels=(f"comp{anchor}", f"rest{anchor}")))
    return out


def _closure(m, related):
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in related:
        parent[find(b)] = find(a)
    return [find(i) for i in range(m)]


def ends_quotient(space, endpoints, covers, grid: TruncationGrid) -> dict:
    """Classes of endpoints chained by the relation of every cover in the family.

    For each cover the relation is closed under chains; two endpoints share a
    class when they are chained under every cover.  Inconclusive entries are not
    used as links and are reported.
    """
    reps, members, _, unresolved = dedupe_endpoints(space, endpoints, grid)
    eps = [endpoints[k][1] for k in reps]
    names = [endpoints[k][0] for k in reps]
    m = len(eps)
    keys = [[] for _ in range(m)]
    undecided = []
    for ci, U in enumerate(covers):
        links = []
        for a in range(m):
            for b in range(a + 1, m):
                o = in_u_neighborhood(space, eps[a], eps[b], U, grid).outcome
                if o == IN:
                    links.append((a, b))
                elif o == INCONCLUSIVE:
                    undecided.append({"cover": ci, "p": names[a], "q": names[b]})
        roots = _closure(m, links)
        for a in range(m):
            keys[a].append(roots[a])
    groups = {}
    for a in range(m):
        groups.setdefault(tuple(keys[a]), []).append(a)
    classes = sorted(sorted(names[a] for a in g) for g in groups.values())
    return {"classes": classes, "count": len(classes), "members": members,
            "undecided": undecided, "unresolved_duplicates": unresolved,
            "decisive": not undecided and not unresolved}


def _tail_component(space, phi, R, horizon):
    """Label of the component of ``{|x| >= R}`` holding the tail of ``phi``."""
    t = space.truncation(horizon)
    n, _ = phi.index_bound(space, R)
    hit = None
    for i in range(n, n + 4 * horizon):
        p = phi.point(i)
        if space.norm(p) <= horizon - space.max_step:
            hit = p
        if space.norm(p) > horizon - space.max_step:
            break
    if hit is None or space.norm(hit) < R:
        return None
    idx = np.flatnonzero(t.norms >= R)
    sub = t.graph()[idx][:, idx]
    _, labels = csgraph.connected_components(sub, directed=False)
    pos = np.searchsorted(idx, t.index[hit])
    first = idx[labels == labels[pos]][0]
    return space.encode_point(t.points[first])


def compare_ends(space, endpoints, covers, grid: TruncationGrid, radii=None) -> Verdict:
    """The quotient of the endpoint sample against the number of topological ends.

    Holds when the class count equals the stabilized component count and the
    classes land in pairwise distinct components.
    """
    fc = freudenthal_count(space, grid, radii)
    q = ends_quotient(space, endpoints, covers, grid)
    witness = {"freudenthal": fc.witness.get("count"), "quotient": q["count"], "classes": q["classes"],
               "freudenthal_verdict": fc.outcome, "quotient_decisive": q["decisive"]}
    if fc.outcome != HOLDS:
        return Verdict(INCONCLUSIVE, witness)
    R = fc.witness["R"]
    lookup = dict(endpoints)
    labels, mixed = [], []
    for cls in q["classes"]:
        labs = {str(_tail_component(space, lookup[name], R, space.horizon)) for name in cls}
        labels.append(sorted(labs))
        if len(labs) > 1:
            mixed.append(cls)
    witness["component_labels"] = labels
    flat = [tuple(x) for x in labels]
    injective = len(set(flat)) == len(flat) and not mixed
    match = fc.witness["count"] == q["count"] and injective
    witness["match"] = match
    if match:
        return Verdict(HOLDS, witness)
    if not q["decisive"]:
        return Verdict(INCONCLUSIVE, witness)
    return Verdict(FAILS, dict(witness, offending=mixed or q["classes"]))
