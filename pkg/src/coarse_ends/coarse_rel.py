"""Closeness of subsets through chi-profiles, plus boundedness and coentourage checks.

For subsets ``A, B`` the chi-profile samples ``i -> d(A - ball(R_i), B - ball(R_i))``
on the grid radii.  Everything is computed on the working truncation of the
space: the ball of radius ``W = space.horizon`` (which must be at least the
largest grid radius).  An entry ``v`` is *certified* when ``R_i + v <= W``, i.e.
a realizing pair starting just outside ``ball(R_i)`` fits in the truncation.

Decision rule shared by every profile-based check (:func:`decide_profile`):

* apart: every entry of the trailing window (the last ``w`` entries) is the
  infinity sentinel or exceeds ``tau(R_i)``;
* close: the raw window has no sentinel, at least ``w`` entries are certified,
  and the last ``w`` certified entries all equal the maximum over all certified
  entries (the profile has plateaued); the bound is that maximum;
* when both or neither rule fires the answer is inconclusive.
"""
from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from . import subsets as ss
from .errors import ConfigError
from .grid import TruncationGrid
from .verdict import APART, CLOSE, FAILS, HOLDS, INCONCLUSIVE, Verdict

_CACHE_SIZE = 128
_cache_lock = threading.Lock()


def working_truncation(space, grid: TruncationGrid):
    if grid.r_max > space.horizon:
        raise ConfigError("grid", f"largest radius {grid.r_max} exceeds the horizon {space.horizon} "
                                  f"of {space.describe()}")
    return space.truncation()


def _lru(t):
    c = t.__dict__.get("_dist_lru")
    if c is None:
        c = t.__dict__.setdefault("_dist_lru", OrderedDict())
    return c


def distances_to(t, spec, outside=-1):
    """``(dist, source)`` from ``spec`` minus ``ball(outside)`` over the truncation, cached."""
    key = (spec, int(outside))
    cache = _lru(t)
    with _cache_lock:
        hit = cache.get(key)
        if hit is not None:
            cache.move_to_end(key)
            return hit
    m = ss._mask(t, spec)
    if outside >= 0:
        m = m & (t.norms > outside)
    dist, src = t.distances_from(m)
    dist.setflags(write=False)
    src.setflags(write=False)
    with _cache_lock:
        cache[key] = (dist, src)
        while len(cache) > _CACHE_SIZE:
            cache.popitem(last=False)
    return dist, src


@dataclass
class ChiProfile:
    """Samples of ``d(A - ball(R_i), B - ball(R_i))``; ``None`` is the infinity sentinel."""

    radii: tuple
    values: list
    certified: list
    pairs: list = field(default_factory=list)
    horizon: int = 0

    def to_json(self):
        return {"radii": list(self.radii), "values": self.values,
                "certified": self.certified, "pairs": self.pairs, "horizon": self.horizon}


def _encode(space, p):
    return space.encode_point(p)


def chi_profiles(space, A, Bs, grid: TruncationGrid):
    """Chi-profiles of ``A`` against each set in ``Bs`` (one Dijkstra per radius)."""
    t = working_truncation(space, grid)
    W = t.radius
    a_full = ss._mask(t, A)
    b_full = [ss._mask(t, B) for B in Bs]
    out = [ChiProfile(tuple(grid.radii), [], [], [], W) for _ in Bs]
    for R in grid.radii:
        outside = t.norms > R
        a = a_full & outside
        a_any = bool(a.any())
        dist = src = None
        for prof, bf in zip(out, b_full):
            b = bf & outside
            if not a_any or not b.any():
                prof.values.append(None)
                prof.certified.append(False)
                prof.pairs.append(None)
                continue
            both = a & b
            if both.any():
                k = int(np.argmax(both))
                prof.values.append(0)
                prof.certified.append(True)
                prof.pairs.append([_encode(space, t.points[k])] * 2)
                continue
            if dist is None:
                dist, src = distances_to(t, A, R)
            db = np.where(b, dist, np.inf)
            j = int(np.argmin(db))
            if not np.isfinite(db[j]):
                prof.values.append(None)
                prof.certified.append(False)
                prof.pairs.append(None)
                continue
            v = int(db[j])
            prof.values.append(v)
            prof.certified.append(R + v <= W)
            prof.pairs.append([_encode(space, t.points[src[j]]), _encode(space, t.points[j])])
    return out


def chi_profile(space, A, B, grid: TruncationGrid) -> ChiProfile:
    return chi_profiles(space, A, [B], grid)[0]


def decide_profile(values, certified, grid: TruncationGrid):
    """Apply the shared close/apart rule.  Returns ``(outcome, info)``."""
    m = len(values)
    w = grid.window
    win = list(range(max(0, m - w), m))
    taus = [grid.tau(R) for R in grid.radii]
    apart = len(win) == w and all(values[i] is None or values[i] > taus[i] for i in win)
    cert = [i for i in range(m) if certified[i] and values[i] is not None]
    close = False
    bound = None
    cwin = cert[-w:]
    if len(cwin) == w and all(values[i] is not None for i in win):
        bound = max(values[i] for i in cert)
        close = all(values[i] == bound for i in cwin)
    info = {"window": win, "certified_window": cwin, "tau": taus}
    if apart and close:
        info["ambiguous"] = True
        return INCONCLUSIVE, info
    if apart:
        info["apart_indices"] = win
        return APART, info
    if close:
        info["bound"] = bound
        return CLOSE, info
    return INCONCLUSIVE, info


def decide_close(profile: ChiProfile, grid: TruncationGrid) -> Verdict:
    outcome, info = decide_profile(profile.values, profile.certified, grid)
    witness = {"profile": profile.to_json()}
    if outcome == APART:
        witness["indices"] = info["apart_indices"]
        witness["tau"] = [info["tau"][i] for i in info["apart_indices"]]
    elif outcome == CLOSE:
        witness["bound"] = info["bound"]
        witness["pairs"] = [profile.pairs[i] for i in info["certified_window"]]
        witness["indices"] = info["certified_window"]
    elif info.get("ambiguous"):
        witness["reason"] = "plateau above the divergence threshold"
    return Verdict(outcome, witness)


def close_verdict(space, A, B, grid: TruncationGrid) -> Verdict:
    """Chi-profile of ``(A, B)`` followed by :func:`decide_close` (memoized)."""
    return close_verdicts(space, A, [B], grid)[0]


def close_verdicts(space, A, Bs, grid: TruncationGrid):
    """Verdicts of ``A`` against each of ``Bs``; shares the Dijkstra runs for ``A``."""
    t = working_truncation(space, grid)
    memo = t.__dict__.setdefault("_close_memo", {})
    missing = [B for B in dict.fromkeys(Bs) if (A, B, grid) not in memo]
    if missing:
        for B, prof in zip(missing, chi_profiles(space, A, missing, grid)):
            memo[(A, B, grid)] = decide_close(prof, grid)
    return [memo[(A, B, grid)] for B in Bs]


# -- boundedness -------------------------------------------------------------

def _support_verdict(t, support, grid: TruncationGrid, witness=None):
    """Boundedness of a point set (mask over the truncation) on the grid.

    Bounded: the counts inside ``ball(R)`` agree for ``R`` on the trailing window
    and at the truncation radius.  Unbounded: counts strictly grow across the
    window and each window ball holds a member of norm above ``tau(R)``.
    """
    radii = list(grid.radii)
    counts = [int(support[: t.count(R)].sum()) for R in radii]
    total = int(support.sum())
    idx = np.flatnonzero(support)
    witness = dict(witness or {})
    witness["counts"] = counts
    witness["count_at_horizon"] = total
    win = grid.trailing(range(len(radii)))
    wc = [counts[i] for i in win]
    if all(c == total for c in wc):
        far = int(t.norms[idx[-1]]) if idx.size else -1
        witness["max_norm"] = far
        return Verdict(HOLDS, witness)
    growing = all(b > a for a, b in zip(wc, wc[1:]))
    escapes = []
    for i in win:
        n = t.count(radii[i])
        inside = idx[idx < n]
        top = int(t.norms[inside[-1]]) if inside.size else -1
        escapes.append(top)
    if growing and all(e > grid.tau(radii[i]) for e, i in zip(escapes, win)):
        witness["escaping_norms"] = escapes
        witness["escaping_points"] = [t.space.encode_point(t.points[idx[idx < t.count(radii[i])][-1]])
                                      for i in win]
        return Verdict(FAILS, witness)
    return Verdict(INCONCLUSIVE, witness)


def is_bounded(space, A, grid: TruncationGrid) -> Verdict:
    """Holds when ``A`` is bounded at truncation scale, fails when it escapes."""
    t = working_truncation(space, grid)
    return _support_verdict(t, ss._mask(t, A), grid)


def is_coentourage(space, predicate, n: int, grid: TruncationGrid) -> Verdict:
    """Duality check for the single entourage ``E_n``.

    ``predicate(t, I, J)`` gets index arrays into the working truncation and
    returns a boolean array for the ordered pairs ``(points[I], points[J])``.
    The verdict is on the boundedness of the points taking part in a pair that
    satisfies the predicate and has ``d <= n``.
    """
    t = working_truncation(space, grid)
    I, J = t.pairs_within(int(n), len(t))
    hit = np.asarray(predicate(t, I, J), bool) | np.asarray(predicate(t, J, I), bool)
    support = np.zeros(len(t), dtype=bool)
    support[I[hit]] = True
    support[J[hit]] = True
    far = np.argsort(-np.maximum(t.norms[I[hit]], t.norms[J[hit]]), kind="stable")[:3]
    sample = [[space.encode_point(t.points[I[hit][k]]), space.encode_point(t.points[J[hit][k]])] for k in far]
    return _support_verdict(t, support, grid, {"n": int(n), "pairs": int(hit.sum()), "sample_pairs": sample})
