"""Slow reference implementations used to cross-check the package.

Everything here walks points with plain Python (BFS over ``neighbors`` and
the metric formula) and never touches the sparse-graph code paths.
"""
from collections import deque


def bfs_ball(space, R):
    """``{point: distance}`` for the ball of radius ``R`` by breadth-first search."""
    start = space.basepoint
    seen = {start: 0}
    queue = deque([start])
    while queue:
        p = queue.popleft()
        d = seen[p]
        if d == R:
            continue
        for q, w in space.neighbors(p):
            if w != 1:
                continue
            if q not in seen:
                seen[q] = d + 1
                queue.append(q)
    return seen


def weighted_ball(space, R):
    """Dijkstra by hand for spaces with weighted edges (coproduct gaps)."""
    import heapq
    start = space.basepoint
    best = {start: 0}
    heap = [(0, start)]
    while heap:
        d, p = heapq.heappop(heap)
        if d > best.get(p, float("inf")):
            continue
        for q, w in space.neighbors(p):
            nd = d + w
            if nd <= R and nd < best.get(q, float("inf")):
                best[q] = nd
                heapq.heappush(heap, (nd, q))
    return best


def brute_chi(space, ball, in_a, in_b, R):
    """``min d(a, b)`` over ``a in A``, ``b in B`` of norm above ``R`` inside ``ball``; None if empty."""
    A = [p for p, n in ball.items() if n > R and in_a(p)]
    B = [p for p, n in ball.items() if n > R and in_b(p)]
    if not A or not B:
        return None
    return min(space.distance(a, b) for a in A for b in B)


def brute_components(space, R, H):
    """Components of ``{R <= |x| <= H}`` that reach norm above ``H - max_step``."""
    ball = weighted_ball(space, H)
    keep = {p for p, n in ball.items() if n >= R}
    step = space.max_step
    seen, count = set(), 0
    for p in sorted(keep, key=lambda q: (ball[q], q)):
        if p in seen:
            continue
        comp, queue = {p}, deque([p])
        while queue:
            x = queue.popleft()
            for y, _ in space.neighbors(x):
                if y in keep and y not in comp:
                    comp.add(y)
                    queue.append(y)
        seen |= comp
        if any(ball[q] > H - step for q in comp):
            count += 1
    return count


def brute_exceptional_norm(space, ball, parts, n):
    """Largest norm appearing in a pair ``d <= n`` that no single part contains (-1 if none)."""
    pts = list(ball)
    worst = -1
    for i, x in enumerate(pts):
        px = {k for k, U in enumerate(parts) if U(x)}
        for y in pts[i:]:
            if space.distance(x, y) > n:
                continue
            if not px & {k for k, U in enumerate(parts) if U(y)}:
                worst = max(worst, ball[x], ball[y])
    return worst
