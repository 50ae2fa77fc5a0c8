"""Slow reference computations that share no code path with the library's
closed formulas.  Each works on the raw neighbor structure or on finite
quotient rings."""
from __future__ import annotations

from collections import deque

from padic_circles.bttree import neighbors


def bfs_layers(v, p, radius):
    """Distances from v to every vertex within ``radius`` (plain BFS)."""
    dist = {v: 0}
    queue = deque([v])
    while queue:
        u = queue.popleft()
        if dist[u] == radius:
            continue
        for w in neighbors(u, p):
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def meet_distance(layers, radius, w, p, limit):
    """d(v, w) from v's BFS layers of ``radius``, by a BFS from w that stops at
    the first vertex it shares with them.  Exact when d <= radius + limit."""
    if w in layers:
        return layers[w]
    seen = {w}
    frontier = [w]
    for k in range(1, limit + 1):
        nxt = []
        for u in frontier:
            for x in neighbors(u, p):
                if x in seen:
                    continue
                if x in layers:
                    return k + layers[x]
                seen.add(x)
                nxt.append(x)
        frontier = nxt
    return None


def ball_vertices(center, p, radius):
    return list(bfs_layers(center, p, radius))


def min_displacement(act, g, center, p, radius):
    """min d(v, g.v) over the ball of ``radius`` around ``center``."""
    from padic_circles.bttree import distance

    return min(distance(v, act(g, v), p) for v in ball_vertices(center, p, radius))


def halftree_members(root, toward, ball, p):
    """Members of the half-tree (root, toward) inside ``ball`` by BFS from
    ``toward`` that never re-enters ``root``."""
    inside = set(ball)
    seen = {toward}
    queue = deque([toward])
    while queue:
        u = queue.popleft()
        for w in neighbors(u, p):
            if w == root or w in seen or w not in inside:
                continue
            seen.add(w)
            queue.append(w)
    return seen


def unit_group_mod(p, c, k):
    return (p * p - 1) * p ** (2 * (k - 1))


def dense_by_orbit(x, y, p, c, k=4):
    """Whether <a, 1+p> is all of (O_K / p^k)^x for a = x + w y.

    Modulo 1 + pZ_p, the unit group is mu_{p^2-1} x S^1_p, so this is density
    of <a> in mu x S^1 at level k, decided by literal enumeration.
    """
    mod = p**k

    def mul(a, b):
        return ((a[0] * b[0] + c * a[1] * b[1]) % mod, (a[0] * b[1] + a[1] * b[0]) % mod)

    gens = [(x % mod, y % mod), ((1 + p) % mod, 0)]
    seen = {(1, 0)}
    queue = deque([(1, 0)])
    while queue:
        u = queue.popleft()
        for g in gens:
            w = mul(u, g)
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == unit_group_mod(p, c, k)


def hermite_vertex(M):
    """Vertex of the lattice spanned by the columns of a ProjMatrix, by column
    reduction in ExtScalar arithmetic (no integer fast path)."""
    from padic_circles.bttree import vertex_from_center

    a, b, c, d = M.entries
    if d.is_zero() or (not c.is_zero() and c.valuation < d.valuation):
        a, b, c, d = b, a, d, c
    det = a * d - b * c
    m = det.valuation - 2 * d.valuation
    return vertex_from_center(m, b / d)


def naive_census(circle, group, core, depth):
    """Ray counts of hull(C) from the census base, every vertex reduced to F
    from scratch.  Returns counts for levels 0..depth."""
    from padic_circles.orbits import real_neighbors

    p = group.p
    base = circle.project(core.vertices[0])
    tally = [0] * (depth + 1)
    if group.reduce_to_F(base)[0] not in core.vertex_set:
        return tally
    stack = [(circle.to_frame(base), None, 0)]
    while stack:
        h, prev, level = stack.pop()
        tally[level] += 1
        if level == depth:
            continue
        for n in real_neighbors(h, p):
            if n != prev and group.reduce_to_F(circle.from_frame(n))[0] in core.vertex_set:
                stack.append((n, h, level + 1))
    return tally
