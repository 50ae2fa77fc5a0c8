"""Bruhat-Tits tree of PGL_2(K), K = Q_p(w).

A vertex is the lattice class of [[p^m, a], [0, 1]] with a taken mod p^m.  The
tree is never stored; vertices are values and every algorithm works on demand.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import PrecisionExhausted
from .padic import ExtContext, ExtScalar, pair_inv, pair_mul, vp_pair
from .pgl2 import BoundaryPoint, ProjMatrix, canonicalize


@dataclass(frozen=True, order=True)
class Vertex:
    """Vertex (m; a) with a = (x + w*y) * p**-s reduced mod p**m.

    The integer form is canonical: 0 <= x, y < p**(m+s) and s is minimal, so
    dataclass equality is vertex equality.
    """

    m: int
    s: int
    x: int
    y: int

    def center(self, ctx: ExtContext) -> ExtScalar:
        return ExtScalar.from_scaled(ctx, self.x, self.y, self.s, precision=None)

    def is_real(self) -> bool:
        """Center lies in Q_p (mod p^m): the vertex belongs to T_H."""
        return self.y == 0


def make_vertex(m: int, x: int, y: int, s: int, p: int) -> Vertex:
    """Normalize the class of [[p^m, (x + w*y)/p^s], [0, 1]]."""
    if m + s <= 0:
        return Vertex(m, 0, 0, 0)
    mod = p ** (m + s)
    x %= mod
    y %= mod
    while s > 0 and x % p == 0 and y % p == 0:
        x //= p
        y //= p
        s -= 1
    if x == 0 and y == 0:
        s = 0
    return Vertex(m, s, x, y)


def origin() -> Vertex:
    return Vertex(0, 0, 0, 0)


def ref_vertex(j: int) -> Vertex:
    """v*_j, the class of diag(p^j, 1)."""
    return Vertex(j, 0, 0, 0)


def vertex_from_center(m: int, a: ExtScalar) -> Vertex:
    p = a.p
    if a.is_zero() or a.valuation >= m:
        if a.absprec is not None and a.absprec < m:
            raise PrecisionExhausted("center not known to the vertex level")
        return Vertex(m, 0, 0, 0)
    if a.absprec is not None and a.absprec < m:
        raise PrecisionExhausted("center not known to the vertex level")
    nx, ny, k = a.to_scaled(m)
    return make_vertex(m, nx, ny, k, p)


def lift(v: Vertex, ctx: ExtContext) -> ProjMatrix:
    return canonicalize([[ctx.elem(Fraction(ctx.p) ** v.m), v.center(ctx)], [ctx.zero(), ctx.one()]])


# --------------------------------------------------------------------------
# metric and neighbors
# --------------------------------------------------------------------------


def _center_gap(v: Vertex, w: Vertex, p: int, cap: int) -> int:
    """min(cap, valuation of center(v) - center(w))."""
    s = max(v.s, w.s)
    dx = v.x * p ** (s - v.s) - w.x * p ** (s - w.s)
    dy = v.y * p ** (s - v.s) - w.y * p ** (s - w.s)
    if dx == 0 and dy == 0:
        return cap
    return min(cap, vp_pair(dx, dy, p) - s)


def distance(v: Vertex, w: Vertex, p: int) -> int:
    c = _center_gap(v, w, p, min(v.m, w.m))
    return v.m + w.m - 2 * c


def parent(v: Vertex, p: int) -> Vertex:
    return make_vertex(v.m - 1, v.x, v.y, v.s, p)


def child(v: Vertex, tx: int, ty: int, p: int) -> Vertex:
    """(m+1; a + t*p^m) for the residue t = tx + w*ty."""
    s = v.s
    if v.m + s < 0:
        s = -v.m
    scale = p ** (v.m + s)
    return make_vertex(v.m + 1, v.x * p ** (s - v.s) + tx * scale, v.y * p ** (s - v.s) + ty * scale, s, p)


def neighbors(v: Vertex, p: int, with_flags: bool = False):
    """Parent first, then the p^2 children in residue order (x outer, y inner).

    With ``with_flags`` each entry is (vertex, q_direction) where q_direction
    marks the parent and the children with t in F_p.
    """
    out = [(parent(v, p), True)]
    for tx in range(p):
        for ty in range(p):
            out.append((child(v, tx, ty, p), ty == 0))
    return out if with_flags else [w for w, _ in out]


def step_toward(v: Vertex, w: Vertex, p: int) -> Vertex:
    """The neighbor of v on the geodesic [v, w] (v != w)."""
    c = _center_gap(v, w, p, min(v.m, w.m))
    if c < v.m:
        return parent(v, p)
    return make_vertex(v.m + 1, w.x * p ** (max(v.s, w.s) - w.s), w.y * p ** (max(v.s, w.s) - w.s), max(v.s, w.s), p)


def geodesic(v: Vertex, w: Vertex, p: int) -> "GeodesicSegment":
    path = [v]
    while path[-1] != w:
        path.append(step_toward(path[-1], w, p))
    return GeodesicSegment(tuple(path))


def ball(v: Vertex, r: int, p: int) -> list[Vertex]:
    seen = {v}
    frontier = [v]
    for _ in range(r):
        nxt = []
        for u in frontier:
            for w in neighbors(u, p):
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return sorted(seen)


def bfs_distance(v: Vertex, w: Vertex, p: int, limit: int) -> int | None:
    """Breadth-first search distance (oracle for the closed formula)."""
    if v == w:
        return 0
    seen = {v}
    queue = deque([(v, 0)])
    while queue:
        u, d = queue.popleft()
        if d == limit:
            continue
        for n in neighbors(u, p):
            if n == w:
                return d + 1
            if n not in seen:
                seen.add(n)
                queue.append((n, d + 1))
    return None


@dataclass(frozen=True)
class GeodesicSegment:
    vertices: tuple

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def __getitem__(self, i):
        return self.vertices[i]

    def is_geodesic(self, p: int) -> bool:
        vs = self.vertices
        if any(distance(a, b, p) != 1 for a, b in zip(vs, vs[1:])):
            return False
        return distance(vs[0], vs[-1], p) == len(vs) - 1


# --------------------------------------------------------------------------
# group action
# --------------------------------------------------------------------------


class IntMat:
    """Integral representative of a projective class, known modulo p**P.

    Entries are (x, y) pairs for x + w*y; ``vdet`` is the valuation of the
    determinant.  Products stay integral and shed common factors of p, losing
    the same number of digits.
    """

    __slots__ = ("p", "c", "P", "e", "vdet")

    def __init__(self, p: int, c: int, P: int, entries, vdet: int):
        self.p, self.c, self.P, self.e, self.vdet = p, c, P, tuple(entries), vdet

    @classmethod
    def of(cls, g: ProjMatrix) -> "IntMat":
        return g.int_model()

    def __matmul__(self, other: "IntMat") -> "IntMat":
        p, c = self.p, self.c
        P = min(self.P, other.P)
        mod = p**P
        (a, b, cc, d), (e, f, g, h) = self.e, other.e

        def mac(u, v, w, z):
            x1, y1 = pair_mul(u[0], u[1], v[0], v[1], c, mod)
            x2, y2 = pair_mul(w[0], w[1], z[0], z[1], c, mod)
            return (x1 + x2) % mod, (y1 + y2) % mod

        out = [mac(a, e, b, g), mac(a, f, b, h), mac(cc, e, d, g), mac(cc, f, d, h)]
        k = min(_val(x, y, p, P) for x, y in out)
        if k >= P - 4:
            raise PrecisionExhausted("matrix product lost all digits")
        if k:
            pk = p**k
            out = [(x // pk, y // pk) for x, y in out]
        return IntMat(p, c, P - k, out, self.vdet + other.vdet - 2 * k)

    def act(self, v: Vertex) -> Vertex:
        """self.v = class of self * [[p^m, a], [0, 1]].

        Column reduction: the center of the image is top/bottom of the column
        whose bottom entry has least valuation, taken mod p^m' where
        m' = v(det) - 2 * (that valuation).
        """
        p, c, P = self.p, self.c, self.P
        (a11x, a11y), (a12x, a12y), (a21x, a21y), (a22x, a22y) = self.e
        mod = p**P
        r = max(v.s, -v.m)
        X = v.x * p ** (r - v.s)
        Y = v.y * p ** (r - v.s)
        pm = p ** (v.m + r)
        pr = p**r
        # columns of g * [[p^(m+r), X], [0, p^r]]
        c1 = ((a11x * pm) % mod, (a11y * pm) % mod, (a21x * pm) % mod, (a21y * pm) % mod)
        t2x, t2y = pair_mul(a11x, a11y, X, Y, c, mod)
        b2x, b2y = pair_mul(a21x, a21y, X, Y, c, mod)
        c2 = ((t2x + a12x * pr) % mod, (t2y + a12y * pr) % mod, (b2x + a22x * pr) % mod, (b2y + a22y * pr) % mod)
        total = self.vdet + v.m + 2 * r
        v1 = _val(c1[2], c1[3], p, P)
        v2 = _val(c2[2], c2[3], p, P)
        col, t = (c2, v2) if v2 <= v1 else (c1, v1)
        if t >= P:
            raise PrecisionExhausted("vertex action lost all digits")
        m_new = total - 2 * t
        if m_new + t > P - t:
            raise PrecisionExhausted("vertex action needs more digits than available")
        if m_new + t <= 0:
            return Vertex(m_new, 0, 0, 0)
        pt = p**t
        mod2 = p ** (P - t)
        ux, uy = pair_inv(col[2] // pt, col[3] // pt, c, mod2)
        zx, zy = pair_mul(col[0], col[1], ux, uy, c, mod2)
        return make_vertex(m_new, zx, zy, t, p)


def act(g, v: Vertex) -> Vertex:
    """g.v for a ProjMatrix or IntMat g."""
    if isinstance(g, IntMat):
        return g.act(v)
    return g.int_model().act(v)


def _val(x: int, y: int, p: int, cap: int) -> int:
    if x == 0 and y == 0:
        return cap
    return min(cap, vp_pair(x, y, p))


def vertex_of_matrix(g: ProjMatrix) -> Vertex:
    return act(g, origin())


def in_H_subtree(g: ProjMatrix, v: Vertex, g_inv: ProjMatrix | None = None) -> bool:
    """v lies in g.T_H."""
    w = act(g_inv if g_inv is not None else g.inverse(), v)
    return w.is_real()


def project_to_H_subtree(g: ProjMatrix, v: Vertex, g_inv: ProjMatrix | None = None) -> Vertex:
    """Nearest vertex of g.T_H to v."""
    g_inv = g_inv if g_inv is not None else g.inverse()
    p = g.ctx.p
    w = act(g_inv, v)
    # nearest point of T_H to (m; x + w*y / p^s): climb until the center is real
    while not w.is_real():
        w = parent(w, p)
    return act(g, w)


# --------------------------------------------------------------------------
# rays and half-trees
# --------------------------------------------------------------------------


def point_vertex(x: BoundaryPoint, k: int) -> Vertex:
    """The level-k vertex on the geodesic (inf, x)."""
    if x.is_infinity:
        raise ValueError("no level vertex on (inf, inf)")
    return vertex_from_center(k, x.value)


def ray_to_boundary(v: Vertex, x: BoundaryPoint, depth: int, p: int) -> GeodesicSegment:
    """The first depth+1 vertices of the ray [v, x)."""
    path = [v]
    cur = v
    if x.is_infinity:
        for _ in range(depth):
            cur = parent(cur, p)
            path.append(cur)
        return GeodesicSegment(tuple(path))
    a = x.value
    # level where the ray from v meets the geodesic (inf, x)
    if a.is_zero() and a.absprec is None:
        gap = v.m
    else:
        target = point_vertex(x, v.m) if (a.absprec is None or a.absprec >= v.m) else None
        if target is None:
            raise PrecisionExhausted("boundary point not known to the start level")
        gap = _center_gap(v, target, p, v.m)
    while len(path) <= depth and cur.m > gap:
        cur = parent(cur, p)
        path.append(cur)
    while len(path) <= depth:
        lvl = cur.m + 1
        if a.absprec is not None and a.absprec < lvl:
            raise PrecisionExhausted("ray extends beyond known digits of the boundary point")
        cur = point_vertex(x, lvl)
        path.append(cur)
    return GeodesicSegment(tuple(path))


@dataclass(frozen=True)
class HalfTree:
    """{x : d(x, toward) < d(x, root)} for adjacent root, toward."""

    root: Vertex
    toward: Vertex

    def contains(self, v: Vertex, p: int) -> bool:
        return distance(v, self.toward, p) < distance(v, self.root, p)


def halftree_contains(b: HalfTree, v: Vertex, p: int) -> bool:
    return b.contains(v, p)


def halftrees_disjoint(b1: HalfTree, b2: HalfTree, p: int) -> bool:
    if b1 == b2:
        return False
    return not b1.contains(b2.toward, p) and not b2.contains(b1.toward, p)


def boundary_in_halftree(b: HalfTree, x: BoundaryPoint, p: int) -> bool:
    """x lies in the boundary of the half-tree: the ray from its root toward x
    passes through ``toward``."""
    return ray_to_boundary(b.root, x, 1, p)[1] == b.toward


# --------------------------------------------------------------------------
# boundary metric
# --------------------------------------------------------------------------


def chordal_distance(x: BoundaryPoint, y: BoundaryPoint) -> Fraction:
    """|x - y| / (max(1,|x|) max(1,|y|)); d(x, inf) = 1/max(1,|x|)."""
    if x.is_infinity and y.is_infinity:
        return Fraction(0)
    if x.is_infinity:
        return 1 / max(Fraction(1), y.value.norm_abs())
    if y.is_infinity:
        return 1 / max(Fraction(1), x.value.norm_abs())
    diff = (x.value - y.value).norm_abs()
    return diff / (max(Fraction(1), x.value.norm_abs()) * max(Fraction(1), y.value.norm_abs()))


# --------------------------------------------------------------------------
# text forms
# --------------------------------------------------------------------------


def center_text(v: Vertex, p: int) -> str:
    """Digits of the center grouped by power of p, e.g. '1 + (2+2w)*3'."""
    if v.x == 0 and v.y == 0:
        return "0"
    terms = []
    x, y = v.x, v.y
    e = -v.s
    while x or y:
        dx, dy = x % p, y % p
        x //= p
        y //= p
        if dx or dy:
            if dy == 0:
                coef = str(dx)
            elif dx == 0:
                coef = "w" if dy == 1 else f"{dy}w"
            else:
                coef = f"({dx}+{'w' if dy == 1 else f'{dy}w'})"
            if e == 0:
                terms.append(coef)
            else:
                power = f"{p}" if e == 1 else f"{p}^{e}"
                terms.append(power if coef == "1" else f"{coef}*{power}")
        e += 1
    return " + ".join(terms)


def vertex_literal(v: Vertex, p: int) -> str:
    return f"({v.m}; {center_text(v, p)})"


def parse_vertex(text: str, ctx: ExtContext) -> Vertex:
    from .errors import ConfigError
    from .literals import parse_scalar

    body = text.strip()
    if not (body.startswith("(") and body.endswith(")") and ";" in body):
        raise ConfigError(f"vertex literal must look like '(m; a)', got {text!r}")
    m_text, a_text = body[1:-1].split(";", 1)
    try:
        m = int(m_text)
    except ValueError:
        raise ConfigError(f"bad vertex level in {text!r}") from None
    # accept the printed form, where coefficients are juxtaposed: (2+2w)
    a_text = re.sub(r"(\d)\s*w", r"\1*w", a_text.strip())
    return vertex_from_center(m, parse_scalar(a_text, ctx))


def to_dot(vertices: Iterable[Vertex], p: int, name: str = "T", labels: dict | None = None,
           edges: Iterable[tuple] | None = None) -> str:
    """DOT text for a finite vertex set.

    Edges default to all adjacent pairs within the set.  ``labels`` maps a
    vertex to extra annotation text.
    """
    vs = sorted(set(vertices))
    ids = {v: f"v{i}" for i, v in enumerate(vs)}
    lines = [f"graph {name} {{"]
    for v in vs:
        label = vertex_literal(v, p)
        if labels and v in labels:
            label += f"\\n{labels[v]}"
        lines.append(f'  {ids[v]} [label="{label}"];')
    if edges is None:
        edges = [(a, b) for i, a in enumerate(vs) for b in vs[i + 1:] if distance(a, b, p) == 1]
    for e in sorted(edges, key=lambda e: (ids[e[0]], ids[e[1]])):
        a, b = e[0], e[1]
        attr = f' [label="{e[2]}"]' if len(e) > 2 else ""
        lines.append(f"  {ids[a]} -- {ids[b]}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"
