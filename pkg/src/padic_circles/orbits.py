"""Circles g.P^1(Q_p) against the limit set of a Schottky group, at finite depth.

Limit-set membership is never decided.  Non-membership comes with an exit
certificate (a vertex of the hull that leaves S_Gamma); membership is only
"to depth D".  Every report is labeled accordingly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import bttree
from .bttree import Vertex, distance, origin, parent, vertex_literal
from .errors import DegenerateBall, FrontierBudgetExceeded, Inconclusive, PrecisionExhausted
from .padic import ExtContext
from .pgl2 import BoundaryPoint, ProjMatrix, classify, frame_of, mobius, unipotent
from .schottky import CoreGraph, SchottkyGroup, reduced_words, word_inverse, word_text

EVIDENCE_LABEL = "finite-depth evidence, not proof"


# --------------------------------------------------------------------------
# circles
# --------------------------------------------------------------------------


class Circle:
    """The coset gH, stored by a G1 representative, with hull g.T_H."""

    def __init__(self, g: ProjMatrix):
        if g.canonical_class == "G2":
            g = g @ unipotent(1, g.ctx)
        self.rep = g
        self.rep_inv = g.inverse()
        self.frame = frame_of(g)

    @property
    def ctx(self) -> ExtContext:
        return self.rep.ctx

    def contains_vertex(self, v: Vertex) -> bool:
        return bttree.act(self.rep_inv, v).is_real()

    def translate(self, h: ProjMatrix) -> "Circle":
        return Circle(h @ self.rep)

    def same(self, other: "Circle") -> bool:
        return (self.rep_inv @ other.rep).in_H()

    def project(self, v: Vertex) -> Vertex:
        return bttree.project_to_H_subtree(self.rep, v, self.rep_inv)

    def to_frame(self, v: Vertex) -> Vertex:
        return bttree.act(self.rep_inv, v)

    def from_frame(self, h: Vertex) -> Vertex:
        return bttree.act(self.rep, h)

    def describe(self) -> dict:
        from .literals import scalar_literal

        return {
            "rep": [[scalar_literal(self.rep.m11), scalar_literal(self.rep.m12)],
                    [scalar_literal(self.rep.m21), scalar_literal(self.rep.m22)]],
            "frame": [repr(self.frame.x), repr(self.frame.y), repr(self.frame.z)],
        }


def real_neighbors(h: Vertex, p: int) -> list[Vertex]:
    """Neighbors of a T_H vertex inside T_H: parent, then children t = 0..p-1."""
    return [parent(h, p)] + [bttree.child(h, t, 0, p) for t in range(p)]


def _in_S(group: SchottkyGroup, core: CoreGraph, v: Vertex) -> bool:
    return group.reduce_to_F(v)[0] in core.vertex_set


def _exit_cert(group: SchottkyGroup, v: Vertex, note: str) -> dict:
    p = group.p
    red, word = group.reduce_to_F(v)
    return {"kind": "exit", "vertex": vertex_literal(v, p), "reduces_to": vertex_literal(red, p),
            "word": word_text(word, group.names), "note": note}


# --------------------------------------------------------------------------
# RF X membership
# --------------------------------------------------------------------------


@dataclass
class RFResult:
    member: bool
    depth: int
    certificate: dict | None

    def __bool__(self):
        return self.member


def rf_membership(g: ProjMatrix, group: SchottkyGroup, core: CoreGraph, depth: int) -> RFResult:
    """g.0 and g.inf in Lambda to depth D: g.v*_k in S_Gamma for |k| <= D."""
    for k in sorted(range(-depth, depth + 1), key=lambda k: (abs(k), k)):
        v = bttree.act(g, bttree.ref_vertex(k))
        if not _in_S(group, core, v):
            side = "0" if k > 0 else "inf"
            return RFResult(False, depth, _exit_cert(group, v, f"geodesic toward g.{side} leaves S_Gamma at step {abs(k)}"))
    return RFResult(True, depth, None)


# --------------------------------------------------------------------------
# K-thickness
# --------------------------------------------------------------------------


@dataclass
class ThicknessWitness:
    K: int
    depth: int
    shells: dict  # shell l -> t (Fraction) with v_p(t) in [-(K+l), -l)
    misses: list  # shells with no witness (ShellMiss)

    @property
    def complete(self) -> bool:
        return not self.misses


def _descend(group, core, g, h: Vertex, target: int, p: int, budget: list):
    """Extend h = (j; t mod p^j) through Q_p-children inside g^-1 S_Gamma to level target."""
    if h.m >= target:
        return h
    for d in range(p):
        budget[0] -= 1
        if budget[0] < 0:
            return None
        nxt = bttree.child(h, d, 0, p)
        if _in_S(group, core, bttree.act(g, nxt)):
            out = _descend(group, core, g, nxt, target, p, budget)
            if out is not None:
                return out
    return None


def vertex_real_value(h: Vertex, p: int) -> Fraction:
    return Fraction(h.x, p**h.s)


def thickness_sample(g: ProjMatrix, group: SchottkyGroup, core: CoreGraph, K: int,
                     shells=range(-8, 9), depth: int = 10, budget: int = 50_000) -> ThicknessWitness:
    """Greedy digit extension along Q_p-directions in g^-1 S_Gamma, one witness per shell.

    For shell l a witness t has v_p(t) = k in [-(K+l), -l): the branch of g.T_H
    leaving the geodesic (g.0, g.inf) at g.v*_k in direction t, followed
    inside S_Gamma down to level max(D, k+1).
    """
    p = group.p
    found: dict = {}
    misses = []
    for l in shells:
        wit = None
        for k in range(-(K + l), -l):
            for t0 in range(1, p):
                h = bttree.child(bttree.ref_vertex(k), t0, 0, p)
                if not _in_S(group, core, bttree.act(g, h)):
                    continue
                end = _descend(group, core, g, h, max(depth, k + 1), p, [budget])
                if end is not None:
                    wit = vertex_real_value(end, p)
                    break
            if wit is not None:
                break
        if wit is None:
            misses.append(l)
        else:
            found[l] = wit
    return ThicknessWitness(K, depth, found, misses)


# --------------------------------------------------------------------------
# polynomial bound
# --------------------------------------------------------------------------


def _vq(q: Fraction, p: int) -> int | None:
    if q == 0:
        return None
    from .padic import vp_int

    num, den = q.numerator, q.denominator
    return vp_int(num, p) - vp_int(den, p)


def ext_abs(a: Fraction, b: Fraction, p: int) -> Fraction:
    """|a + w b|_p for rationals a, b."""
    vals = [v for v in (_vq(a, p), _vq(b, p)) if v is not None]
    if not vals:
        return Fraction(0)
    return Fraction(p) ** (-min(vals))


@dataclass
class PolyBoundResult:
    holds: bool
    lhs: Fraction  # p^-Kd * max over B_m
    rhs: Fraction  # max over T in B_m
    ratio: Fraction | None  # rhs / max over B_m


def polybound_property(coeffs, T, K: int, m: int, p: int) -> PolyBoundResult:
    """p^-Kd max_{B_m} |f| <= max_{T cap B_m} |f| for B_m = p^-m Z_p.

    ``coeffs`` lists (a_i, b_i) for the coefficient a_i + w b_i of t^i,
    integral in K; ``T`` is a finite set of rationals.  Requires m large
    enough for the leading term to dominate on the sphere |t| = p^m, in
    which case the maximum over B_m is |a_d| p^(dm).
    """
    coeffs = [(Fraction(a), Fraction(b)) for a, b in coeffs]
    while coeffs and coeffs[-1] == (0, 0):
        coeffs.pop()
    d = len(coeffs) - 1
    if d < 1:
        raise DegenerateBall("polynomial must have positive degree")
    sizes = [ext_abs(a, b, p) for a, b in coeffs]
    if any(s > 1 for s in sizes):
        raise ValueError("coefficients must be integral")
    top = sizes[d] * Fraction(p) ** (d * m)
    for i in range(d):
        if sizes[i] and not sizes[i] * Fraction(p) ** (i * m) < top:
            raise DegenerateBall(f"leading term does not dominate at m={m}")
    inside = [Fraction(t) for t in T if Fraction(t) == 0 or _vq(Fraction(t), p) >= -m]
    if not inside:
        raise DegenerateBall("T has no element in B_m")
    best = Fraction(0)
    for t in inside:
        A = sum(a * t**i for i, (a, _) in enumerate(coeffs))
        B = sum(b * t**i for i, (_, b) in enumerate(coeffs))
        best = max(best, ext_abs(A, B, p))
    lhs = Fraction(p) ** (-K * d) * top
    return PolyBoundResult(lhs <= best, lhs, best, best / top)


# --------------------------------------------------------------------------
# intersection census
# --------------------------------------------------------------------------


@dataclass
class IntersectionCensus:
    depth: int
    base: Vertex | None
    persistent_rays: list  # frame vertices at depth D (in g^-1 coordinates)
    verdict: str  # Empty | ProperNonempty | SaturatedFull
    certificates: list = field(default_factory=list)
    frontier: int = 0
    tally: list = field(default_factory=list)  # surviving rays at each depth 0..D

    @property
    def ray_count(self) -> int:
        return len(self.persistent_rays)


def ray_point(circle: Circle, base_frame: Vertex, end: Vertex) -> BoundaryPoint:
    """Boundary point g.x approximated by the frame ray from base to ``end``."""
    ctx = circle.ctx
    p = ctx.p
    if end.m < base_frame.m and distance(base_frame, end, p) == base_frame.m - end.m:
        return mobius(circle.rep, BoundaryPoint.infinity())
    return mobius(circle.rep, BoundaryPoint.finite(end.center(ctx)))


def circle_limit_census(circle: Circle, group: SchottkyGroup, core: CoreGraph, depth: int,
                        cap: int = 20_000) -> IntersectionCensus:
    """Rays of hull(C) from a base vertex that stay in S_Gamma for ``depth`` steps.

    The base is the projection onto hull(C) of a core vertex; hull(C) meets
    S_Gamma iff the base lies in S_Gamma (projections onto a subtree lie on
    geodesics to it, and S_Gamma is convex).
    """
    p = group.p
    anchor = core.vertices[0]
    base = circle.project(anchor)
    if not _in_S(group, core, base):
        cert = _exit_cert(group, base, "nearest hull vertex to S_Gamma is outside S_Gamma")
        cert["anchor"] = vertex_literal(anchor, p)
        return IntersectionCensus(depth, base, [], "Empty", [cert], 0)
    h0 = circle.to_frame(base)
    rays: list = []
    exits: list = []
    tally = [0] * (depth + 1)
    count = [0]
    letter_int = {x: group.letter_matrix(x).int_model() for x in group.letters()}
    rep_int = circle.rep.int_model()

    def local(n, A):
        # n in frame coordinates, A = w^-1 * rep: returns (u in F, A') with u = A'.n
        v = A.act(n)
        hit = group._halftree_move(v)
        if hit is None:
            return v, A
        A = letter_int[hit[0]] @ A
        v = A.act(n)
        if group.in_F(v):
            return v, A
        u, word = group.reduce_to_F(circle.from_frame(n))  # pragma: no cover - one letter suffices
        return u, group.word_matrix(word_inverse(word)).int_model() @ rep_int

    def dfs(h, prev, A, level):
        tally[level] += 1
        if level == depth:
            rays.append(h)
            return
        for n in real_neighbors(h, p):
            if n == prev:
                continue
            count[0] += 1
            if count[0] > cap:
                raise FrontierBudgetExceeded(f"census frontier exceeded {cap} vertices")
            try:
                u, A2 = local(n, A)
            except PrecisionExhausted:
                u, word = group.reduce_to_F(circle.from_frame(n))
                A2 = group.word_matrix(word_inverse(word)).int_model() @ rep_int
            if u in core.vertex_set:
                dfs(n, h, A2, level + 1)
            elif len(exits) < 8:
                exits.append(_exit_cert(group, circle.from_frame(n), f"hull leaves S_Gamma at step {level + 1}"))

    _, word0 = group.reduce_to_F(base)
    dfs(h0, None, group.word_matrix(word_inverse(word0)).int_model() @ rep_int, 0)
    full = (p + 1) * p ** (depth - 1) if depth > 0 else 1
    if not rays:
        verdict = "Empty"
    elif len(rays) == full:
        verdict = "SaturatedFull"
    else:
        verdict = "ProperNonempty"
    certs = exits if verdict == "Empty" else exits[:3]
    return IntersectionCensus(depth, base, sorted(rays), verdict, certs, count[0], tally)


# --------------------------------------------------------------------------
# Gamma(C, v) and stabilizers
# --------------------------------------------------------------------------


def gamma_C_v(circle: Circle, v: Vertex, group: SchottkyGroup, wordlen: int) -> list[tuple]:
    """Reduced words w, |w| <= L, with v in w.hull(C), one per distinct circle w.C."""
    classes: list = []
    for w in reduced_words(group.rank, wordlen):
        if not circle.contains_vertex(group.act_word(word_inverse(w), v)):
            continue
        cw = circle.translate(group.word_matrix(w))
        if not any(cw.same(c) for _, c in classes):
            classes.append((w, cw))
    return [w for w, _ in classes]


def stabilizer_search(circle: Circle, group: SchottkyGroup, wordlen: int) -> list[tuple]:
    """Nontrivial reduced words w, |w| <= L, with w.C = C (closed under inverse)."""
    base = circle.from_frame(origin())
    probe = circle.from_frame(bttree.ref_vertex(1))
    out = []
    for w in reduced_words(group.rank, wordlen, 1):
        # cheap necessary test: w maps two hull vertices into the hull
        if not circle.contains_vertex(group.act_word(w, base)):
            continue
        if not circle.contains_vertex(group.act_word(w, probe)):
            continue
        if (circle.rep_inv @ group.word_matrix(w) @ circle.rep).in_H():
            out.append(w)
    return out


# --------------------------------------------------------------------------
# orbit classification probe
# --------------------------------------------------------------------------


@dataclass
class OrbitReport:
    circle: dict
    depth: int
    wordlen: int
    verdict: str
    ray_count: int
    stabilizer_words: list
    case_tag: int
    certificates: list
    label: str = EVIDENCE_LABEL

    def to_json(self) -> dict:
        return {
            "circle": self.circle,
            "depth": self.depth,
            "wordlen": self.wordlen,
            "verdict": self.verdict,
            "ray_count": self.ray_count,
            "stabilizer_words": self.stabilizer_words,
            "case_tag": self.case_tag,
            "certificates": self.certificates,
            "label": self.label,
        }


def _ray_accounted(circle, group, census, fixed_points, depth) -> bool:
    """Each persistent ray is the start of a ray toward a stabilizer fixed point."""
    p = group.p
    h0 = circle.to_frame(census.base)
    targets = []
    for pt in fixed_points:
        fpt = mobius(circle.rep_inv, pt)
        targets.append(bttree.ray_to_boundary(h0, fpt, depth, p)[depth])
    return all(r in targets for r in census.persistent_rays)


def classify_orbit(circle: Circle, group: SchottkyGroup, core: CoreGraph, depth: int = 10,
                   wordlen: int = 4, cap: int = 20_000) -> OrbitReport:
    """Case 1-4 of the orbit-closure classification as finite-depth evidence.

    Empty census -> 1; all rays persisting -> 2; a nontrivial stabilizer whose
    fixed points account for every persistent ray -> 3; otherwise 4.
    """
    cen = circle_limit_census(circle, group, core, depth, cap)
    nxt = circle_limit_census(circle, group, core, depth + 1, cap)
    if (cen.verdict == "Empty") != (nxt.verdict == "Empty"):
        raise Inconclusive("census verdict changes between depth D and D+1")
    stab = stabilizer_search(circle, group, wordlen)
    certs = list(cen.certificates)
    if cen.verdict == "Empty":
        case = 1
    elif cen.verdict == "SaturatedFull":
        case = 2
    else:
        fixed = []
        for w in stab:
            hd = classify(group.word_matrix(w))
            if hd:
                fixed += [hd.fixed_minus, hd.fixed_plus]
        if stab and _ray_accounted(circle, group, cen, fixed, depth):
            case = 3
            certs.append({"kind": "stabilizer", "words": [word_text(w, group.names) for w in stab],
                          "note": "stabilizer fixed points account for every persistent ray"})
        else:
            case = 4
            certs.append({"kind": "growth", "ray_counts": {str(depth): cen.ray_count, str(depth + 1): nxt.ray_count},
                          "note": "not case 1, 2 or 3 within budget"})
    h0 = circle.to_frame(cen.base) if cen.base is not None else None
    rays = []
    for r in cen.persistent_rays:
        pt = ray_point(circle, h0, r)
        rays.append(repr(pt))
    if rays:
        certs.append({"kind": "rays", "points": rays})
    return OrbitReport(circle.describe(), depth, wordlen, cen.verdict, cen.ray_count,
                       [word_text(w, group.names) for w in stab], case, certs)


# --------------------------------------------------------------------------
# Hausdorff distance between circles
# --------------------------------------------------------------------------


@dataclass
class CircleDistance:
    value: Fraction
    resolved: bool  # False: value 0 stands for "below p^-depth"
    depth: int


def _sup_term(c_from: Circle, c_to: Circle, radius: int, cap: int):
    """sup over z in c_from of d(z, c_to), via Gromov products at v*_0.

    The chordal metric is the visual metric at v*_0: d(x, y) = p^-(x|y).
    So d(z, C) = p^-e where e is how long the ray [v*_0, z) stays in
    A = hull(C) joined to v*_0.
    """
    p = c_from.ctx.p
    o = origin()
    pi_to = c_to.project(o)
    seg = distance(o, pi_to, p)

    def in_A(v):
        return c_to.contains_vertex(v) or distance(o, v, p) + distance(v, pi_to, p) == seg

    pi_from = c_from.project(o)
    lead = bttree.geodesic(o, pi_from, p).vertices
    for i, v in enumerate(lead):
        if not in_A(v):
            return i - 1, True
    limit = len(lead) - 1 + radius
    best = [None]
    count = [0]
    h0 = c_from.to_frame(pi_from)

    def dfs(h, prev, level):
        if best[0] is not None and level >= best[0]:
            return
        if level == limit:
            return
        for n in real_neighbors(h, p):
            if n == prev:
                continue
            count[0] += 1
            if count[0] > cap:
                raise FrontierBudgetExceeded(f"distance frontier exceeded {cap} vertices")
            if in_A(c_from.from_frame(n)):
                dfs(n, h, level + 1)
            elif best[0] is None or level < best[0]:
                best[0] = level

    dfs(h0, None, len(lead) - 1)
    if best[0] is None:
        return limit, False
    return best[0], True


def hausdorff_circle_distance(c1: Circle, c2: Circle, radius: int = 8, cap: int = 20_000) -> CircleDistance:
    """Hausdorff distance between circles for the chordal boundary metric."""
    p = c1.ctx.p
    e1, r1 = _sup_term(c2, c1, radius, cap)
    e2, r2 = _sup_term(c1, c2, radius, cap)
    vals = []
    if r1:
        vals.append(Fraction(p) ** (-e1))
    if r2:
        vals.append(Fraction(p) ** (-e2))
    if not vals:
        return CircleDistance(Fraction(0), False, min(e1, e2))
    return CircleDistance(max(vals), True, min(e1, e2))


# --------------------------------------------------------------------------
# projection to the quotient
# --------------------------------------------------------------------------


@dataclass
class Projection:
    radius: int
    base: Vertex
    vertices: list  # F-vertices hit
    edges: list  # (a, b) F-vertex pairs, a <= b
    core_part: list
    case_tag: int
    description: str
    regular: bool | None
    sizes: dict
    label: str = EVIDENCE_LABEL

    def to_json(self, p: int) -> dict:
        return {
            "radius": self.radius,
            "base": vertex_literal(self.base, p),
            "vertices": [vertex_literal(v, p) for v in self.vertices],
            "edges": [[vertex_literal(a, p), vertex_literal(b, p)] for a, b in self.edges],
            "core_part": [vertex_literal(v, p) for v in self.core_part],
            "case_tag": self.case_tag,
            "description": self.description,
            "regular_away_from_attachment": self.regular,
            "projected_size_by_radius": {str(k): v for k, v in sorted(self.sizes.items())},
            "label": self.label,
        }

    def to_dot(self, p: int, name: str = "projection") -> str:
        labels = {v: "core" for v in self.core_part}
        return bttree.to_dot(self.vertices, p, name, labels, edges=self.edges)


def project_subtree(g: ProjMatrix, group: SchottkyGroup, core: CoreGraph, radius: int = 8,
                    wordlen: int = 4, cap: int = 20_000) -> Projection:
    """Image in Gamma \\ T_G of the radius-R part of g.T_H around its vertex nearest S_Gamma."""
    p = group.p
    circle = Circle(g)
    base = circle.project(core.vertices[0])
    h0 = circle.to_frame(base)
    verts: set = set()
    edges: set = set()
    sizes = {}
    layer = [(h0, None)]
    r0 = group.reduce_to_F(base)[0]
    verts.add(r0)
    sizes[0] = 1
    count = 0
    for r in range(1, radius + 1):
        nxt = []
        for h, prev in layer:
            a = group.reduce_to_F(circle.from_frame(h))[0]
            for n in real_neighbors(h, p):
                if n == prev:
                    continue
                count += 1
                if count > cap:
                    raise FrontierBudgetExceeded(f"projection exceeded {cap} vertices")
                b = group.reduce_to_F(circle.from_frame(n))[0]
                verts.add(b)
                edges.add((min(a, b), max(a, b)))
                nxt.append((n, h))
        layer = nxt
        sizes[r] = len(verts)
    core_part = sorted(v for v in verts if v in core.vertex_set)
    regular = None
    if not core_part:
        case, desc = 1, "contained in an end"
        adj: dict = {}
        for a, b in edges:
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
        inner = [v for v in verts if distance(v, r0, p) < radius - 1 and v != r0]
        regular = all(len(adj.get(v, ())) == p + 1 for v in inner)
    elif len(core_part) == len(verts):
        case, desc = 2, "closed subgraph of the core"
    else:
        rep = classify_orbit(circle, group, core, min(radius, 10), wordlen, cap)
        if rep.case_tag == 3:
            case, desc = 3, "infinite, meets the core along the stabilizer's axes"
        else:
            case, desc = 4, "space-filling evidence"
    return Projection(radius, base, sorted(verts), sorted(edges), core_part, case, desc, regular, sizes)
