"""Schottky groups acting on the Bruhat-Tits tree.

Words are tuples of nonzero integers: ``k`` stands for the generator with
index k-1 and ``-k`` for its inverse.  Products act right to left, so
``w.v = w[0].(w[1].(...v))``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from . import bttree
from .bttree import HalfTree, Vertex, distance, geodesic, neighbors, origin, step_toward
from .errors import (
    NonHyperbolicGenerator,
    NonTermination,
    NotLimitPoints,
    NotStabilized,
    NoValidLabeling,
    PrecisionExhausted,
)
from .padic import ExtContext, ExtScalar, density_check
from .pgl2 import (
    BoundaryPoint,
    HyperbolicData,
    ProjMatrix,
    canonicalize,
    classify,
    diag,
    identity,
)

# --------------------------------------------------------------------------
# words
# --------------------------------------------------------------------------


def free_reduce(word) -> tuple:
    out: list[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def word_inverse(word) -> tuple:
    return tuple(-x for x in reversed(word))


def is_cyclically_reduced(word) -> bool:
    return len(word) <= 1 or word[0] != -word[-1]


def word_text(word, names=None) -> str:
    """'g1 g2^-1' style text; ``names`` replaces the default g1..gn."""
    if not word:
        return "e"
    name = (lambda i: names[i - 1]) if names else (lambda i: f"g{i}")
    return " ".join(name(x) if x > 0 else f"{name(-x)}^-1" for x in word)


def reduced_words(n: int, max_len: int, min_len: int = 0):
    """Freely reduced words in breadth-first order, letters ordered 1,-1,2,-2,..."""
    letters = [s * i for i in range(1, n + 1) for s in (1, -1)]
    layer = [()]
    if min_len == 0:
        yield ()
    for length in range(1, max_len + 1):
        nxt = []
        for w in layer:
            for x in letters:
                if w and w[-1] == -x:
                    continue
                nw = w + (x,)
                nxt.append(nw)
                if length >= min_len:
                    yield nw
        layer = nxt


def _necklace_key(word) -> tuple:
    """Canonical representative of a cyclic word up to rotation and inversion."""
    cands = []
    for w in (word, word_inverse(word)):
        for i in range(len(w)):
            cands.append(w[i:] + w[:i])
    return min(cands)


def primitive_root(word) -> tuple:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


# --------------------------------------------------------------------------
# group
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AxisLabel:
    """Labeled axis: v_j = conjugator . v*_(base - offset - j)."""

    conjugator: ProjMatrix
    base: int
    offset: int
    length: int

    def vertex(self, j: int) -> Vertex:
        return bttree.act(self.conjugator, bttree.ref_vertex(self.base - self.offset - j))

    def window(self, lo: int, hi: int) -> list[Vertex]:
        return [self.vertex(j) for j in range(lo, hi + 1)]

    def plus(self) -> HalfTree:
        return HalfTree(self.vertex(self.length), self.vertex(self.length + 1))

    def minus(self) -> HalfTree:
        return HalfTree(self.vertex(1), self.vertex(0))


def axis_label(data: HyperbolicData, offset: int = 0) -> AxisLabel:
    """Label Axis(g) from g^- to g^+, v_0 = projection of v*_0 moved by ``offset``."""
    conj = data.conjugator
    w = bttree.act(conj.inverse(), origin())
    # nearest vertex of the (0, inf) geodesic to w = (m; a) is v*_min(m, v(a))
    if w.x == 0 and w.y == 0:
        k = w.m
    else:
        from .padic import vp_pair

        k = min(w.m, vp_pair(w.x, w.y, conj.ctx.p) - w.s)
    return AxisLabel(conj, k, offset, data.length)


class SchottkyGroup:
    """A verified Schottky group with its ping-pong half-trees.

    Immutable after construction apart from internal memo tables.
    """

    def __init__(self, ctx: ExtContext, generators, data, labels, names=None):
        self.ctx = ctx
        self.p = ctx.p
        self.generators = tuple(generators)
        self.inverses = tuple(g.inverse() for g in generators)
        self.data = tuple(data)
        self.labels = tuple(labels)
        self.offsets = tuple(lab.offset for lab in labels)
        self.names = tuple(names or (f"g{i + 1}" for i in range(len(generators))))
        self.plus = tuple(lab.plus() for lab in labels)
        self.minus = tuple(lab.minus() for lab in labels)
        self._act_cache: dict = {}
        self._reduce_cache: dict = {}
        self._core_cache: dict = {}
        p = self.p
        self._reach = max(distance(origin(), h.root, p) for h in self.plus + self.minus)
        # root -> {toward: (letter to apply, letter recorded)}; a vertex v lies in
        # the half-tree (r, t) iff v != r and the first step from r to v is t
        self._by_root: dict = {}
        for i in range(self.rank):
            self._by_root.setdefault(self.plus[i].root, {})[self.plus[i].toward] = (-(i + 1), i + 1)
            self._by_root.setdefault(self.minus[i].root, {})[self.minus[i].toward] = (i + 1, -(i + 1))
        self._roots = sorted(self._by_root)

    @property
    def rank(self) -> int:
        return len(self.generators)

    def letter_matrix(self, x: int) -> ProjMatrix:
        return self.generators[x - 1] if x > 0 else self.inverses[-x - 1]

    def letters(self) -> list[int]:
        return [x for i in range(1, self.rank + 1) for x in (i, -i)]

    def word_matrix(self, word) -> ProjMatrix:
        out = identity(self.ctx)
        for x in word:
            out = out @ self.letter_matrix(x)
        return out

    def act_letter(self, x: int, v: Vertex) -> Vertex:
        key = (x, v)
        out = self._act_cache.get(key)
        if out is None:
            if len(self._act_cache) > 400_000:
                self._act_cache.clear()
            out = bttree.act(self.letter_matrix(x), v)
            self._act_cache[key] = out
        return out

    def act_word(self, word, v: Vertex) -> Vertex:
        for x in reversed(word):
            v = self.act_letter(x, v)
        return v

    def halftrees(self):
        """(label, HalfTree) pairs: O+_i then O-_i for each generator."""
        out = []
        for i in range(self.rank):
            out.append((f"O+{i + 1}", self.plus[i]))
            out.append((f"O-{i + 1}", self.minus[i]))
        return out

    def _halftree_move(self, v: Vertex):
        p = self.p
        for r in self._roots:
            if v != r:
                hit = self._by_root[r].get(step_toward(r, v, p))
                if hit is not None:
                    return hit
        return None

    def in_F(self, v: Vertex) -> bool:
        return self._halftree_move(v) is None

    def reduce_to_F(self, v: Vertex):
        """(u, word) with u in F and word.u = v."""
        hit = self._reduce_cache.get(v)
        if hit is not None:
            return hit
        p = self.p
        cap = distance(v, origin(), p) + self._reach + 8
        letters: list[int] = []
        cur = v
        for _ in range(cap + 1):
            hit = self._halftree_move(cur)
            if hit is not None:
                cur = self.act_letter(hit[0], cur)
                letters.append(hit[1])
            else:
                out = (cur, tuple(letters))
                if len(self._reduce_cache) > 400_000:
                    self._reduce_cache.clear()
                self._reduce_cache[v] = out
                return out
        raise NonTermination("reduction to the fundamental domain did not terminate")

    # -- convex core ------------------------------------------------------

    def core(self, wordlen: int = 3) -> "CoreGraph":
        key = wordlen
        if key not in self._core_cache:
            self._core_cache[key] = core_graph(self, wordlen)
        return self._core_cache[key]

    def in_S(self, v: Vertex, core: "CoreGraph") -> bool:
        return self.reduce_to_F(v)[0] in core.vertex_set


# --------------------------------------------------------------------------
# construction and verification
# --------------------------------------------------------------------------


def quadruple_matrix(ctx: ExtContext, a: ExtScalar, b: ExtScalar, k: int, u: ExtScalar) -> ProjMatrix:
    """g diag(p^-k u, 1) g^-1 with g = [[a, b], [1, 1]]."""
    g = canonicalize([[a, b], [ctx.one(), ctx.one()]])
    d = diag(u / ctx.elem(ctx.p**k), 1, ctx)
    return g @ d @ g.inverse()


def _labels_for(data, offsets):
    return [axis_label(d, o) for d, o in zip(data, offsets)]


def _conflict(h1, h2, p):
    return not bttree.halftrees_disjoint(h1, h2, p)


def verify_schottky(ctx: ExtContext, generators, window: int = 4, offsets=None, names=None) -> SchottkyGroup:
    """Find axis labelings making the 2n ping-pong half-trees mutually disjoint.

    Offsets are searched in [-window, window]^n; the lexicographically first
    witness is kept.  Fixed ``offsets`` skip the search.
    """
    if len(generators) < 2:
        raise NoValidLabeling("a Schottky group needs at least two generators")
    p = ctx.p
    data = []
    for i, g in enumerate(generators):
        hd = classify(g)
        if not hd:
            raise NonHyperbolicGenerator(f"generator {i + 1} is not hyperbolic")
        data.append(hd)
    if offsets is not None:
        labels = _labels_for(data, offsets)
        trees = [(f"O+{i + 1}", lab.plus()) for i, lab in enumerate(labels)] + [
            (f"O-{i + 1}", lab.minus()) for i, lab in enumerate(labels)
        ]
        for (n1, h1), (n2, h2) in itertools.combinations(trees, 2):
            if _conflict(h1, h2, p):
                raise NoValidLabeling(
                    f"{n1} and {n2} intersect for offsets {list(offsets)}",
                    violation={"pair": [n1, n2], "offsets": list(offsets)},
                )
        return SchottkyGroup(ctx, generators, data, labels, names)

    cand = []
    for d in data:
        row = []
        for o in range(-window, window + 1):
            lab = axis_label(d, o)
            row.append((o, lab, lab.plus(), lab.minus()))
        cand.append(row)
    n = len(data)
    chosen: list = []
    deepest = {"depth": -1}

    def fits(i, entry):
        _, _, hp, hm = entry
        if _conflict(hp, hm, p):
            return (f"O+{i + 1}", f"O-{i + 1}")
        for j, (_, _, qp, qm) in enumerate(chosen):
            for a_name, a in ((f"O+{i + 1}", hp), (f"O-{i + 1}", hm)):
                for b_name, b in ((f"O+{j + 1}", qp), (f"O-{j + 1}", qm)):
                    if _conflict(a, b, p):
                        return (a_name, b_name)
        return None

    def search(i):
        if i == n:
            return True
        for entry in cand[i]:
            bad = fits(i, entry)
            if bad is None:
                chosen.append(entry)
                if search(i + 1):
                    return True
                chosen.pop()
            elif i >= deepest["depth"]:
                deepest.update(depth=i, pair=list(bad), offsets=[e[0] for e in chosen] + [entry[0]])
        return False

    if not search(0):
        raise NoValidLabeling(
            f"no labeling with offsets in [-{window}, {window}]",
            violation={k: v for k, v in deepest.items() if k != "depth"},
        )
    return SchottkyGroup(ctx, generators, data, [e[1] for e in chosen], names)


# --------------------------------------------------------------------------
# limit points
# --------------------------------------------------------------------------


def limit_points(group: SchottkyGroup, wordlen: int, depth: int = 12):
    """Fixed points of reduced words up to ``wordlen``, deduplicated at ``depth``.

    Returns a list of (BoundaryPoint, word, sign) with sign '+' (attracting)
    or '-' (repelling).
    """
    out: list = []
    for w in reduced_words(group.rank, wordlen, 1):
        if not is_cyclically_reduced(w):
            continue
        hd = classify(group.word_matrix(w))
        if not hd:
            raise NonHyperbolicGenerator(f"word {word_text(w)} is not hyperbolic")
        for pt, sign in ((hd.fixed_plus, "+"), (hd.fixed_minus, "-")):
            if not any(pt.same(q, depth) for q, _, _ in out):
                out.append((pt, w, sign))
    return out


# --------------------------------------------------------------------------
# core graph
# --------------------------------------------------------------------------


@dataclass
class CoreGraph:
    """Quotient Gamma \\ S_Gamma read on the fundamental domain F."""

    p: int
    wordlen: int
    vertices: list
    degree: dict
    edges: list  # (v, u, label): u in F, label '' for an edge inside F
    vertex_set: frozenset = field(default=frozenset())

    def __post_init__(self):
        self.vertex_set = frozenset(self.vertices)

    def diameter(self) -> int:
        p = self.p
        return max((distance(a, b, p) for a in self.vertices for b in self.vertices), default=0)

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        adj = {v: set() for v in self.vertices}
        for a, b, _ in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    def to_json(self) -> dict:
        p = self.p
        return {
            "wordlen": self.wordlen,
            "vertices": [bttree.vertex_literal(v, p) for v in self.vertices],
            "degrees": [self.degree[v] for v in self.vertices],
            "edges": [
                {"from": bttree.vertex_literal(a, p), "to": bttree.vertex_literal(b, p), "label": lab or "F"}
                for a, b, lab in self.edges
            ],
            "diameter": self.diameter(),
        }

    def to_dot(self, name: str = "core") -> str:
        p = self.p
        ids = {v: f"v{i}" for i, v in enumerate(self.vertices)}
        lines = [f"graph {name} {{"]
        for v in self.vertices:
            lines.append(f'  {ids[v]} [label="{bttree.vertex_literal(v, p)}\\ndeg={self.degree[v]}"];')
        for a, b, lab in self.edges:
            attr = f' [label="{lab}"]' if lab else ""
            lines.append(f"  {ids[a]} -- {ids[b]}{attr};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _axis_period(group: SchottkyGroup, word) -> list[Vertex]:
    """One translation period of Axis(word), located by vertex displacement."""
    p = group.p
    x0 = origin()
    y1 = group.act_word(word, x0)
    y2 = group.act_word(word, y1)
    d1 = distance(x0, y1, p)
    ell = distance(x0, y2, p) - d1
    if ell <= 0:
        raise NonHyperbolicGenerator(f"word {word_text(word)} has no axis")
    path = geodesic(x0, y1, p).vertices
    start = path[(d1 - ell) // 2]
    return list(geodesic(start, group.act_word(word, start), p).vertices[:-1])


def core_vertices(group: SchottkyGroup, wordlen: int) -> set:
    """F-vertices on axes of cyclically reduced words of length <= wordlen."""
    found = set()
    seen = set()
    for w in reduced_words(group.rank, wordlen, 1):
        if not is_cyclically_reduced(w):
            continue
        key = _necklace_key(w)
        if key in seen:
            continue
        seen.add(key)
        for v in _axis_period(group, w):
            found.add(group.reduce_to_F(v)[0])
    return found


def _graph_from_vertices(group: SchottkyGroup, verts: set, wordlen: int) -> CoreGraph:
    p = group.p
    ordered = sorted(verts)
    degree = {}
    halves = {}
    for v in ordered:
        deg = 0
        for u in neighbors(v, p):
            red, word = group.reduce_to_F(u)
            if red not in verts:
                continue
            deg += 1
            # the quotient edge is the orbit of the tree edge {v, u}
            other = (red, group.act_word(word_inverse(word), v))
            key = tuple(sorted([(v, u), other]))
            halves.setdefault(key, (v, red, word_text(word[:1], group.names) if word else ""))
        degree[v] = deg
    edges = sorted(halves.values(), key=lambda e: (ordered.index(e[0]), ordered.index(e[1]), e[2]))
    return CoreGraph(p, wordlen, ordered, degree, edges)


def core_graph(group: SchottkyGroup, wordlen: int = 3, check_next: bool = True) -> CoreGraph:
    """Core graph from word axes up to ``wordlen``; with ``check_next`` the
    vertex set must agree with the one at ``wordlen + 1``."""
    verts = core_vertices(group, wordlen)
    if check_next:
        nxt = core_vertices(group, wordlen + 1)
        if nxt != verts:
            raise NotStabilized(
                f"core vertex set changes between word length {wordlen} and {wordlen + 1}"
            )
    return _graph_from_vertices(group, verts, wordlen)


def hull_core(group: SchottkyGroup):
    """Exact F-part of S_Gamma and its degrees, independent of word axes.

    For v in F every ping-pong half-tree lies in a single direction at v, each
    such half-tree carries limit points, and every limit point lies in one of
    them; so the S_Gamma-degree of v is the number of directions at v holding
    a half-tree, and v is in S_Gamma iff that number is at least 2.
    """
    p = group.p
    trees = group.plus + group.minus
    anchors = sorted({h.toward for h in trees})
    cand = set()
    for a, b in itertools.combinations(anchors, 2):
        cand.update(geodesic(a, b, p).vertices)
    out = {}
    for v in sorted(cand):
        if not group.in_F(v):
            continue
        dirs = set()
        for h in trees:
            dirs.add(h.toward if h.root == v else step_toward(v, h.root, p))
        if len(dirs) >= 2:
            out[v] = len(dirs)
    return out


# --------------------------------------------------------------------------
# high-branchedness
# --------------------------------------------------------------------------


@dataclass
class BranchingVerdict:
    condition1: bool
    condition2: bool
    min_degree: int
    degree_bound: int
    witness_bound: int
    f_prime: list
    pair_witnesses: list  # (u, u', w or None)
    low_degree: list
    density_witness: dict | None

    @property
    def verdict(self) -> bool:
        return self.condition1 and self.condition2


def high_branched_check(group: SchottkyGroup, core: CoreGraph, search_words: int = 0) -> BranchingVerdict:
    """Conditions (1) and (2) of high-branchedness on the core graph.

    Degrees in S_Gamma are read on the quotient; S_Gamma is Gamma-invariant so
    a vertex off F has the degree of its reduction.  Pairs of F' include u = u'.
    """
    p = group.p
    lo, hi = p * p - p + 2, p * p - p + 3
    low = [v for v in core.vertices if core.degree[v] < lo]
    fprime = [v for v in core.vertices if any(not group.in_F(u) for u in neighbors(v, p))]

    def deg(w):
        red = group.reduce_to_F(w)[0]
        return core.degree.get(red, 0)

    pairs = []
    ok_pairs = True
    for i, u in enumerate(fprime):
        for u2 in fprime[i:]:
            wit = next((w for w in geodesic(u, u2, p) if deg(w) >= hi), None)
            pairs.append((u, u2, wit))
            ok_pairs &= wit is not None
    cond1 = not low and ok_pairs and bool(core.vertices)

    dens = None
    words = [(i + 1,) for i in range(group.rank)]
    if search_words:
        words = [w for w in reduced_words(group.rank, search_words, 1)]
    for w in words:
        hd = group.data[w[0] - 1] if len(w) == 1 and w[0] > 0 else classify(group.word_matrix(w))
        wit = density_check(hd.unit)
        if wit.dense:
            dens = {"word": word_text(w, group.names), "zeta_order": wit.zeta_order, "theta_valuation": wit.theta_valuation}
            break
    return BranchingVerdict(
        condition1=cond1,
        condition2=dens is not None,
        min_degree=min(core.degree.values(), default=0),
        degree_bound=lo,
        witness_bound=hi,
        f_prime=fprime,
        pair_witnesses=pairs,
        low_degree=low,
        density_witness=dens,
    )


# --------------------------------------------------------------------------
# codings and axis approximation
# --------------------------------------------------------------------------


def coding(group: SchottkyGroup, x: BoundaryPoint, length: int, core: CoreGraph | None = None):
    """First ``length`` letters of the ping-pong coding of a boundary point.

    Read off the reduction word of deep vertices on the ray from v*_0 to x.
    With ``core`` given, vertices on the ray are required to reduce into the
    core, certifying x as a limit point to the probed depth.
    """
    p = group.p
    depth = 4
    while True:
        ray = bttree.ray_to_boundary(origin(), x, depth, p)
        v = ray[depth]
        word = group.reduce_to_F(v)[1]
        if core is not None:
            for u in ray:
                if group.reduce_to_F(u)[0] not in core.vertex_set:
                    raise NotLimitPoints(f"ray toward {x!r} leaves S_Gamma at {bttree.vertex_literal(u, p)}")
        if len(word) >= length + 1:
            return word[:length]
        depth += 4


def geodesic_window(x: BoundaryPoint, y: BoundaryPoint, radius: int, p: int) -> list[Vertex]:
    """Vertices of the geodesic (x, y) within ``radius`` of v*_0, ordered from x to y."""
    o = origin()
    rx = bttree.ray_to_boundary(o, x, radius, p).vertices
    ry = bttree.ray_to_boundary(o, y, radius, p).vertices
    k = 0
    while k + 1 < len(rx) and k + 1 < len(ry) and rx[k + 1] == ry[k + 1]:
        k += 1
    # the geodesic passes through rx[k]; its distance to v*_0 is k
    left = [v for v in reversed(rx[k:]) if distance(o, v, p) <= radius]
    right = [v for v in ry[k + 1:] if distance(o, v, p) <= radius]
    return left + right


def on_axis(group: SchottkyGroup, word, v: Vertex) -> bool:
    p = group.p
    w = group.act_word(word, v)
    w2 = group.act_word(word, w)
    return distance(v, w2, p) == 2 * distance(v, w, p) and distance(v, w, p) > 0


def axis_approximate(group: SchottkyGroup, alpha: BoundaryPoint, beta: BoundaryPoint, radius: int,
                     core: CoreGraph | None = None, max_prefix: int = 24):
    """A word whose axis contains the part of (alpha, beta) within ``radius`` of v*_0.

    With codings alpha = a1 a2 ..., beta = b1 b2 ..., the candidate is
    (a1..ak)(b1..bk)^-1 after stripping the common prefix c and conjugating
    by it; the smallest k that covers the window is returned, as a primitive
    word.
    """
    p = group.p
    window = geodesic_window(alpha, beta, radius, p)
    for k in range(1, max_prefix + 1):
        a = coding(group, alpha, k + 4, core)
        b = coding(group, beta, k + 4, core)
        c = 0
        while c < len(a) and c < len(b) and a[c] == b[c]:
            c += 1
        if c == len(a):
            raise NotLimitPoints("alpha and beta are not distinguished at this depth")
        head = a[c:c + k]
        tail = b[c:c + k]
        tau = free_reduce(a[:c] + head + word_inverse(tail) + word_inverse(a[:c]))
        core_word = free_reduce(head + word_inverse(tail))
        if not is_cyclically_reduced(core_word):
            continue
        tau = free_reduce(a[:c] + primitive_root(core_word) + word_inverse(a[:c]))
        if all(on_axis(group, tau, v) for v in window):
            return tau, window
    raise PrecisionExhausted("no word found covering the requested window")


# --------------------------------------------------------------------------
# export
# --------------------------------------------------------------------------


def group_summary(group: SchottkyGroup) -> dict:
    p = group.p
    gens = []
    for i, (lab, hd) in enumerate(zip(group.labels, group.data)):
        gens.append({
            "name": group.names[i],
            "length": hd.length,
            "offset": lab.offset,
            "O+": [bttree.vertex_literal(group.plus[i].root, p), bttree.vertex_literal(group.plus[i].toward, p)],
            "O-": [bttree.vertex_literal(group.minus[i].root, p), bttree.vertex_literal(group.minus[i].toward, p)],
        })
    return {"p": p, "c": group.ctx.c, "rank": group.rank, "generators": gens}


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
