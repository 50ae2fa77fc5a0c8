import random
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from padic_circles.bttree import (GeodesicSegment, HalfTree, Vertex, act, ball, chordal_distance, child,
                                  distance, geodesic, halftrees_disjoint, in_H_subtree, lift, make_vertex,
                                  neighbors, origin, parent, parse_vertex, project_to_H_subtree,
                                  ray_to_boundary, ref_vertex, step_toward, to_dot, vertex_from_center,
                                  vertex_literal, vertex_of_matrix)
from padic_circles.pgl2 import BoundaryPoint, canonicalize, diag, identity

from .oracles import bfs_layers, halftree_members, hermite_vertex, meet_distance

P = 3


def random_vertex(rng, max_level=5, min_level=-3):
    m = rng.randint(min_level, max_level)
    s = rng.randint(0, 3)
    k = max(m + s, 0)
    return make_vertex(m, rng.randrange(P**k) if k else 0, rng.randrange(P**k) if k else 0, s, P)


def random_walk(rng, v, steps):
    for _ in range(steps):
        v = rng.choice(neighbors(v, P))
    return v


def _rand_matrix(ctx, rng):
    while True:
        rows = [[ctx.elem(rng.randint(-300, 300) * Fraction(P) ** rng.randint(-1, 1), rng.randint(-300, 300))
                 for _ in range(2)] for _ in range(2)]
        try:
            return canonicalize(rows)
        except Exception:
            continue


vertices = st.builds(
    lambda m, s, x, y: make_vertex(m, x, y, s, P),
    st.integers(-4, 6), st.integers(0, 3), st.integers(0, P**9), st.integers(0, P**9),
)


def test_vertex_normal_form():
    v = make_vertex(2, 7 + 9 * 5, 6, 0, P)
    assert v == Vertex(2, 0, 7, 6)
    assert make_vertex(1, 3, 3, 1, P) == Vertex(1, 0, 1, 1)
    assert make_vertex(-2, 5, 5, 1, P) == Vertex(-2, 0, 0, 0)


def test_literals(ctx):
    v = Vertex(2, 0, 7, 6)
    assert vertex_literal(v, P) == "(2; 1 + (2+2w)*3)"
    assert parse_vertex("(2; 1 + (2+2*w)*3)", ctx) == v
    rng = random.Random(20)
    for _ in range(50):
        u = random_vertex(rng)
        assert parse_vertex(vertex_literal(u, P), ctx) == u


def test_neighbors_are_adjacent_and_distinct():
    rng = random.Random(21)
    for _ in range(50):
        v = random_vertex(rng)
        ns = neighbors(v, P)
        assert len(set(ns)) == P * P + 1
        assert all(distance(v, n, P) == 1 for n in ns)
        assert all(parent(child(v, tx, ty, P), P) == v for tx in range(P) for ty in range(P))


@settings(max_examples=200, deadline=None)
@given(vertices, vertices, vertices)
def test_metric_axioms(u, v, w):
    assert distance(u, v, P) == distance(v, u, P) >= 0
    assert (distance(u, v, P) == 0) == (u == v)
    assert distance(u, w, P) <= distance(u, v, P) + distance(v, w, P)
    # four-point parity in a tree: d(u,v) + d(v,w) + d(u,w) is even
    assert (distance(u, v, P) + distance(v, w, P) + distance(u, w, P)) % 2 == 0


def test_distance_matches_bfs():
    """Closed-form distance against breadth-first search on 500 pairs, d <= 10."""
    rng = random.Random(22)
    checked = 0
    for _ in range(10):
        v = random_vertex(rng)
        layers = bfs_layers(v, P, 5)
        for _ in range(50):
            w = random_walk(rng, v, rng.randint(0, 10))
            d = meet_distance(layers, 5, w, P, 5)
            assert d is not None and d <= 10
            assert distance(v, w, P) == d
            checked += 1
    assert checked == 500


def test_geodesics_and_balls():
    rng = random.Random(23)
    for _ in range(50):
        v, w = random_vertex(rng), random_vertex(rng)
        seg = geodesic(v, w, P)
        assert seg.is_geodesic(P) and seg[0] == v and seg[-1] == w
        assert len(seg) == distance(v, w, P) + 1
        if v != w:
            assert step_toward(v, w, P) == seg[1]
    assert len(ball(origin(), 2, P)) == 1 + (P * P + 1) + (P * P + 1) * P * P
    assert not GeodesicSegment((origin(), ref_vertex(1), origin())).is_geodesic(P)


def test_action_matches_column_reduction(ctx):
    rng = random.Random(24)
    for _ in range(100):
        g = _rand_matrix(ctx, rng)
        v = random_vertex(rng, 4, -2)
        assert act(g, v) == hermite_vertex(g @ lift(v, ctx))


def test_action_is_isometric_and_a_homomorphism(ctx):
    rng = random.Random(25)
    for _ in range(60):
        g, h = _rand_matrix(ctx, rng), _rand_matrix(ctx, rng)
        v, w = random_vertex(rng), random_vertex(rng)
        assert distance(act(g, v), act(g, w), P) == distance(v, w, P)
        assert act(g @ h, v) == act(g, act(h, v))
        assert act(g.inverse(), act(g, v)) == v
    assert vertex_of_matrix(identity(ctx)) == origin()
    assert vertex_of_matrix(diag(ctx.elem(P**3), 1, ctx)) == ref_vertex(3)


def test_vertex_independent_of_coset_representative(ctx):
    rng = random.Random(26)
    k = canonicalize([[ctx.elem(1, 1), ctx.elem(2)], [ctx.elem(3), ctx.elem(1)]])  # in PGL2(O_K)
    for _ in range(30):
        g = _rand_matrix(ctx, rng)
        assert vertex_of_matrix(g @ k) == vertex_of_matrix(g)


def test_H_subtree(ctx):
    g = diag(ctx.elem(1, 1), 1, ctx)
    for j in range(-8, 9):
        assert in_H_subtree(g, ref_vertex(j))
    assert not in_H_subtree(identity(ctx), Vertex(1, 0, 0, 1))
    rng = random.Random(27)
    for _ in range(40):
        h = _rand_matrix(ctx, rng)
        v = random_vertex(rng)
        pr = project_to_H_subtree(h, v)
        assert in_H_subtree(h, pr)
        # the projection is the closest point: its neighbors toward v leave the subtree
        if pr != v:
            assert not in_H_subtree(h, step_toward(pr, v, P))


def test_halftree_disjointness_against_ball_oracle():
    rng = random.Random(28)
    inner = ball(origin(), 2, P)
    big = ball(origin(), 4, P)
    for _ in range(100):
        edges = []
        for _ in range(2):
            r = rng.choice(inner)
            edges.append(HalfTree(r, rng.choice(neighbors(r, P))))
        b1, b2 = edges
        m1 = halftree_members(b1.root, b1.toward, big, P)
        m2 = halftree_members(b2.root, b2.toward, big, P)
        assert halftrees_disjoint(b1, b2, P) == (not (m1 & m2))
        assert all(b1.contains(x, P) for x in m1)


def test_chordal_equals_visual_metric(ctx):
    """p^-(x|y) at v*_0, the Gromov product read off from rays."""
    rng = random.Random(29)

    def pt(k):
        if k == 0:
            return BoundaryPoint.infinity()
        return BoundaryPoint.finite(ctx.elem(rng.randint(-10**6, 10**6), rng.randint(-10**6, 10**6))
                                    * ctx.elem(Fraction(P) ** rng.randint(-4, 4)))

    for _ in range(60):
        x, y = pt(rng.randrange(8)), pt(rng.randrange(8))
        if x == y:
            continue
        rx, ry = ray_to_boundary(origin(), x, 30, P), ray_to_boundary(origin(), y, 30, P)
        k = 0
        while rx[k + 1] == ry[k + 1]:
            k += 1
        assert chordal_distance(x, y) == Fraction(1, P**k)


def test_dot_output():
    text = to_dot([origin(), ref_vertex(1)], P, name="t", labels={origin(): "deg=9"})
    assert text.startswith("graph t {") and "--" in text and "deg=9" in text


def test_vertex_from_center(ctx):
    assert vertex_from_center(2, ctx.elem(7, 6)) == Vertex(2, 0, 7, 6)
    assert vertex_from_center(0, ctx.elem(Fraction(1, 3))) == Vertex(0, 1, 1, 0)
