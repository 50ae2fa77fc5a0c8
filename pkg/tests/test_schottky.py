import random
import time
from fractions import Fraction

import pytest

from padic_circles import bttree
from padic_circles.bttree import Vertex, ball, origin
from padic_circles.errors import NoValidLabeling, NotLimitPoints
from padic_circles.pgl2 import BoundaryPoint, classify
from padic_circles.schottky import (_necklace_key, axis_approximate, coding, core_vertices, free_reduce,
                                    high_branched_check, hull_core, is_cyclically_reduced, limit_points,
                                    primitive_root, quadruple_matrix, reduced_words, verify_schottky,
                                    word_inverse, word_text)

P = 3
O = Vertex(0, 0, 0, 0)
V1 = Vertex(1, 0, 1, 0)  # class of [[3, 1], [0, 1]]


def test_word_helpers():
    assert free_reduce((1, 2, -2, -1, 3)) == (3,)
    assert word_inverse((1, -2)) == (2, -1)
    assert is_cyclically_reduced((1, 2)) and not is_cyclically_reduced((1, 2, -1))
    assert primitive_root((1, 2, 1, 2)) == (1, 2)
    assert _necklace_key((2, 1)) == _necklace_key((1, 2)) == _necklace_key((-2, -1))
    words = list(reduced_words(2, 2))
    assert len(words) == 1 + 4 + 12 and len(set(words)) == len(words)
    assert all(free_reduce(w) == w for w in words)
    assert word_text((1, -2), ["a", "b"]) == "a b^-1" and word_text(()) == "e"


def test_example_verifies_quickly(ctx):
    from padic_circles.cli import build_group, load_config

    t = time.perf_counter()
    group = build_group(load_config(fixture="example-2.5"))
    assert time.perf_counter() - t < 30
    assert group.rank == 8
    assert all(-4 <= o <= 4 for o in group.offsets)


def test_ping_pong_halftrees_disjoint(example):
    group, _ = example
    trees = [t for _, t in group.halftrees()]
    for i, a in enumerate(trees):
        for b in trees[i + 1:]:
            assert bttree.halftrees_disjoint(a, b, P)


def test_generators_map_complements_into_halftrees(example):
    """g_i moves everything outside O-_i into O+_i."""
    group, _ = example
    sample = ball(origin(), 2, P)
    for i in range(group.rank):
        for v in sample:
            if not group.minus[i].contains(v, P):
                assert group.plus[i].contains(group.act_letter(i + 1, v), P)


def test_reduce_to_F_round_trip(example):
    group, _ = example
    rng = random.Random(30)
    fverts = [v for v in ball(origin(), 2, P) if group.in_F(v)]
    words = [w for w in reduced_words(group.rank, 3)]
    for _ in range(200):
        u = rng.choice(fverts)
        w = rng.choice(words)
        v = group.act_word(w, u)
        red, word = group.reduce_to_F(v)
        assert red == u
        assert group.act_word(word, red) == v


def test_example_core(example):
    group, core = example
    assert set(core.vertices) == {O, V1}
    assert core.degree == {O: 9, V1: 9}
    assert core.diameter() == 1 and core.is_connected()
    assert hull_core(group) == {O: 9, V1: 9}


def test_core_stabilizes_and_is_monotone(example):
    group, _ = example
    sets = [core_vertices(group, L) for L in (1, 2, 3, 4)]
    assert all(a <= b for a, b in zip(sets, sets[1:]))
    assert sets[2] == sets[3]


def test_example_is_highly_branched(example):
    group, core = example
    hb = high_branched_check(group, core)
    assert hb.condition1 and hb.condition2 and hb.verdict
    assert hb.degree_bound == P * P - P + 2 and hb.witness_bound == P * P - P + 3
    assert all(w is not None for _, _, w in hb.pair_witnesses)
    assert hb.density_witness["word"] == "g4"


def test_nonexample_fails_degree_bound(nonexample):
    group, core = nonexample
    assert core.degree[O] == 6
    hb = high_branched_check(group, core)
    assert not hb.verdict and O in hb.low_degree
    assert hull_core(group) == dict(core.degree)


def test_no_labeling_for_shared_axis(ctx):
    g = quadruple_matrix(ctx, ctx.elem(1, 1), ctx.elem(1, 2), 1, ctx.one())
    with pytest.raises(NoValidLabeling) as err:
        verify_schottky(ctx, [g, g @ g], window=2)
    assert err.value.violation is not None


def test_limit_points_and_codings(example):
    group, core = example
    pts = limit_points(group, 1)
    assert len(pts) == 2 * group.rank
    for pt, word, sign in pts:
        code = coding(group, pt, 3, core)
        expect = word[0] if sign == "+" else -word[0]
        assert code == (expect,) * 3


def test_coding_rejects_non_limit_point(example, ctx):
    group, core = example
    # at the origin only the direction toward inf misses S_Gamma, so |x| > 1
    # is outside the limit set
    outside = BoundaryPoint.finite(ctx.elem(Fraction(1, 3), 1))
    with pytest.raises(NotLimitPoints):
        coding(group, outside, 2, core)


def test_axis_approximation(example):
    group, core = example
    for i, j, radius in ((0, 1, 4), (2, 5, 4), (3, 7, 5)):
        a, b = group.data[i].fixed_plus, group.data[j].fixed_minus
        tau, window = axis_approximate(group, a, b, radius, core)
        hd = classify(group.word_matrix(tau))
        inv = hd.conjugator.inverse()
        # window vertices sit on conj.(0, inf), i.e. map to some v*_k
        for v in window:
            w = bttree.act(inv, v)
            assert w.x == 0 and w.y == 0
        assert len(window) >= radius


def test_degree_is_invariant_under_translation(example):
    """Directions at w.v holding limit points, counted from fixed points of w s w^-1."""
    group, core = example
    rng = random.Random(31)
    words = [w for w in reduced_words(group.rank, 2) if w]
    for _ in range(12):
        v = rng.choice(core.vertices)
        w = rng.choice(words)
        u = group.act_word(w, v)
        dirs = set()
        for s in words:
            hd = classify(group.word_matrix(free_reduce(w + s + word_inverse(w))))
            for pt in (hd.fixed_plus, hd.fixed_minus):
                dirs.add(bttree.ray_to_boundary(u, pt, 1, P)[1])
        assert len(dirs) == core.degree[v]
