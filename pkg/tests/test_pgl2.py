import random
from fractions import Fraction

import pytest

from padic_circles import bttree
from padic_circles.padic import ExtScalar
from padic_circles.errors import DegenerateFrame, PrecisionExhausted, SingularMatrix
from padic_circles.pgl2 import (BoundaryPoint, Frame, canonicalize, classify, diag, distance, frame_of,
                                frame_to_matrix, hyperbolic_from_data, identity, matrix, mobius, unipotent)

from .oracles import min_displacement

P = 3


def _rand_scalar(ctx, rng, lo=0):
    while True:
        x = ctx.elem(rng.randint(-500, 500) * P**lo, rng.randint(-500, 500) * P**lo)
        if not x.is_zero():
            return x


def _rand_matrix(ctx, rng, integral_unit_det=False):
    while True:
        rows = [[_rand_scalar(ctx, rng) for _ in range(2)] for _ in range(2)]
        a, b = rows[0]
        c, d = rows[1]
        det = a * d - b * c
        if det.is_zero():
            continue
        if integral_unit_det and not det.is_unit():
            continue
        return canonicalize(rows)


def _inf():
    return BoundaryPoint.infinity()


def _pt(x):
    return BoundaryPoint.finite(x)


def test_canonical_forms(ctx):
    assert canonicalize([[ctx.elem(2), ctx.zero()], [ctx.zero(), ctx.elem(2)]]).is_identity()
    g = matrix(ctx, [[0, 3], [1, 0]])
    assert g.canonical_class == "G2"
    assert g.m11.is_zero() and g.m12 == ctx.one() and g.m21 == ctx.elem(Fraction(1, 3)) and g.m22.is_zero()
    again = canonicalize([[g.m11, g.m12], [g.m21, g.m22]])
    assert again == g and again.canonical_class == "G2"
    with pytest.raises(SingularMatrix):
        matrix(ctx, [[1, 2], [2, 4]])


def test_distance_matches_entrywise_norm(ctx):
    rng = random.Random(11)
    for _ in range(20):
        g, h = _rand_matrix(ctx, rng), _rand_matrix(ctx, rng)
        expect = max((x - y).norm_abs() for x, y in zip(g.entries, h.entries))
        assert distance(g, h) == expect
        assert distance(g, h) == distance(h, g)
        assert distance(g, g) == 0


def test_metric_is_ultrametric(ctx):
    rng = random.Random(12)
    for _ in range(30):
        g, h, k = (_rand_matrix(ctx, rng) for _ in range(3))
        if {g.canonical_class, h.canonical_class, k.canonical_class} != {"G1"}:
            continue
        assert distance(g, k) <= max(distance(g, h), distance(h, k))


def test_mobius_basics(ctx):
    rng = random.Random(13)
    e = identity(ctx)
    for _ in range(20):
        x = _rand_scalar(ctx, rng, lo=-2)
        assert mobius(e, _pt(x)) == _pt(x)
    t = _rand_scalar(ctx, rng)
    assert mobius(unipotent(t), _pt(ctx.zero())) == _pt(t)
    d = diag(ctx.elem(Fraction(2, 9)), 1, ctx)
    assert mobius(d, _inf()).is_infinity
    assert mobius(d, _pt(ctx.zero())) == _pt(ctx.zero())


def test_mobius_pole_and_total_cancellation(ctx):
    g = matrix(ctx, [[1, 0], [1, -1]])
    assert mobius(g, _pt(ctx.one())).is_infinity
    # a point known to 5 digits, 10 digits away from the pole and the zero
    h = matrix(ctx, [[1, -1], [1, -1 + P**10]])
    rough = ExtScalar(ctx, 0, 1, 0, 5)
    with pytest.raises(PrecisionExhausted):
        mobius(h, _pt(rough))


def test_frames(ctx):
    zero, one = _pt(ctx.zero()), _pt(ctx.one())
    assert frame_to_matrix(Frame(zero, _inf(), one)).is_identity()
    x = ctx.elem(7, 2)
    u = frame_to_matrix(Frame(_pt(x), _inf(), _pt(x + 1)))
    assert u == unipotent(x)
    with pytest.raises(DegenerateFrame):
        Frame(zero, zero, one)


def test_frame_round_trip(ctx):
    rng = random.Random(14)
    for _ in range(100):
        g = _rand_matrix(ctx, rng)
        f = frame_of(g)
        h = frame_to_matrix(f)
        assert distance(g, h) == 0
        assert mobius(h, _pt(ctx.zero())) == f.x and mobius(h, _inf()) == f.y and mobius(h, _pt(ctx.one())) == f.z


def test_frame_from_fixed_points(ctx):
    g = canonicalize([[ctx.one(), ctx.omega], [ctx.elem(3), ctx.one()]]) @ diag(ctx.elem(Fraction(1, 9)), 1, ctx) @ canonicalize([[ctx.one(), ctx.omega], [ctx.elem(3), ctx.one()]]).inverse()
    hd = classify(g)
    f = Frame(hd.fixed_minus, hd.fixed_plus, _pt(ctx.elem(5)))
    h = frame_to_matrix(f)
    assert mobius(h, _pt(ctx.zero())) == hd.fixed_minus
    assert mobius(h, _inf()) == hd.fixed_plus


def test_classify_diagonal(ctx):
    u = ctx.elem(1, 1)
    hd = classify(diag(u / ctx.elem(9), 1, ctx))
    assert hd.length == 2
    assert hd.fixed_minus == _pt(ctx.zero()) and hd.fixed_plus.is_infinity
    assert not classify(unipotent(ctx.one()))
    assert not classify(matrix(ctx, [[0, 1], [-1, 0]]))


def test_classify_round_trip_and_conjugation(ctx):
    rng = random.Random(15)
    for _ in range(40):
        h = _rand_matrix(ctx, rng)
        n = rng.randint(1, 3)
        u = _rand_scalar(ctx, rng)
        while not u.is_unit():
            u = _rand_scalar(ctx, rng)
        g = hyperbolic_from_data(h, n, u)
        hd = classify(g)
        assert hd.length == n
        assert mobius(hd.conjugator, _pt(ctx.zero())) == hd.fixed_minus
        assert mobius(hd.conjugator, _inf()) == hd.fixed_plus
        assert distance(hyperbolic_from_data(hd.conjugator, hd.length, hd.unit), g) == 0
        assert hd.fixed_plus == mobius(h, _inf()) and hd.fixed_minus == mobius(h, _pt(ctx.zero()))


def test_translation_length_matches_displacement(ctx):
    """classify's length against min d(v, g.v) over a ball meeting the axis."""
    rng = random.Random(16)
    origin = bttree.origin()
    checked = 0
    while checked < 100:
        h = _rand_matrix(ctx, rng, integral_unit_det=rng.random() < 0.7)
        n = rng.randint(1, 3)
        u = ctx.elem(1 + 3 * rng.randint(0, 100), rng.randint(0, 2))
        g = hyperbolic_from_data(h, n, u)
        # the axis passes through h.v*_0; a ball around v*_0 reaching it suffices
        reach = bttree.distance(origin, bttree.act(h, origin), P)
        if reach > 2:
            continue
        assert classify(g).length == min_displacement(bttree.act, g, origin, P, reach + 1)
        checked += 1
