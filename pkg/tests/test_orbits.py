import random
from fractions import Fraction

import pytest

from padic_circles import bttree
from padic_circles.bttree import Vertex, origin
from padic_circles.errors import DegenerateBall
from padic_circles.literals import parse_matrix
from padic_circles.orbits import (EVIDENCE_LABEL, Circle, circle_limit_census, classify_orbit, gamma_C_v,
                                  hausdorff_circle_distance, polybound_property, project_subtree,
                                  rf_membership, stabilizer_search, thickness_sample)
from padic_circles.padic import vp_int
from padic_circles.pgl2 import diag, identity, unipotent

from .oracles import naive_census

P = 3


def _vq(q):
    return vp_int(q.numerator, P) - vp_int(q.denominator, P)


def probe_circle(ctx):
    return Circle(parse_matrix([["1 + w", "0"], ["0", "1"]], ctx))


def test_circle_hull_membership(ctx):
    H = Circle(identity(ctx))
    assert H.contains_vertex(origin()) and H.contains_vertex(Vertex(3, 0, 5, 0))
    assert not H.contains_vertex(Vertex(1, 0, 0, 1))
    assert H.same(Circle(diag(ctx.elem(9), 1, ctx)))
    assert not H.same(probe_circle(ctx))
    # a G2 representative is moved to G1 without changing the coset
    g2 = parse_matrix([["1", "1"], ["1", "0"]], ctx)
    assert Circle(g2).same(H) and Circle(g2).rep.canonical_class == "G1"


def test_rf_membership(example, ctx):
    group, core = example
    for hd in group.data:
        assert rf_membership(hd.conjugator, group, core, 8)
    res = rf_membership(identity(ctx), group, core, 8)
    assert not res and res.certificate["kind"] == "exit"


def test_census_fast_path_matches_naive_reduction(example, nonexample, ctx):
    for (group, core), circle in ((example, Circle(identity(ctx))), (nonexample, probe_circle(ctx)),
                                  (example, probe_circle(ctx))):
        got = circle_limit_census(circle, group, core, 5)
        assert got.tally == naive_census(circle, group, core, 5)


def test_nonexample_probe_two_rays(nonexample, ctx):
    group, core = nonexample
    C = probe_circle(ctx)
    for D in (5, 6, 7):
        cen = circle_limit_census(C, group, core, D)
        assert cen.ray_count == 2 and cen.verdict == "ProperNonempty"
    rep = classify_orbit(C, group, core, 6, 3)
    assert rep.case_tag == 3 and "g'" in rep.stabilizer_words
    assert rep.label == EVIDENCE_LABEL
    pts = next(c for c in rep.certificates if c["kind"] == "rays")["points"]
    assert sorted(pts) == ["0", "inf"]


def test_example_census_grows(example, ctx):
    group, core = example
    cen = circle_limit_census(Circle(identity(ctx)), group, core, 7)
    assert all(a < b for a, b in zip(cen.tally, cen.tally[1:]))


def test_empty_census_has_exit_certificate(example, ctx):
    group, core = example
    far = Circle(unipotent(ctx.elem(0, Fraction(1, P**5))))
    cen = circle_limit_census(far, group, core, 6)
    assert cen.verdict == "Empty" and cen.certificates and cen.certificates[0]["kind"] == "exit"
    assert classify_orbit(far, group, core, 6, 2).case_tag == 1


def test_stabilizer_and_gamma_C_v(nonexample, ctx):
    group, core = nonexample
    C = probe_circle(ctx)
    stab = stabilizer_search(C, group, 2)
    gp = group.names.index("g'") + 1
    assert set(stab) == {(gp,), (-gp,), (gp, gp), (-gp, -gp)}
    words = gamma_C_v(C, C.from_frame(origin()), group, 2)
    assert words[0] == ()
    circles = [C.translate(group.word_matrix(w)) for w in words]
    assert all(not a.same(b) for i, a in enumerate(circles) for b in circles[i + 1:])


def test_thickness_witnesses(example, ctx):
    group, core = example
    K = 2
    for hd in group.data[:3]:
        g = hd.conjugator
        wit = thickness_sample(g, group, core, K, range(-8, 9), 10)
        assert wit.complete
        for l, t in wit.shells.items():
            assert -(K + l) <= _vq(t) < -l
            # both endpoints of g.u_t lie in the limit set to the probed depth
            assert rf_membership(g @ unipotent(ctx.elem(t)), group, core, 6)


def test_hausdorff_distance(ctx):
    H = Circle(identity(ctx))
    d = hausdorff_circle_distance(H, H)
    assert d.value == 0 and not d.resolved
    shifted = Circle(unipotent(ctx.elem(0, P**3)))
    d = hausdorff_circle_distance(H, shifted)
    assert d.resolved and d.value == Fraction(1, P**3)
    assert hausdorff_circle_distance(shifted, H).value == d.value
    assert hausdorff_circle_distance(H, probe_circle(ctx)).value == 1


def test_projection_cases(example, nonexample, ctx):
    group, core = nonexample
    pr = project_subtree(probe_circle(ctx).rep, group, core, 4)
    assert pr.case_tag == 3
    g, c = example
    far = project_subtree(unipotent(ctx.elem(0, Fraction(1, P**5))), g, c, 3)
    assert far.case_tag == 1 and far.regular
    js = far.to_json(P)
    assert js["label"] == EVIDENCE_LABEL and js["case_tag"] == 1


# -- polynomial bound -------------------------------------------------------------


def _thick_set(rng, K, m):
    T = []
    for l in range(-m - 1, m + K + 2):
        v = rng.randint(-(K + l), -l - 1)
        T.append(Fraction(rng.choice([1, 2, 4, 5, 7, 8]), 1) * Fraction(P) ** v)
    return T


def test_polybound_random_instances():
    rng = random.Random(40)
    for _ in range(200):
        d = rng.randint(1, 4)
        K = rng.randint(1, 3)
        m = rng.randint(1, 6)
        coeffs = [(rng.randint(-20, 20) * P ** rng.randint(0, 2), rng.randint(-20, 20)) for _ in range(d)]
        coeffs.append((rng.choice([1, 2, 4, 5]), rng.choice([0, 3, 6])))
        res = polybound_property(coeffs, _thick_set(rng, K, m), K, m, P)
        assert res.holds


def test_polybound_tightness():
    # T meets B_m only at |t| = p^(m-K): the factor p^(-dK) is attained
    for d, K, m in ((1, 1, 3), (2, 2, 4), (3, 1, 2), (4, 2, 5)):
        T = [Fraction(P) ** (K - m), Fraction(P) ** (-m - 3)]
        res = polybound_property([(0, 0)] * d + [(1, 0)], T, K, m, P)
        assert res.holds and res.lhs == res.rhs
        assert res.ratio == Fraction(1, P ** (d * K))


def test_polybound_rejects_degenerate_input():
    with pytest.raises(DegenerateBall):
        polybound_property([(1, 0)], [Fraction(1)], 1, 1, P)
    with pytest.raises(DegenerateBall):
        polybound_property([(0, 0), (1, 0)], [Fraction(1, P**9)], 1, 2, P)
