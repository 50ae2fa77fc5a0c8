from padic_circles.cli import build_group, load_config
from padic_circles.literals import parse_matrix
from padic_circles.orbits import Circle, circle_limit_census, classify_orbit, thickness_sample
from padic_circles.pgl2 import identity
from padic_circles.schottky import core_graph

# non-example: diag(1+w, 1).H meets the limit set in {0, inf} only
bad = build_group(load_config(fixture="nonexample-2.5"))
bad_core = core_graph(bad, 3)
C = Circle(parse_matrix([["1 + w", "0"], ["0", "1"]], bad.ctx))
for D in (5, 8, 11):
    print("D =", D, "rays:", circle_limit_census(C, bad, bad_core, D).ray_count)
rep = classify_orbit(C, bad, bad_core, 8, 3)
print("case", rep.case_tag, "stabilizer", rep.stabilizer_words[:2], "--", rep.label)

# Example group: the count of surviving rays of H keeps growing
group = build_group(load_config(fixture="example-2.5"))
core = core_graph(group, 3)
cen = circle_limit_census(Circle(identity(group.ctx)), group, core, 9, cap=100_000)
print("rays by depth:", cen.tally)

# unipotent returns into RF X meet every valuation shell
g = group.data[0].conjugator
wit = thickness_sample(g, group, core, 2, range(-4, 5), 8)
for l, t in sorted(wit.shells.items()):
    print(f"  shell {l:+d}: t = {t}")
print("misses:", wit.misses)
