from padic_circles.bttree import vertex_literal
from padic_circles.cli import build_group, load_config
from padic_circles.schottky import core_graph, core_vertices, high_branched_check, hull_core

group = build_group(load_config(fixture="example-2.5"))
print("rank", group.rank, "offsets", group.offsets)
for name, hd in zip(group.names, group.data):
    print(f"  {name}: translation length {hd.length}")

# core from word axes, then the same thing read off the ping-pong half-trees
core = core_graph(group, 3)
for v in core.vertices:
    print(vertex_literal(v, group.p), "degree", core.degree[v])
print("stable at L=3 vs 4:", core_vertices(group, 3) == core_vertices(group, 4))
print("hull_core agrees:", hull_core(group) == dict(core.degree))

hb = high_branched_check(group, core)
print("degree bound", hb.degree_bound, "witness bound", hb.witness_bound)
print("highly branched:", hb.verdict, hb.density_witness)

print(core.to_dot())
