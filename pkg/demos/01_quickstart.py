"""Build an oracle, ask what happens when a link fails."""
import numpy as np

from dsokit import PipelineConfig, build, gen_graph, load_graph, replacement_table

# a tiny diamond: two routes from 0 to 3
g = load_graph("4 4\n0 1 1\n1 3 1\n0 2 2\n2 3 2\n")
oracle = build(g, PipelineConfig("a", seed=1))

e = g.edge_id(1, 3)
print("d(0,3)            =", oracle.query(0, 3, g.edge_id(0, 2)))  # off the shortest path: unchanged
print("d(0,3) w/o (1,3)  =", oracle.query(0, 3, e))                # detour through 2

# a bigger random graph, every answer checked against brute force
g = gen_graph("gnm", 30, 150, 20, seed=7)
oracle = build(g, PipelineConfig("b", seed=7))
x, e, y = (a.ravel() for a in np.meshgrid(np.arange(g.n), np.arange(g.m), np.arange(g.n), indexing="ij"))
vals, lookups = oracle.query_edges(x, y, e, count=True)
print("queries:", len(vals), "wrong:", int((vals != replacement_table(g)[x, e, y]).sum()),
      "max lookups:", int(lookups.max()))
print("stored words:", oracle.words())
