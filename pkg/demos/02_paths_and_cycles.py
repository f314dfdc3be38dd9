"""Replacement paths, second shortest paths and shortest cycles."""
from dsokit import (INF, PipelineConfig, ansc, build, gen_graph, mwc, rpaths, two_apsisp_direct,
                    two_apsisp_via_dso, two_sisp)

g = gen_graph("path-chords", 16, 10, 9, seed=3)
oracle = build(g, PipelineConfig("a", seed=3))

# what each edge of the 0 -> 15 route costs when it fails
prof = rpaths(g, 0, 15, "dso", oracle)
for (u, v), d in prof.as_list():
    print(f"  drop ({u},{v}): {'INF' if d >= INF else d}")
print("second shortest 0->15:", two_sisp(g, 0, 15, "dso", oracle))

# all pairs, two independent routes
d2 = two_apsisp_direct(g)
print("routes agree:", bool((d2 == two_apsisp_via_dso(g, oracle)).all()))

# shortest cycle through each vertex
print("ansc:", [("-" if c >= INF else int(c)) for c in ansc(g)])
print("mwc:", mwc(g))
