"""Metered work and span of the three pipelines."""
from dsokit import PipelineConfig, build, gen_graph
from dsokit.toolkit import build_report

for n in (16, 32, 64):
    g = gen_graph("gnm", n, n * n // 4, 100, seed=1)
    row = [n]
    for cfg in (PipelineConfig("a"), PipelineConfig("b"), PipelineConfig("c", h=4)):
        m = build(g, cfg).meta["meter"]
        row += [m.work, m.span]
    print("n=%-3d  A work %-10d span %-8d  B work %-10d span %-6d  C(h=4) work %-10d span %d" % tuple(row))

# phase breakdown of one build
g = gen_graph("gnm", 32, 256, 100, seed=2)
print(build_report(build(g, PipelineConfig("b"))))
