import sys
import numpy as np
import pytest

from dsokit import Graph, gen_graph

G1_EDGES = [(0, 1, 1), (1, 3, 1), (0, 2, 2), (2, 3, 2)]


@pytest.fixture
def g1():
    return Graph.from_edges(4, G1_EDGES)


def small_graphs(count=6, n=14, m=40, wmax=6, zero_weights=True):
    """Random graphs; some with zero weights to stress tie handling."""
    out = []
    for s in range(count):
        g = gen_graph("gnm" if s % 3 else "path-chords", n, m if s % 3 else n // 2, wmax, seed=s)
        if zero_weights and s % 2:
            r = np.random.default_rng(s)
            w = np.where(r.random(g.m) < 0.3, 0, g.w)
            g = Graph.from_edges(n, list(zip(g.src.tolist(), g.dst.tolist(), w.tolist())))
        out.append(g)
    return out


def all_triples(g):
    x, e, y = (a.ravel() for a in np.meshgrid(np.arange(g.n), np.arange(g.m), np.arange(g.n), indexing="ij"))
    return x, y, e


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.SUMMARY:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.SUMMARY):
            terminalreporter.write_line(line)
