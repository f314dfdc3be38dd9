import math

import numpy as np
import pytest

from dsokit import (INF, Graph, apsp, assign_priorities, build_interval_directory, dijkstra,
                    per_source_center_scan, replacement_table)
from dsokit.oracle import (CenterAssignment, PathIndex, center_terms, compute_bottlenecks, compute_coverage,
                           compute_dbv_auxiliary, compute_dbv_reference, coverage_layout)
from dsokit.pipelines import build_tables_a

from conftest import all_triples, small_graphs


def _parts(g, pr, gamma=4.0):
    ca = CenterAssignment(np.asarray(pr, dtype=np.int64), 0, gamma)
    dm = apsp(g)
    ct = per_source_center_scan(dm, ca.priority)
    fwd = [dijkstra(g, s) for s in range(g.n)]
    rev = [dijkstra(g, s, reversed=True) for s in range(g.n)]
    return ca, dm, ct, fwd, rev


def test_priorities_small_and_deterministic():
    assert assign_priorities(1, 5).priority.tolist() == [1]
    a, b = assign_priorities(500, 9), assign_priorities(500, 9)
    assert np.array_equal(a.priority, b.priority)
    assert a.priority.min() >= 1 and a.priority.max() <= a.K


def test_priority_level_counts_large_n():
    n = 1 << 20
    pr = assign_priorities(n, 2024).priority
    for k in range(1, 11):
        c = int((pr == k).sum())
        assert n / 2 ** (k + 1) <= c <= 3 * n / 2 ** (k + 1), (k, c)


def test_cover_depth_formula():
    ca = assign_priorities(64, 0, gamma=4.0)
    assert ca.cover_depth(3) == math.ceil(4 * 8 * math.log(64))


def test_g1_coverage_entry(g1):
    ca, dm, ct, fwd, rev = _parts(g1, [2, 1, 1, 1], gamma=10)
    cov = compute_coverage(g1, ca, ct, dm, fwd, rev)
    # edge (1,3) is the second edge of P_03
    assert cov.forward(0, 3, 2) == 4
    ca, dm, ct, fwd, rev = _parts(Graph.from_edges(3, [(1, 2, 1)]), [2, 1, 1])
    cov = compute_coverage(Graph.from_edges(3, [(1, 2, 1)]), ca, ct, dm, fwd, rev)
    assert cov.flen[0].sum() == 0


def test_coverage_completeness_all_priority_one():
    for g in small_graphs(4, n=24, m=60):
        ca, dm, ct, fwd, rev = _parts(g, [1] * g.n, gamma=50)
        flen, rlen = coverage_layout(dm, ct, ca)
        L = np.maximum(dm.hops, 0)
        assert (flen == L).all() and (rlen == L.T).all()


def test_interval_directory_examples():
    g = Graph.from_edges(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)])
    _, dm, ct, _, _ = _parts(g, [1, 2, 3, 1])
    bounds, iv = build_interval_directory(0, 3, ct, dm)
    assert bounds == [0, 1, 2, 3] and len(iv) == 3
    assert len({s for s, *_ in iv}) == 3
    bounds, iv = build_interval_directory(0, 1, ct, dm)
    assert bounds == [0, 1] and len(iv) == 1
    assert build_interval_directory(2, 2, ct, dm) == ([], [])
    assert build_interval_directory(3, 0, ct, dm) == ([], [])


def test_interval_directory_monotone_random():
    r = np.random.default_rng(1)
    for g in small_graphs(4, n=20, m=50):
        pr = r.integers(1, 6, g.n)
        _, dm, ct, _, _ = _parts(g, pr)
        for x in range(g.n):
            for y in range(g.n):
                bounds, iv = build_interval_directory(x, y, ct, dm)
                if not bounds:
                    continue
                p = [pr[v] for v in bounds]
                peak = p.index(max(p))
                assert all(a < b for a, b in zip(p[:peak], p[1:peak + 1]))
                top = len(p) - 1 - p[::-1].index(max(p))
                assert all(a > b for a, b in zip(p[top:], p[top + 1:]))
                assert len({s for s, *_ in iv}) == len(iv) <= 2 * ct.K + 1
                assert sum(hi - lo + 1 for *_, lo, hi in iv) == dm.hops[x, y]


def _g1_single_interval(g1):
    ca, dm, ct, fwd, rev = _parts(g1, [2, 1, 1, 2], gamma=10)
    paths = PathIndex(dm)
    cov = compute_coverage(g1, ca, ct, dm, fwd, rev)
    slot, t1, t2 = center_terms(dm, ct, cov, paths.fx, paths.fy, paths.fu, paths.fv)
    return ca, dm, ct, fwd, rev, paths, slot, np.minimum(t1, t2)


def test_g1_bottleneck_tie_goes_to_first_edge(g1):
    ca, dm, ct, fwd, rev, paths, slot, cand = _g1_single_interval(g1)
    sl = paths.entries(0, 3)
    assert cand[sl].tolist() == [4, 4]
    assert len(set(slot[sl].tolist())) == 1
    BV, _ = compute_bottlenecks(g1, paths, cand, slot, 2 * ct.K + 1)
    assert BV[0, 3, slot[sl][0]] == g1.edge_id(0, 1)


def test_g1_dbv_whole_path(g1):
    ca, dm, ct, fwd, rev, paths, slot, cand = _g1_single_interval(g1)
    S = 2 * ct.K + 1
    ref = compute_dbv_reference(g1, paths, slot, S)
    aux = compute_dbv_auxiliary(g1, dm, ct, paths, slot, S, fwd, rev)
    s = slot[paths.entries(0, 3)][0]
    assert ref[0, 3, s] == 4
    assert np.array_equal(ref, aux)
    # 1 -> 3 has one edge and no detour
    assert ref[1, 3, slot[paths.entries(1, 3)][0]] == INF


def test_dbv_auxiliary_equals_reference_random():
    for seed in range(8):
        g = small_graphs(8, n=24, m=70)[seed]
        ca = assign_priorities(g.n, seed)
        ca2, dm, ct, fwd, rev = _parts(g, ca.priority)
        paths = PathIndex(dm)
        cov = compute_coverage(g, ca2, ct, dm, fwd, rev)
        slot, _, _ = center_terms(dm, ct, cov, paths.fx, paths.fy, paths.fu, paths.fv)
        S = 2 * ct.K + 1
        assert np.array_equal(compute_dbv_reference(g, paths, slot, S),
                              compute_dbv_auxiliary(g, dm, ct, paths, slot, S, fwd, rev))


def test_query_g1(g1):
    t = build_tables_a(g1, assign_priorities(4, 0))
    assert t.query(0, 3, g1.edge_id(1, 3)) == 4
    assert t.query(0, 3, g1.edge_id(2, 3)) == 2
    assert t.query(2, 2, 0) == 0
    with pytest.raises(IndexError):
        t.query(0, 9, 0)
    with pytest.raises(IndexError):
        t.query(0, 1, 99)


def test_query_exact_and_bounded_lookups():
    for seed, g in enumerate(small_graphs(6, n=18, m=55)):
        t = build_tables_a(g, assign_priorities(g.n, seed))
        x, y, e = all_triples(g)
        got, looks = t.query_edges(x, y, e, count=True)
        assert np.array_equal(got, replacement_table(g)[x, e, y])
        assert looks.max() <= 12


def test_empty_graph_queries():
    g = Graph.from_edges(4, [])
    t = build_tables_a(g, assign_priorities(4, 0))
    q = t.query_batch([0, 1, 2], [1, 1, 3], [0, 0, 0], [1, 1, 1])
    assert q.tolist() == [INF, 0, INF]
