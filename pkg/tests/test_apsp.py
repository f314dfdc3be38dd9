import numpy as np

from dsokit import INF, Graph, apsp, apsp_augmented, dijkstra, minplus_apsp, per_source_center_scan

from conftest import small_graphs


def test_g1_distances(g1):
    for kernel in ("dijkstra", "minplus"):
        d = apsp(g1, kernel=kernel).dist
        assert d[0, 3] == 2 and d[2, 3] == 2 and d[3, 0] == INF


def test_single_vertex_and_complete():
    assert apsp(Graph.from_edges(1, [])).dist.tolist() == [[0]]
    n = 5
    g = Graph.from_edges(n, [(u, v, 1) for u in range(n) for v in range(n) if u != v])
    d = apsp(g, kernel="minplus").dist
    assert (d == 1 - np.eye(n, dtype=int)).all()


def test_kernels_agree_including_parents():
    for g in small_graphs(6):
        a, b = apsp(g), apsp(g, kernel="minplus")
        for f in ("dist", "hops", "pred", "tin", "tout"):
            assert np.array_equal(getattr(a, f), getattr(b, f)), f
        for x in range(g.n):
            assert np.array_equal(a.pred[x], dijkstra(g, x).parent_vertex)


def _path_ct(prios):
    g = Graph.from_edges(3, [(0, 1, 1), (1, 2, 1)])
    pr = np.array(prios)
    dm, ct = apsp_augmented(g, pr)
    return g, dm, ct


def test_center_tables_on_a_path():
    _, dm, ct = _path_ct([1, 3, 1])
    assert ct.CR[0, 2, 1] == 1 and ct.CL[0, 2, 1] == 1 and ct.BCP[0, 2] == 3
    assert per_source_center_scan(dm, ct.priority).same_as(ct)


def test_center_tables_diagonal_and_all_ones():
    _, dm, ct = _path_ct([1, 2, 1])
    assert ct.CR[1, 1, 1] == 1 and ct.CR[0, 0, 1] == -1 and ct.BCP[1, 1] == 2
    _, dm, ct = _path_ct([1, 1, 1])
    assert (ct.CR[:, :, 1:] == -1).all() and (ct.CL[:, :, 1:] == -1).all()
    assert per_source_center_scan(dm, ct.priority).same_as(ct)


def test_star_peak_center():
    g = Graph.from_edges(5, [(0, v, v) for v in range(1, 5)])
    pr = np.array([3, 1, 2, 1, 1])
    dm, ct = apsp_augmented(g, pr)
    assert all(ct.BCP[0, y] == 3 for y in range(1, 5))


def test_augmented_equals_scan_random():
    r = np.random.default_rng(0)
    for g in small_graphs(6, n=16, m=50):
        K = max(1, int(np.ceil(np.log2(g.n))))
        pr = r.integers(1, K + 1, g.n)
        dm, ct = apsp_augmented(g, pr)
        assert ct.same_as(per_source_center_scan(dm, pr))
        # definition check: CR[x,y,i] is the first vertex of priority >= i on the path
        for x in range(0, g.n, 3):
            for y in range(g.n):
                p = dm.path(x, y)
                for i in range(1, K + 1):
                    hit = [v for v in p if pr[v] >= i]
                    assert ct.CR[x, y, i - 1] == (hit[0] if hit else -1)
                    assert ct.CL[x, y, i - 1] == (hit[-1] if hit else -1)
                if p:
                    assert ct.BCP[x, y] == max(pr[v] for v in p)
