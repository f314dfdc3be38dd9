import numpy as np

from dsokit import INF, ExtendedDso, Graph, SampledFamilyDso, TwoHopDso, gen_graph, reduce_query_time
from dsokit.apsp import apsp_augmented
from dsokit.graph import hop_limited_bruteforce, replacement_table
from dsokit.oracle import PathIndex, assign_priorities
from dsokit.runtime import WorkSpanMeter

from conftest import all_triples


def hop_table(g, h):
    """d_h(x, y, e) by h-round Bellman-Ford on G - e, shape [x, e, y]."""
    out = np.empty((g.n, g.m, g.n), dtype=np.int64)
    for e in range(g.m):
        for x in range(g.n):
            for y in range(g.n):
                out[x, e, y] = hop_limited_bruteforce(g, x, y, e, h)
    return out


def _q(dso, g, x, y, e):
    return dso.query_batch(x, y, g.src[e], g.dst[e])


def test_two_hop_examples(g1):
    d = TwoHopDso(g1)
    assert _q(d, g1, [0], [3], [g1.edge_id(1, 3)])[0] == 4
    assert _q(d, g1, [3], [0], [0])[0] == INF
    assert _q(d, g1, [2], [2], [0])[0] == 0


def test_two_hop_equals_bruteforce():
    g = gen_graph("gnm", 9, 30, 5, seed=2)
    x, y, e = all_triples(g)
    assert np.array_equal(_q(TwoHopDso(g), g, x, y, e), hop_table(g, 2)[x, e, y])


def test_family_determinism_and_g1(g1):
    a, b = SampledFamilyDso(g1, 2, seed=4), SampledFamilyDso(g1, 2, seed=4)
    assert np.array_equal(a.keep, b.keep)
    assert a.count == int(np.ceil(15 * 2 * 2))
    assert (~a.keep).any(axis=0).all()
    assert _q(a, g1, [0], [3], [g1.edge_id(1, 3)])[0] == 4
    assert _q(a, g1, [1], [1], [0])[0] == 0


def test_family_charges_absence_list():
    g = gen_graph("gnm", 8, 20, 5, seed=1)
    fam = SampledFamilyDso(g, 3, seed=0)
    m = WorkSpanMeter()
    _q(fam, g, [0], [5], [7])
    fam.query_batch([0], [5], [g.src[7]], [g.dst[7]], meter=m)
    assert m.work == int((~fam.keep[:, 7]).sum())


def test_family_sandwich_over_seeds():
    g = gen_graph("gnm", 10, 30, 5, seed=3)
    x, y, e = all_triples(g)
    true, dh = replacement_table(g)[x, e, y], hop_table(g, 3)[x, e, y]
    hits = 0
    for s in range(20):
        v = _q(SampledFamilyDso(g, 3, seed=s), g, x, y, e)
        assert (v >= true).all()
        hits += bool((v <= dh).all())
    assert hits >= 19


def test_extension_on_unit_path():
    g = Graph.from_edges(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])
    ext = ExtendedDso(TwoHopDso(g), alpha=1e6, seed=0)
    assert ext.h == 3 and len(ext.hubs) == 4
    assert _q(ext, g, [0], [3], [g.edge_id(3, 0)])[0] == 3
    assert _q(ext, g, [2], [2], [0])[0] == 0


def test_extension_full_sample_is_exact_hop():
    g = gen_graph("path-chords", 10, 6, 4, seed=5)
    x, y, e = all_triples(g)
    base = TwoHopDso(g)
    v = _q(ExtendedDso(base, alpha=1e6), g, x, y, e)
    # splitting at any hub allows up to 2h edges, so v lies between d_4 and d_3
    assert (v <= hop_table(g, 3)[x, e, y]).all()
    assert np.array_equal(v, hop_table(g, 4)[x, e, y])
    assert (v <= _q(base, g, x, y, e)).all()


def _shared(g, seed=0):
    ca = assign_priorities(g.n, seed)
    dm, ct = apsp_augmented(g, ca.priority)
    return dm, ct, ca, PathIndex(dm)


def test_reduce_two_hop_g1_sandwich(g1):
    x, y, e = all_triples(g1)
    t = reduce_query_time(g1, TwoHopDso(g1), *_shared(g1))
    v, looks = t.query_batch(x, y, g1.src[e], g1.dst[e], count=True)
    true = replacement_table(g1)[x, e, y]
    assert (v >= true).all() and (v <= hop_table(g1, 2)[x, e, y]).all()
    assert np.array_equal(v, true)  # G1 paths have at most two edges
    assert looks.max() <= 12


def test_reduce_of_exact_input_is_identity():
    g = gen_graph("gnm", 12, 40, 6, seed=7)
    shared = _shared(g, 1)
    full = ExtendedDso(SampledFamilyDso(g, 12, seed=3), alpha=1e6)
    t = reduce_query_time(g, full, *shared)
    x, y, e = all_triples(g)
    assert np.array_equal(_q(t, g, x, y, e), _q(full, g, x, y, e))


def test_reduce_empty_graph():
    g = Graph.from_edges(3, [])
    t = reduce_query_time(g, TwoHopDso(g), *_shared(g))
    assert t.query_batch([0, 1], [2, 1], [0, 0], [1, 1]).tolist() == [INF, 0]


def test_stage_chain_sandwich_and_telescoping():
    for s in range(10):
        g = gen_graph("path-chords", 16, 8, 5, seed=s)
        x, y, e = all_triples(g)
        true = replacement_table(g)[x, e, y]
        shared = _shared(g, s)
        stage = reduce_query_time(g, TwoHopDso(g), *shared)
        while stage.h < g.n:
            ext = ExtendedDso(stage, seed=s)
            nxt = reduce_query_time(g, ext, *shared)
            v_prev, v_ext, v = _q(stage, g, x, y, e), _q(ext, g, x, y, e), _q(nxt, g, x, y, e)
            assert (v_ext <= v_prev).all()
            assert (v >= true).all() and (v <= hop_table(g, nxt.h)[x, e, y]).all()
            stage = nxt
        assert np.array_equal(_q(stage, g, x, y, e), true)
