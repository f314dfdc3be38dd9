import io

import numpy as np
import pytest

from dsokit import (INF, Graph, OracleFormatError, PipelineConfig, build, build_dso_a, build_dso_b,
                    build_dso_c, gen_graph, load_oracle, replacement_table, save_oracle)
from dsokit.pipelines import oracle_bytes

from conftest import all_triples


def answers(t, g):
    x, y, e = all_triples(g)
    return t.query_edges(x, y, e)


@pytest.mark.parametrize("cfg", [PipelineConfig("a"), PipelineConfig("b"), PipelineConfig("c", h=2),
                                 PipelineConfig("c", h=4)])
def test_g1_exact(g1, cfg):
    x, y, e = all_triples(g1)
    assert np.array_equal(answers(build(g1, cfg), g1), replacement_table(g1)[x, e, y])


def test_wrappers(g1):
    for t in (build_dso_a(g1), build_dso_b(g1), build_dso_c(g1, h=3)):
        assert t.query(0, 3, g1.edge_id(1, 3)) == 4


def test_no_edges():
    g = Graph.from_edges(5, [])
    for cfg in (PipelineConfig("a"), PipelineConfig("b"), PipelineConfig("c", h=2)):
        t = build(g, cfg)
        d = t.dm.dist
        assert (d[~np.eye(5, dtype=bool)] == INF).all()
        assert t.query_batch([0, 3], [4, 3], [0, 0], [1, 1]).tolist() == [INF, 0]


def test_c_needs_valid_h(g1):
    for h in (None, 1, 9):
        with pytest.raises(ValueError):
            build(g1, PipelineConfig("c", h=h))
    with pytest.raises(ValueError):
        PipelineConfig("z")


def test_c_with_h_equal_n_has_no_extensions():
    g = gen_graph("gnm", 12, 40, 5, seed=1)
    t = build(g, PipelineConfig("c", h=12))
    names = [c.name for c in t.meta["meter"].children]
    assert not any(n.startswith("extend") for n in names)
    assert names[-1] == "reduce-h12"


def test_pipelines_agree_on_small_graphs():
    for s in range(20):
        g = gen_graph("gnm", 8, 20, 4, seed=s)
        a = answers(build(g, PipelineConfig("a", seed=s)), g)
        b = answers(build(g, PipelineConfig("b", seed=s)), g)
        assert np.array_equal(a, b), s


def test_c_agrees_across_h():
    g = gen_graph("gnm", 16, 48, 6, seed=2)
    outs = [answers(build(g, PipelineConfig("c", h=h, seed=3)), g) for h in (2, 4, 8)]
    assert np.array_equal(outs[0], outs[1]) and np.array_equal(outs[1], outs[2])


def test_builds_are_byte_identical():
    g = gen_graph("path-chords", 14, 7, 5, seed=4)
    for cfg in (PipelineConfig("a", seed=5), PipelineConfig("b", seed=5), PipelineConfig("c", h=3, seed=5)):
        assert oracle_bytes(build(g, cfg)) == oracle_bytes(build(g, cfg))


def test_round_trip(g1, tmp_path):
    t = build(g1, PipelineConfig("b", seed=1))
    path = tmp_path / "g1.dso"
    save_oracle(t, path)
    back = load_oracle(path, g1)
    assert np.array_equal(answers(back, g1), answers(t, g1))
    assert oracle_bytes(back) == path.read_bytes()
    assert back.meta["pipeline"] == "b" and back.meta["seed"] == 1


def test_load_rejections(g1):
    data = oracle_bytes(build(g1, PipelineConfig("a")))
    with pytest.raises(OracleFormatError, match="magic"):
        load_oracle(io.BytesIO(b"X" + data[1:]))
    with pytest.raises(OracleFormatError, match="version"):
        load_oracle(io.BytesIO(data[:8] + b"\x09" + data[9:]))
    with pytest.raises(OracleFormatError, match="fingerprint"):
        load_oracle(io.BytesIO(data), Graph.from_edges(4, [(0, 1, 1)]))
    with pytest.raises(OracleFormatError, match="truncat"):
        load_oracle(io.BytesIO(data[:-10]))
    flipped = bytearray(data)
    flipped[-3] ^= 1
    with pytest.raises(OracleFormatError, match="checksum"):
        load_oracle(io.BytesIO(bytes(flipped)))


def test_audit_recorded(g1):
    t = build(g1, PipelineConfig("a"))
    assert t.meta["accepted"] and t.meta["audit_mismatches"] == 0
    bad = build(gen_graph("path-chords", 20, 4, 5, seed=0), PipelineConfig("a", gamma=0.01, max_retries=1))
    assert not bad.meta["accepted"] and bad.meta["attempt"] == 1
