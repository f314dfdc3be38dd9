"""Hop-bounded distance sensitivity oracles.

Every oracle here answers ``query_batch(x, y, u, v)`` with a value that is
never below the true replacement distance d(x, y, (u, v)) and, with high
probability, not above the best replacement path using at most ``h`` edges.
"""
from __future__ import annotations

import math

import numpy as np

from .apsp import CenterTables, DistanceMatrix
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _cs_dijkstra

from .graph import INF, Graph
from .oracle import (CenterAssignment, Coverage, OracleTables, PathIndex, center_terms,
                     compute_bottlenecks, coverage_from_hop)
from .runtime import WorkSpanMeter, charge_parallel, clog2, parallel_for

_CHUNK = 1 << 22


def _chunks(total: int, width: int):
    step = max(1, _CHUNK // max(width, 1))
    for a in range(0, total, step):
        yield slice(a, min(total, a + step))


def _apsp_values(n, src, dst, w) -> np.ndarray:
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    # explicit zeros in a csr matrix are kept as edges by csgraph
    mat = csr_matrix((w.astype(np.float64), (src, dst)), shape=(n, n))
    d = _cs_dijkstra(mat, directed=True)
    out = np.full((n, n), INF, dtype=np.int64)
    fin = np.isfinite(d)
    out[fin] = d[fin].astype(np.int64)
    return out


class TwoHopDso:
    """Exact d^2(x, y, e) from the dense weight matrix."""

    def __init__(self, g: Graph, meter: WorkSpanMeter | None = None):
        self.n, self.h = g.n, 2
        W = g.dense_weights()
        np.fill_diagonal(W, 0)
        self.W = W
        charge_parallel(meter, g.n * g.n, 1, 1)

    def query_batch(self, x, y, u, v, meter: WorkSpanMeter | None = None):
        x, y, u, v = (np.asarray(a, dtype=np.int64) for a in (x, y, u, v))
        n, W = self.n, self.W
        out = np.empty(x.shape, dtype=np.int64)
        z = np.arange(n)
        for sl in _chunks(len(x), n):
            xs, ys, us, vs = x[sl], y[sl], u[sl], v[sl]
            cost = np.minimum(W[xs, :] + W[:, ys].T, INF)
            # drop the middle vertices whose legs use the removed edge
            cost[(us == xs)[:, None] & (z[None, :] == vs[:, None])] = INF
            cost[(vs == ys)[:, None] & (z[None, :] == us[:, None])] = INF
            out[sl] = np.where(xs == ys, 0, cost.min(axis=1))
        charge_parallel(meter, len(x), n, clog2(n) + 1)
        return out


class SampledFamilyDso:
    """Min over random edge-subsampled subgraphs that miss the queried edge.

    ``count`` subgraphs keep each edge with probability 1 - 1/h; each stores
    its full APSP. Distances inside a subgraph avoiding e are never below
    d(x, y, e), and some subgraph keeps all edges of the best h-hop
    replacement path w.h.p.
    """

    def __init__(self, g: Graph, h: int, beta: float = 1.0, seed: int = 0,
                 meter: WorkSpanMeter | None = None, max_tries: int = 8):
        n, m = g.n, g.m
        self.n, self.h = n, max(2, int(h))
        self.count = max(1, math.ceil(beta * 15 * self.h * max(1, clog2(n))))
        rng = np.random.Generator(np.random.Philox(seed))
        for _ in range(max_tries):
            keep = rng.random((self.count, m)) >= 1.0 / self.h
            if m == 0 or (~keep).any(axis=0).all():
                break
        else:
            raise RuntimeError("could not sample a family missing every edge")
        self.keep = keep
        D = np.empty((self.count, n, n), dtype=np.int64)
        lg = clog2(n) + 1

        def body(i, mm):
            k = keep[i]
            D[i] = _apsp_values(n, g.src[k], g.dst[k], g.w[k])
            # n independent Dijkstras with a binary heap
            charge_parallel(mm, n, (int(k.sum()) + n) * lg, (int(k.sum()) + n) * lg)

        parallel_for(self.count, body, meter)
        self.D = D
        absent = [np.flatnonzero(~keep[:, e]) for e in range(m)]
        width = max((len(a) for a in absent), default=1)
        self.absent = np.full((m, max(width, 1)), -1, dtype=np.int64)
        for e, a in enumerate(absent):
            self.absent[e, :len(a)] = a
        self.absent_len = np.array([len(a) for a in absent], dtype=np.int64)
        self.edge_matrix = g.edge_matrix

    def words(self) -> int:
        return self.D.size + self.absent.size

    def query_batch(self, x, y, u, v, meter: WorkSpanMeter | None = None):
        x, y, u, v = (np.asarray(a, dtype=np.int64) for a in (x, y, u, v))
        e = self.edge_matrix[u, v]
        out = np.empty(x.shape, dtype=np.int64)
        A = self.absent.shape[1]
        for sl in _chunks(len(x), A):
            idx = self.absent[e[sl]]
            vals = self.D[np.maximum(idx, 0), x[sl, None], y[sl, None]]
            vals[idx < 0] = INF
            out[sl] = np.where(x[sl] == y[sl], 0, vals.min(axis=1))
        if meter is not None and len(x):
            meter.charge(int(self.absent_len[e].sum()), clog2(A) + 1 + clog2(len(x)))
        return out


class ExtendedDso:
    """Hop range h -> ceil(3h/2) by splitting at a random hitting set.

    A path of at most 3h/2 edges has, w.h.p., a sampled vertex among its
    middle h/2 + 1 vertices; both halves then have at most h edges.
    """

    def __init__(self, base, alpha: float = 6.0, seed: int = 0, meter: WorkSpanMeter | None = None):
        n = base.n
        self.base, self.n = base, n
        self.h = math.ceil(3 * base.h / 2)
        p = min(1.0, alpha * math.log(max(n, 2)) / base.h)
        rng = np.random.Generator(np.random.Philox(seed))
        self.hubs = np.flatnonzero(rng.random(n) < p)
        charge_parallel(meter, n, 1, 1)

    def query_batch(self, x, y, u, v, meter: WorkSpanMeter | None = None):
        x, y, u, v = (np.asarray(a, dtype=np.int64) for a in (x, y, u, v))
        m0 = WorkSpanMeter()
        best = self.base.query_batch(x, y, u, v, meter=m0)
        work, span = m0.work, m0.span
        for s in self.hubs.tolist():
            sv = np.full(x.shape, s, dtype=np.int64)
            ma, mb = WorkSpanMeter(), WorkSpanMeter()
            a = self.base.query_batch(x, sv, u, v, meter=ma)
            b = self.base.query_batch(sv, y, u, v, meter=mb)
            np.minimum(best, np.minimum(a + b, INF), out=best)
            work += ma.work + mb.work + len(x)
            span = max(span, ma.span, mb.span)
        if meter is not None:
            meter.charge(work, span + clog2(len(self.hubs) + 1) + 1)
        return best


def reduce_query_time(g: Graph, hop, dm: DistanceMatrix, ct: CenterTables, ca: CenterAssignment,
                      paths: PathIndex, meter: WorkSpanMeter | None = None) -> OracleTables:
    """Tables for the same hop range as ``hop`` but with O(1) queries.

    Each interval's fallback value is the largest, over its edges e', of
    min(center terms, hop(x, y, e')); it never underestimates any edge of
    the interval and equals the interval-avoiding distance when that is
    what the query needs.
    """
    n, S = g.n, 2 * ct.K + 1
    cov = coverage_from_hop(g, ca, ct, dm, paths, hop, meter=meter)
    slot, t1, t2 = center_terms(dm, ct, cov, paths.fx, paths.fy, paths.fu, paths.fv)
    direct = hop.query_batch(paths.fx, paths.fy, paths.fu, paths.fv, meter=meter)
    cand = np.minimum(np.minimum(t1, t2), direct)
    charge_parallel(meter, len(paths), 8, 8)
    BV, DBV = compute_bottlenecks(g, paths, cand, slot, S, meter=meter)
    return OracleTables(n, ct.K, hop.h, dm, ct, cov, DBV, BV, g.src, g.dst,
                        meta={"source": type(hop).__name__})
