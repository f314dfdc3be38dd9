"""Replacement paths, second simple shortest paths and shortest cycles."""
from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .apsp import NONE, apsp
from .graph import INF, Graph, dijkstra, excluded_sssp, replacement_distance_bruteforce
from .oracle import OracleTables, PathIndex
from .runtime import WorkSpanMeter, clog2, parallel_for


@dataclass(frozen=True)
class ReplacementProfile:
    source: int
    target: int
    edges: tuple[tuple[int, int], ...]
    values: tuple[int, ...]
    reachable: bool

    @property
    def second_distance(self) -> int:
        """min over the profile; INF when empty."""
        return min(self.values, default=INF)

    def as_list(self):
        return list(zip(self.edges, self.values))


def rpaths(g: Graph, s: int, t: int, mode: str = "brute", oracle: OracleTables | None = None
           ) -> ReplacementProfile:
    """d(s, t, e) for every edge e of the canonical s->t path."""
    if mode not in ("brute", "dso"):
        raise ValueError("mode must be 'brute' or 'dso'")
    tree = dijkstra(g, s)
    if tree.dist[t] >= INF:
        return ReplacementProfile(s, t, (), (), False)
    eids = tree.path_edges(t)
    edges = tuple((int(g.src[e]), int(g.dst[e])) for e in eids)
    if mode == "brute":
        vals = tuple(replacement_distance_bruteforce(g, s, t, e) for e in eids)
    else:
        if oracle is None:
            raise ValueError("dso mode needs an oracle")
        k = len(eids)
        vals = tuple(int(v) for v in oracle.query_edges([s] * k, [t] * k, eids)) if k else ()
    return ReplacementProfile(s, t, edges, vals, True)


def two_sisp(g: Graph, s: int, t: int, mode: str = "brute", oracle: OracleTables | None = None) -> int:
    """Second shortest s->t distance as the best single-edge replacement."""
    return rpaths(g, s, t, mode, oracle).second_distance


def two_apsisp_direct(g: Graph, meter: WorkSpanMeter | None = None) -> np.ndarray:
    """All-pairs d2 via first-edge exclusion plus a per-target extraction loop.

    d2(x, y) = min(d(x, y, (x, a)), w(x, a) + d2(a, y)) where a follows x on
    the canonical path; the second branch is settled in increasing order
    out of one heap per target.
    """
    n = g.n
    trees = [None] * n
    first = np.full((n, n), INF, dtype=np.int64)  # d(x, y, first edge of P_xy)

    def per_source(x, m):
        tr = dijkstra(g, x, meter=m)
        trees[x] = tr
        kids = [v for v in range(n) if v != x and tr.parent_vertex[v] == x]
        res = excluded_sssp(g, tr, [int(tr.parent[v]) for v in kids], meter=m)
        for (y, _e), d in res.items():
            first[x, y] = d

    parallel_for(n, per_source, meter)
    nxt = np.full((n, n), NONE, dtype=np.int64)
    for x, tr in enumerate(trees):
        # first hop: ancestor at depth one
        for v in tr.order[1:].tolist():
            pv = int(tr.parent_vertex[v])
            nxt[x, v] = v if pv == x else nxt[x, pv]
    W = {(int(u), int(v)): int(w) for u, v, w in zip(g.src, g.dst, g.w)}
    d2 = np.full((n, n), INF, dtype=np.int64)

    def per_target(y, m):
        ext: dict[int, list[int]] = {}
        heap = []
        for x in range(n):
            a = int(nxt[x, y])
            if x == y or a == NONE:
                continue
            ext.setdefault(a, []).append(x)
            if a != y and first[a, y] < INF:
                heap.append((W[x, a] + int(first[a, y]), x))
        heapq.heapify(heap)
        done = set()
        work = len(heap)
        while heap:
            D, x = heapq.heappop(heap)
            work += clog2(len(heap) + 1) + 1
            if x in done:
                continue
            done.add(x)
            star = int(first[x, y])
            if D >= star:
                d2[x, y] = star
                continue
            d2[x, y] = D
            for x2 in ext.get(x, ()):
                if x2 not in done:
                    heapq.heappush(heap, (min(W[x2, x] + D, INF), x2))
        for x in range(n):
            if x != y and x not in done and nxt[x, y] != NONE:
                d2[x, y] = first[x, y]
        m.charge(work)

    parallel_for(n, per_target, meter)
    return d2


def two_apsisp_via_dso(g: Graph, oracle: OracleTables) -> np.ndarray:
    """d2 matrix as the minimum oracle answer along each canonical path."""
    n = g.n
    paths = PathIndex(oracle.dm)
    d2 = np.full((n, n), INF, dtype=np.int64)
    if len(paths) == 0:
        return d2
    vals = oracle.query_batch(paths.fx, paths.fy, paths.fu, paths.fv)
    starts = paths.off.ravel()
    has = paths.L.ravel() > 0
    red = np.minimum.reduceat(vals, starts[has])
    d2.ravel()[np.flatnonzero(has)] = red
    return d2


def bruteforce_d2(g: Graph) -> np.ndarray:
    """min over canonical-path edges of the per-edge replacement distance."""
    n = g.n
    d2 = np.full((n, n), INF, dtype=np.int64)
    for x in range(n):
        tr = dijkstra(g, x)
        for y in range(n):
            if y != x and tr.dist[y] < INF:
                d2[x, y] = min(replacement_distance_bruteforce(g, x, y, e) for e in tr.path_edges(y))
    return d2


def ansc(g: Graph, dist: np.ndarray | None = None) -> np.ndarray:
    """Weight of the shortest cycle through each vertex (INF if none)."""
    if dist is None:
        dist = apsp(g).dist
    out = np.full(g.n, INF, dtype=np.int64)
    if g.m:
        through = np.minimum(dist[g.dst, g.src] + g.w, INF)
        np.minimum.at(out, g.dst, through)
    return out


def mwc(g: Graph, dist: np.ndarray | None = None) -> int:
    """Minimum weight cycle of the graph (INF for acyclic graphs)."""
    return int(ansc(g, dist).min(initial=INF))
