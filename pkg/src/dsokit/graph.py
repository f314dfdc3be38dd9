"""Directed weighted graphs, canonical shortest-path trees and exclusion SSSP."""
from __future__ import annotations

import heapq
import io
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, TextIO

import numpy as np

from .runtime import WorkSpanMeter, clog2

log = logging.getLogger(__name__)

INF = 1 << 61
MAX_WEIGHT = (1 << 32) - 1
_MASK64 = (1 << 64) - 1


class GraphFormatError(ValueError):
    pass


def sat_add(a, b):
    """Saturating addition for scalars or int64 arrays (INF absorbs)."""
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return np.minimum(np.asarray(a, dtype=np.int64) + np.asarray(b, dtype=np.int64), INF)
    return INF if a >= INF or b >= INF else a + b


def _splitmix(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def tie_key(u: int, v: int) -> int:
    """40-bit secondary length of edge (u, v).

    Paths are compared by (weight, sum of tie keys); this makes shortest
    paths unique, so every subpath of a canonical path is canonical.
    """
    return _splitmix((u << 32) | v) >> 24


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable directed graph; edge ids are sorted by (src, dst)."""

    n: int
    src: np.ndarray
    dst: np.ndarray
    w: np.ndarray
    tie: np.ndarray
    collapsed: int = 0
    reverse_of: "Graph | None" = field(default=None, repr=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, int]]) -> "Graph":
        best: dict[tuple[int, int], int] = {}
        dup = 0
        for u, v, wt in edges:
            u, v, wt = int(u), int(v), int(wt)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"vertex id out of range in edge ({u},{v})")
            if u == v:
                raise GraphFormatError(f"self-loop at vertex {u}")
            if wt < 0 or wt > MAX_WEIGHT:
                raise GraphFormatError(f"weight {wt} out of range on edge ({u},{v})")
            if (u, v) in best:
                dup += 1
                best[u, v] = min(best[u, v], wt)
            else:
                best[u, v] = wt
        keys = sorted(best)
        src = np.array([k[0] for k in keys], dtype=np.int64)
        dst = np.array([k[1] for k in keys], dtype=np.int64)
        w = np.array([best[k] for k in keys], dtype=np.int64)
        tie = np.array([tie_key(u, v) for u, v in keys], dtype=np.int64)
        return cls(n, src, dst, w, tie, dup)

    @property
    def m(self) -> int:
        return len(self.src)

    def edges(self) -> list[tuple[int, int, int]]:
        return list(zip(self.src.tolist(), self.dst.tolist(), self.w.tolist()))

    @cached_property
    def _csr(self):
        order = np.lexsort((self.dst, self.src))
        out_ptr = np.searchsorted(self.src[order], np.arange(self.n + 1))
        rorder = np.lexsort((self.src, self.dst))
        in_ptr = np.searchsorted(self.dst[rorder], np.arange(self.n + 1))
        return out_ptr, order, in_ptr, rorder

    @cached_property
    def out_lists(self) -> list[list[tuple[int, int, int, int]]]:
        """Per vertex: (dst, weight, tie, edge id)."""
        out_ptr, order, _, _ = self._csr
        s, d, w, t = self.src.tolist(), self.dst.tolist(), self.w.tolist(), self.tie.tolist()
        order = order.tolist()
        return [[(d[e], w[e], t[e], e) for e in order[out_ptr[u]:out_ptr[u + 1]]] for u in range(self.n)]

    @cached_property
    def in_lists(self) -> list[list[tuple[int, int, int, int]]]:
        """Per vertex: (src, weight, tie, edge id)."""
        _, _, in_ptr, rorder = self._csr
        s, w, t = self.src.tolist(), self.w.tolist(), self.tie.tolist()
        rorder = rorder.tolist()
        return [[(s[e], w[e], t[e], e) for e in rorder[in_ptr[v]:in_ptr[v + 1]]] for v in range(self.n)]

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(u, v): e for e, (u, v) in enumerate(zip(self.src.tolist(), self.dst.tolist()))}

    def edge_id(self, u: int, v: int) -> int:
        return self.edge_index.get((u, v), -1)

    @cached_property
    def edge_matrix(self) -> np.ndarray:
        """n x n array of edge ids, -1 where absent."""
        mat = np.full((self.n, self.n), -1, dtype=np.int64)
        mat[self.src, self.dst] = np.arange(self.m)
        return mat

    def dense_weights(self) -> np.ndarray:
        mat = np.full((self.n, self.n), INF, dtype=np.int64)
        mat[self.src, self.dst] = self.w
        return mat

    def reversed(self) -> "Graph":
        """Graph with every edge flipped; edge ids are preserved."""
        if self.reverse_of is not None:
            return self.reverse_of
        rev = Graph(self.n, self.dst, self.src, self.w, self.tie, self.collapsed, reverse_of=self)
        object.__setattr__(self, "reverse_of", rev)
        return rev

    def fingerprint(self) -> tuple[int, int, int]:
        import hashlib

        h = hashlib.blake2b(digest_size=8)
        for arr in (self.src, self.dst, self.w):
            h.update(np.ascontiguousarray(arr, dtype="<i8").tobytes())
        return self.n, self.m, int.from_bytes(h.digest(), "little")


def load_graph(stream: TextIO | str) -> Graph:
    """Parse the text format: "<n> <m>" then m lines "<src> <dst> <weight>"."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    header = None
    edges: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            nums = [int(p) for p in parts]
        except ValueError:
            raise GraphFormatError(f"line {lineno}: malformed line {line!r}") from None
        if header is None:
            if len(nums) != 2 or nums[0] < 1 or nums[1] < 0:
                raise GraphFormatError(f"line {lineno}: expected '<n> <m>' header")
            header = (nums[0], nums[1])
            continue
        if len(nums) != 3:
            raise GraphFormatError(f"line {lineno}: expected '<src> <dst> <weight>'")
        u, v, wt = nums
        n = header[0]
        if wt < 0:
            raise GraphFormatError(f"line {lineno}: negative weight")
        if wt > MAX_WEIGHT:
            raise GraphFormatError(f"line {lineno}: weight exceeds 2^32-1")
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"line {lineno}: vertex id >= n")
        if u == v:
            raise GraphFormatError(f"line {lineno}: self-loop")
        edges.append((u, v, wt))
    if header is None:
        raise GraphFormatError("empty graph file")
    if len(edges) != header[1]:
        raise GraphFormatError(f"header declares {header[1]} edges, found {len(edges)}")
    g = Graph.from_edges(header[0], edges)
    if g.collapsed:
        log.warning("collapsed %d duplicate edge(s) to minimum weight", g.collapsed)
    return g


def dump_graph(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"] + [f"{u} {v} {w}" for u, v, w in g.edges()]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class ShortestPathTree:
    """Canonical shortest-path tree rooted at ``source``.

    For a reversed tree, ``parent[v]`` is the edge leaving ``v`` towards the
    root and ``dist[v]`` the distance from ``v`` to the root.
    """

    source: int
    dist: np.ndarray
    tie: np.ndarray
    parent: np.ndarray
    parent_vertex: np.ndarray
    depth: np.ndarray
    tin: np.ndarray
    tout: np.ndarray
    order: np.ndarray
    reversed: bool = False

    def is_ancestor(self, a: int, b: int) -> bool:
        """True iff ``a`` is an ancestor-or-self of ``b``."""
        if self.tin[a] < 0 or self.tin[b] < 0:
            return False
        return bool(self.tin[a] <= self.tin[b] <= self.tout[a])

    def subtree(self, v: int) -> np.ndarray:
        if self.tin[v] < 0:
            return self.order[:0]
        return self.order[self.tin[v]:self.tout[v] + 1]

    def path_vertices(self, y: int) -> list[int]:
        """Vertices of the tree path between the root and ``y``, root first."""
        if self.tin[y] < 0:
            return []
        out = [y]
        while out[-1] != self.source:
            out.append(int(self.parent_vertex[out[-1]]))
        if not self.reversed:
            out.reverse()
        return out

    def path_edges(self, y: int) -> list[int]:
        if self.tin[y] < 0:
            return []
        out = []
        v = y
        while v != self.source:
            out.append(int(self.parent[v]))
            v = int(self.parent_vertex[v])
        if not self.reversed:
            out.reverse()
        return out


def _euler(n: int, source: int, parent_vertex: list[int]):
    children: list[list[int]] = [[] for _ in range(n)]
    for v in range(n):
        p = parent_vertex[v]
        if p >= 0:
            children[p].append(v)
    tin = [-1] * n
    tout = [-1] * n
    order = []
    stack = [(source, 0)]
    while stack:
        v, i = stack.pop()
        if i == 0:
            tin[v] = len(order)
            order.append(v)
        if i < len(children[v]):
            stack.append((v, i + 1))
            stack.append((children[v][i], 0))
        else:
            tout[v] = len(order) - 1
    return tin, tout, order


def dijkstra(g: Graph, s: int, reversed: bool = False, meter: WorkSpanMeter | None = None) -> ShortestPathTree:
    """Exact SSSP from ``s`` (or to ``s`` when reversed) with canonical parents."""
    n = g.n
    adj = g.in_lists if reversed else g.out_lists
    dist = [INF] * n
    tie = [0] * n
    par = [-1] * n
    pv = [-1] * n
    depth = [-1] * n
    done = [False] * n
    dist[s] = 0
    depth[s] = 0
    heap = [(0, 0, s)]
    work = 0
    while heap:
        work += clog2(len(heap))
        d, t, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, wt, tk, e in adj[u]:
            work += 1
            nd, nt = d + wt, t + tk
            if nd < dist[v] or (nd == dist[v] and nt < tie[v]):
                dist[v], tie[v] = nd, nt
                par[v], pv[v] = e, u
                depth[v] = depth[u] + 1
                heapq.heappush(heap, (nd, nt, v))
                work += clog2(len(heap))
    tin, tout, order = _euler(n, s, pv)
    if meter is not None:
        meter.charge(work + n)
    return ShortestPathTree(
        s,
        np.array(dist, dtype=np.int64),
        np.array(tie, dtype=np.int64),
        np.array(par, dtype=np.int64),
        np.array(pv, dtype=np.int64),
        np.array(depth, dtype=np.int64),
        np.array(tin, dtype=np.int64),
        np.array(tout, dtype=np.int64),
        np.array(order, dtype=np.int64),
        reversed,
    )


def hop_limited_sssp(g: Graph, s: int, h: int, meter: WorkSpanMeter | None = None) -> np.ndarray:
    """Distances over paths of at most ``h`` edges, by ``h`` relaxation rounds."""
    if not 1 <= h <= max(g.n, 1):
        raise ValueError("hop bound must satisfy 1 <= h <= n")
    return hop_limited_rows(g.n, g.src, g.dst, g.w, np.array([s]), h, meter)[0]


def hop_limited_rows(n, src, dst, w, sources, h, meter=None) -> np.ndarray:
    """h-hop distances from each vertex in ``sources`` (rows) to all vertices.

    Round r+1 reads only round-r labels. Only edges leaving a vertex whose
    label changed in the previous round are relaxed (and charged).
    """
    k = len(sources)
    dist = np.full((k, n), INF, dtype=np.int64)
    dist[np.arange(k), sources] = 0
    changed = np.zeros((k, n), dtype=bool)
    changed[np.arange(k), sources] = True
    if len(src) == 0:
        return dist
    order = np.argsort(dst, kind="stable")
    s_o, d_o, w_o = src[order], dst[order], w[order]
    starts = np.flatnonzero(np.r_[True, d_o[1:] != d_o[:-1]])
    heads = d_o[starts]
    max_in = int(np.diff(np.r_[starts, len(d_o)]).max())
    work = 0
    rounds = 0
    for _ in range(h):
        active = changed[:, s_o]
        relaxed = int(active.sum())
        if relaxed == 0:
            break
        rounds += 1
        work += relaxed
        cand = np.where(active, np.minimum(dist[:, s_o] + w_o, INF), INF)
        best = np.minimum.reduceat(cand, starts, axis=1)
        cur = dist[:, heads]
        upd = best < cur
        new = dist.copy()
        new[:, heads] = np.where(upd, best, cur)
        changed = new != dist
        dist = new
    if meter is not None:
        meter.charge(work, rounds * (1 + clog2(max_in)))
    return dist


def excluded_sssp(
    g: Graph, spt: ShortestPathTree, excluded: Iterable[int], meter: WorkSpanMeter | None = None
) -> dict[tuple[int, int], int]:
    """Replacement distances from the tree root for an independent set of tree edges.

    Returns ``{(y, e): d(root, y, e)}`` for every ``e`` in ``excluded`` and
    every ``y`` below ``e``. On a reversed tree (built on ``g`` with
    ``reversed=True``) the values are ``d(y, root, e)``.
    """
    excluded = list(excluded)
    if not excluded:
        return {}
    rev = spt.reversed
    heads = []
    for e in excluded:
        hd = int(g.src[e]) if rev else int(g.dst[e])
        if spt.parent[hd] != e:
            raise ValueError(f"edge {e} is not a tree edge of the source-{spt.source} tree")
        heads.append(hd)
    by_tin = sorted(range(len(heads)), key=lambda i: spt.tin[heads[i]])
    for a, b in zip(by_tin, by_tin[1:]):
        if spt.tin[heads[b]] <= spt.tout[heads[a]]:
            raise ValueError(f"excluded edges {excluded[a]} and {excluded[b]} have overlapping subtrees")
    adj_in = g.out_lists if rev else g.in_lists
    adj_out = g.in_lists if rev else g.out_lists
    base = spt.dist.tolist()
    label = {}
    for i, hd in enumerate(heads):
        for y in spt.subtree(hd).tolist():
            label[y] = i
    dist = dict.fromkeys(label, INF)
    heap = []
    work = 0
    for y, i in label.items():
        best = INF
        for z, wt, _, e in adj_in[y]:
            work += 1
            if e == excluded[i] or label.get(z) == i or base[z] >= INF:
                continue
            best = min(best, base[z] + wt)
        if best < INF:
            dist[y] = best
            heap.append((best, y))
    heapq.heapify(heap)
    work += len(heap)
    while heap:
        work += clog2(len(heap))
        d, z = heapq.heappop(heap)
        if d > dist[z]:
            continue
        i = label[z]
        for y, wt, _, e in adj_out[z]:
            work += 1
            if label.get(y) != i or e == excluded[i]:
                continue
            nd = d + wt
            if nd < dist[y]:
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
                work += clog2(len(heap))
    if meter is not None:
        meter.charge(work)
    return {(y, excluded[i]): dist[y] for y, i in label.items()}


def replacement_distance_bruteforce(g: Graph, x: int, y: int, e: int) -> int:
    """Dijkstra distance from x to y in G minus edge e (no preprocessing)."""
    if x == y:
        return 0
    dist = {x: 0}
    heap = [(0, x)]
    adj = g.out_lists
    while heap:
        d, u = heapq.heappop(heap)
        if u == y:
            return d
        if d > dist[u]:
            continue
        for v, wt, _, eid in adj[u]:
            if eid == e:
                continue
            nd = d + wt
            if nd < dist.get(v, INF):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return INF


def replacement_table(g: Graph) -> np.ndarray:
    """All replacement distances as an (n, m, n) array ``[x, e, y]``.

    Independent of this package's Dijkstra: one scipy APSP per removed edge.
    """
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import dijkstra as sp_dijkstra

    n, m = g.n, g.m
    out = np.empty((n, m, n), dtype=np.int64)
    w = g.w.astype(np.float64)
    for e in range(m):
        keep = np.arange(m) != e
        mat = csr_matrix((w[keep], (g.src[keep], g.dst[keep])), shape=(n, n))
        d = sp_dijkstra(mat, directed=True)
        out[:, e, :] = np.where(np.isinf(d), INF, d).astype(np.int64)
    return out


def hop_limited_bruteforce(g: Graph, x: int, y: int, e: int, h: int) -> int:
    """d_h(x, y, e) by h Bellman-Ford rounds on G minus e."""
    dist = [INF] * g.n
    dist[x] = 0
    edges = [(u, v, wt) for k, (u, v, wt) in enumerate(g.edges()) if k != e]
    for _ in range(h):
        new = dist[:]
        for u, v, wt in edges:
            if dist[u] < INF and dist[u] + wt < new[v]:
                new[v] = dist[u] + wt
        dist = new
    return dist[y]


def is_on_canonical_path(g: Graph, spt_x: ShortestPathTree, y: int, e: int) -> bool:
    """True iff edge e lies on the canonical root->y path of a forward tree."""
    v = int(g.dst[e])
    return bool(spt_x.parent[v] == e and spt_x.is_ancestor(v, y))
