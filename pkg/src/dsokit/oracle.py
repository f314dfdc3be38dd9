"""Center-based oracle tables with constant-lookup queries.

Every vertex gets a random priority; along each canonical x->y path the
strict prefix-maximum centers (seen from x) and strict suffix-maximum
centers (seen from y) split the path into at most 2K+1 intervals, K =
ceil(log2 n). An interval is keyed by its side and the priority of its
low-priority endpoint: slot i-1 for an ascending interval whose left end
has priority i, slot K for the middle interval between the first and last
peak-priority center, slot K+j for a descending interval whose right end
has priority j.

For an edge e on the path inside interval [b_l, b_r] the answer is
    min(d(x, b_l) + d(b_l, y, e), d(x, b_r, e) + d(b_r, y), DBV)
where both replacement distances were precomputed by the covering centers
and DBV never underestimates and is tight when the replacement path leaves
the path before b_l and rejoins after b_r.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .apsp import NONE, CenterTables, DistanceMatrix
from .graph import INF, Graph, ShortestPathTree, excluded_sssp
from .rmq import RmqTable
from .runtime import WorkSpanMeter, charge_parallel, clog2, parallel_for

QUERY_LOOKUP_BUDGET = 12


def num_levels(n: int) -> int:
    return max(1, clog2(n))


@dataclass(frozen=True)
class CenterAssignment:
    priority: np.ndarray
    seed: int
    gamma: float = 4.0

    @property
    def K(self) -> int:
        return num_levels(len(self.priority))

    def cover_depth(self, k: int) -> int:
        n = len(self.priority)
        return max(1, math.ceil(self.gamma * 2 ** k * math.log(max(n, 2))))


def assign_priorities(n: int, seed: int, gamma: float = 4.0, rng: np.random.Generator | None = None
                      ) -> CenterAssignment:
    """Priority j in 1..ceil(log2 n) with probability proportional to 2^-j."""
    if n < 1:
        raise ValueError("n must be >= 1")
    K = num_levels(n)
    probs = 0.5 ** np.arange(1, K + 1)
    probs /= probs.sum()
    if rng is None:
        rng = np.random.Generator(np.random.Philox(seed))
    pr = rng.choice(np.arange(1, K + 1), size=n, p=probs).astype(np.int64)
    return CenterAssignment(pr, seed, gamma)


class PathIndex:
    """Flat, path-ordered listing of the edges of every canonical path.

    Entry k describes the ``fp[k]``-th edge ``(fu[k], fv[k])`` of the
    canonical ``fx[k] -> fy[k]`` path; a pair's entries start at ``off[x, y]``.
    """

    def __init__(self, dm: DistanceMatrix, meter: WorkSpanMeter | None = None):
        n = dm.n
        L = np.maximum(dm.hops, 0)
        self.L = L
        self.off = np.concatenate([[0], np.cumsum(L.ravel())[:-1]]).reshape(n, n)
        total = int(L.sum())
        pair = np.repeat(np.arange(n * n), L.ravel())
        self.fx, self.fy = pair // n, pair % n
        self.fp = np.arange(total) - self.off.ravel()[pair] + 1
        steps = L.ravel()[pair] - self.fp
        head = self.fy.copy()
        up = dm.pred.copy()
        up[np.arange(n), np.arange(n)] = np.arange(n)
        up = np.where(up < 0, np.arange(n)[None, :], up)
        bit = 0
        while total and (steps >> bit).any():
            sel = ((steps >> bit) & 1).astype(bool)
            head[sel] = up[self.fx[sel], head[sel]]
            up = np.take_along_axis(up, up, axis=1)
            bit += 1
        self.fv = head
        self.fu = dm.pred[self.fx, head] if total else head
        charge_parallel(meter, total, max(bit, 1), max(bit, 1))

    def __len__(self) -> int:
        return len(self.fx)

    def entries(self, x: int, y: int) -> slice:
        return slice(int(self.off[x, y]), int(self.off[x, y] + self.L[x, y]))


def locate_interval(ct: CenterTables, x, y, u, v):
    """(slot, b_l, b_r) of the interval holding edge (u, v) on the x->y path."""
    K = ct.K
    i = ct.BCP[x, u]
    j = ct.BCP[v, y]
    asc = i < j
    desc = i > j
    ii = np.clip(i - 1, 0, K - 1)
    jj = np.clip(j - 1, 0, K - 1)
    slot = np.where(asc, i - 1, np.where(desc, K + j, K))
    bl = np.where(asc, ct.CR[x, y, ii], np.where(desc, ct.CL[x, y, np.minimum(j, K - 1)], ct.CR[x, y, ii]))
    br = np.where(asc, ct.CR[x, y, np.minimum(i, K - 1)], np.where(desc, ct.CL[x, y, jj], ct.CL[x, y, ii]))
    return slot, bl, br


def build_interval_directory(x: int, y: int, ct: CenterTables, dm: DistanceMatrix):
    """Boundary centers and intervals of the canonical x->y path.

    Returns ``(boundaries, intervals)``; each interval is
    ``(slot, left_center, right_center, first_edge_pos, last_edge_pos)``
    with 1-based edge positions. Empty intervals are omitted.
    """
    if x == y or dm.hops[x, y] < 0:
        return [], []
    path = dm.path(x, y)
    pr = ct.priority
    asc = [path[0]]
    for w in path[1:]:
        if pr[w] > pr[asc[-1]]:
            asc.append(w)
    desc = [path[-1]]
    for w in reversed(path[:-1]):
        if pr[w] > pr[desc[-1]]:
            desc.append(w)
    pos = {w: k for k, w in enumerate(path)}
    bounds = sorted(set(asc) | set(desc), key=pos.get)
    intervals = []
    for a, b in zip(bounds, bounds[1:]):
        slot, bl, br = locate_interval(ct, x, y, path[pos[a]], path[pos[a] + 1])
        intervals.append((int(slot), int(bl), int(br), pos[a] + 1, pos[b]))
    return bounds, intervals


@dataclass(eq=False)
class Coverage:
    """Replacement distances held by covering centers.

    Forward: ``fval[foff[c, y] + p - 1] = d(c, y, e_p)`` for the p-th edge of
    the c->y path, p <= flen[c, y]. Reverse: ``rval[roff[c, x] + q - 1] =
    d(x, c, e)`` for the q-th edge counted back from c on the x->c path.
    """

    foff: np.ndarray
    flen: np.ndarray
    fval: np.ndarray
    roff: np.ndarray
    rlen: np.ndarray
    rval: np.ndarray

    def forward(self, c, y, p):
        ok = (p >= 1) & (p <= self.flen[c, y])
        idx = np.where(ok, self.foff[c, y] + p - 1, 0)
        return np.where(ok, self.fval[idx] if len(self.fval) else INF, INF)

    def reverse(self, c, x, q):
        ok = (q >= 1) & (q <= self.rlen[c, x])
        idx = np.where(ok, self.roff[c, x] + q - 1, 0)
        return np.where(ok, self.rval[idx] if len(self.rval) else INF, INF)

    @property
    def words(self) -> int:
        return 4 * self.foff.size + len(self.fval) + len(self.rval)


def coverage_layout(dm: DistanceMatrix, ct: CenterTables, ca: CenterAssignment):
    """Covered prefix lengths: forward ``flen[c, y]`` and reverse ``rlen[c, x]``.

    Centre c of priority k covers the p-th edge of a tree path when
    p <= cover_depth(k) and no vertex strictly between c and that edge has
    priority > k.
    """
    n, K = dm.n, ct.K
    pr = ct.priority
    cd = np.array([ca.cover_depth(int(k)) for k in pr], dtype=np.int64)
    L = np.maximum(dm.hops, 0)
    ar = np.arange(n)
    slot = np.minimum(pr, K - 1)  # CR slot for priority >= pr+1
    has_higher = pr < K
    # forward: first vertex after c with priority > p(c)
    nxtc = ct.CR[ar[:, None], ar[None, :], slot[:, None]]
    t = np.where(has_higher[:, None] & (nxtc != NONE), dm.hops[ar[:, None], np.maximum(nxtc, 0)], L)
    flen = np.minimum(np.minimum(L, cd[:, None]), t)
    # reverse, stored [c, x]: last vertex before c with priority > p(c) on x->c
    prevc = ct.CL[ar[None, :], ar[:, None], slot[:, None]]  # [c, x] = CL[x, c, slot(c)]
    Lr = L.T
    hx = dm.hops[ar[None, :], np.maximum(prevc, 0)]  # hops x -> prevc
    tr = np.where(has_higher[:, None] & (prevc != NONE), Lr - hx, Lr)
    rlen = np.minimum(np.minimum(Lr, cd[:, None]), tr)
    flen[ar, ar] = 0
    rlen[ar, ar] = 0
    return flen.astype(np.int64), rlen.astype(np.int64)


def _offsets(lens: np.ndarray) -> np.ndarray:
    flat = lens.ravel()
    return np.concatenate([[0], np.cumsum(flat)[:-1]]).reshape(lens.shape).astype(np.int64)


def compute_coverage(g: Graph, ca: CenterAssignment, ct: CenterTables, dm: DistanceMatrix,
                     fwd: list[ShortestPathTree], rev: list[ShortestPathTree],
                     meter: WorkSpanMeter | None = None) -> Coverage:
    """Coverage by exclusion SSSP, one call per (center, tree depth) layer.

    Edges at equal depth of one tree have disjoint subtrees, so each layer
    is an independent set.
    """
    n = g.n
    flen, rlen = coverage_layout(dm, ct, ca)
    foff, roff = _offsets(flen), _offsets(rlen)
    fval = np.full(int(flen.sum()), INF, dtype=np.int64)
    rval = np.full(int(rlen.sum()), INF, dtype=np.int64)
    jobs = [(c, side) for c in range(n) for side in (0, 1)]

    def body(k, m):
        c, side = jobs[k]
        tree = fwd[c] if side == 0 else rev[c]
        lens = flen[c] if side == 0 else rlen[c]
        offs = foff[c] if side == 0 else roff[c]
        vals = fval if side == 0 else rval
        depth = tree.depth
        # the tree edge into w is covered iff the covered prefix of (c, w) reaches it
        cov = (depth >= 1) & (lens >= depth)
        layers: dict[int, list[int]] = {}
        for w in np.flatnonzero(cov).tolist():
            layers.setdefault(int(depth[w]), []).append(int(tree.parent[w]))
        for j in sorted(layers):
            sub = WorkSpanMeter()
            res = excluded_sssp(g, tree, layers[j], meter=sub)
            m.work += sub.work
            m.span = max(m.span, sub.span)
            for (y, _e), d in res.items():
                if lens[y] >= j:
                    vals[offs[y] + j - 1] = d

    parallel_for(len(jobs), body, meter)
    return Coverage(foff, flen, fval, roff, rlen, rval)


def coverage_from_hop(g: Graph, ca: CenterAssignment, ct: CenterTables, dm: DistanceMatrix,
                      paths: PathIndex, hop, meter: WorkSpanMeter | None = None) -> Coverage:
    """Coverage where each replacement distance is one query to ``hop``."""
    flen, rlen = coverage_layout(dm, ct, ca)
    foff, roff = _offsets(flen), _offsets(rlen)
    # forward entries: prefix positions of each (c, y) path
    sel = paths.fp <= flen[paths.fx, paths.fy]
    fval = np.empty(int(sel.sum()), dtype=np.int64)
    fidx = foff[paths.fx[sel], paths.fy[sel]] + paths.fp[sel] - 1
    fval[fidx] = hop.query_batch(paths.fx[sel], paths.fy[sel], paths.fu[sel], paths.fv[sel], meter=meter)
    # reverse entries: suffix positions of each (x, c) path, counted from c
    q = paths.L[paths.fx, paths.fy] - paths.fp + 1
    sel = q <= rlen[paths.fy, paths.fx]
    rval = np.empty(int(sel.sum()), dtype=np.int64)
    ridx = roff[paths.fy[sel], paths.fx[sel]] + q[sel] - 1
    rval[ridx] = hop.query_batch(paths.fx[sel], paths.fy[sel], paths.fu[sel], paths.fv[sel], meter=meter)
    return Coverage(foff, flen, fval, roff, rlen, rval)


def center_terms(dm: DistanceMatrix, ct: CenterTables, cov: Coverage, x, y, u, v):
    """(slot, term through b_l, term through b_r) for on-path edges (u, v)."""
    slot, bl, br = locate_interval(ct, x, y, u, v)
    hv = dm.hops[x, v]
    p = hv - dm.hops[x, bl]
    t1 = np.minimum(dm.dist[x, bl] + cov.forward(bl, y, p), INF)
    q = dm.hops[x, br] - hv + 1
    t2 = np.minimum(cov.reverse(br, x, q) + dm.dist[br, y], INF)
    return slot, t1, t2


def interval_runs(paths: PathIndex, slot: np.ndarray, n: int, S: int):
    """Contiguous (lo, hi) flat ranges of each (x, y, slot) interval."""
    if len(paths) == 0:
        e = np.zeros(0, dtype=np.int64)
        return e, e, e
    key = (paths.fx * n + paths.fy) * S + slot
    starts = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
    ends = np.r_[starts[1:], len(key)] - 1
    return key[starts], starts, ends


def compute_bottlenecks(g: Graph, paths: PathIndex, cand: np.ndarray, slot: np.ndarray, S: int,
                        meter: WorkSpanMeter | None = None):
    """Bottleneck edge per interval: position of the max candidate (first on ties).

    Returns ``(BV, best)`` with BV an (n, n, S) edge-id array and ``best`` the
    max candidate values on the same grid (INF-free intervals only).
    """
    n = g.n
    BV = np.full((n, n, S), NONE, dtype=np.int64)
    BEST = np.full((n, n, S), INF, dtype=np.int64)
    keys, lo, hi = interval_runs(paths, slot, n, S)
    if len(keys):
        rmq = RmqTable(cand, "max", meter=meter)
        at = rmq.query(lo, hi)
        x, rest = keys // (n * S), keys % (n * S)
        y, s = rest // S, rest % S
        BV[x, y, s] = g.edge_matrix[paths.fu[at], paths.fv[at]]
        BEST[x, y, s] = cand[at]
        charge_parallel(meter, len(keys), RmqTable.query_cost(), RmqTable.query_cost())
    return BV, BEST


def _dijkstra_avoiding(g: Graph, x: int, banned: set[int]) -> list[int]:
    dist = [INF] * g.n
    dist[x] = 0
    heap = [(0, x)]
    adj = g.out_lists
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, wt, _, e in adj[u]:
            if e in banned:
                continue
            nd = d + wt
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def interval_edge_sets(g: Graph, paths: PathIndex, slot: np.ndarray, n: int, S: int):
    keys, lo, hi = interval_runs(paths, slot, n, S)
    em = g.edge_matrix
    eids = em[paths.fu, paths.fv]
    return [(int(k), set(eids[a:b + 1].tolist())) for k, a, b in zip(keys, lo, hi)]


def compute_dbv_reference(g: Graph, paths: PathIndex, slot: np.ndarray, S: int) -> np.ndarray:
    """DBV[x, y, s]: x->y distance in G minus every edge of interval s (slow path)."""
    n = g.n
    DBV = np.full((n, n, S), INF, dtype=np.int64)
    for key, banned in interval_edge_sets(g, paths, slot, n, S):
        x, rest = divmod(key, n * S)
        y, s = divmod(rest, S)
        DBV[x, y, s] = _dijkstra_avoiding(g, x, banned)[y]
    return DBV


def _segment_layers(n, adj_in, adj_out, base, tree: ShortestPathTree, segments, meter=None):
    """Distances avoiding each tree segment, all segments in one Dijkstra.

    ``segments`` holds ``(top_child, banned_edges)``; only vertices below
    ``top_child`` can change. Layer nodes are (segment, vertex) pairs; a
    virtual source reaches a layer vertex y through every edge (z, y) whose
    tail lies outside the layer, at cost base[z] + w(z, y).
    """
    heap = []
    labels = []
    work = 0
    for s, (top, banned) in enumerate(segments):
        region = tree.subtree(top).tolist()
        inside = set(region)
        lab = dict.fromkeys(region, INF)
        for y in region:
            best = INF
            for z, wt, _, e in adj_in[y]:
                work += 1
                if z in inside or e in banned or base[z] >= INF:
                    continue
                best = min(best, base[z] + wt)
            if best < INF:
                lab[y] = best
                heap.append((best, s, y))
        labels.append((lab, inside, banned))
    heapq.heapify(heap)
    while heap:
        work += clog2(len(heap))
        d, s, z = heapq.heappop(heap)
        lab, inside, banned = labels[s]
        if d > lab[z]:
            continue
        for y, wt, _, e in adj_out[z]:
            work += 1
            if y not in inside or e in banned:
                continue
            nd = d + wt
            if nd < lab[y]:
                lab[y] = nd
                heapq.heappush(heap, (nd, s, y))
                work += clog2(len(heap))
    if meter is not None:
        meter.charge(work)
    return [lab for lab, _, _ in labels]


def compute_dbv_auxiliary(g: Graph, dm: DistanceMatrix, ct: CenterTables, paths: PathIndex,
                          slot: np.ndarray, S: int, fwd: list[ShortestPathTree],
                          rev: list[ShortestPathTree], meter: WorkSpanMeter | None = None) -> np.ndarray:
    """DBV for all intervals with one layered SSSP per source (and per target).

    Ascending and middle intervals end at a center determined by the x-side
    prefix, so they are segments of the tree rooted at x; descending
    intervals are determined by the y-side suffix and are segments of the
    incoming tree of y. Each distinct segment becomes one layer.
    """
    n, K = g.n, ct.K
    grev = g.reversed()
    DBV = np.full((n, n, S), INF, dtype=np.int64)
    keys, lo, hi = interval_runs(paths, slot, n, S)
    em = g.edge_matrix
    eid = em[paths.fu, paths.fv]
    fwd_jobs: dict[int, dict[tuple[int, int], list]] = {}
    rev_jobs: dict[int, dict[tuple[int, int], list]] = {}
    for key, a, b in zip(keys.tolist(), lo.tolist(), hi.tolist()):
        x, rest = divmod(key, n * S)
        y, s = divmod(rest, S)
        top_tail, bottom_head = int(paths.fu[a]), int(paths.fv[b])
        if s <= K:
            seg = (top_tail, bottom_head)
            fwd_jobs.setdefault(x, {}).setdefault(seg, []).append((y, s, a, b))
        else:
            seg = (bottom_head, top_tail)
            rev_jobs.setdefault(y, {}).setdefault(seg, []).append((x, s, a, b))

    def run(root, jobs, side, m):
        tree = fwd[root] if side == 0 else rev[root]
        graph = g if side == 0 else grev
        segs, owners = [], []
        for _, items in sorted(jobs.items()):
            _, _, a, b = items[0]
            banned = set(eid[a:b + 1].tolist())
            top = int(paths.fv[a]) if side == 0 else int(paths.fu[b])
            segs.append((top, banned))
            owners.append(items)
        labs = _segment_layers(n, graph.in_lists, graph.out_lists, tree.dist.tolist(), tree, segs, m)
        for lab, items in zip(labs, owners):
            for other, s, _, _ in items:
                if side == 0:
                    DBV[root, other, s] = lab[other]
                else:
                    DBV[other, root, s] = lab[other]

    tasks = [(x, j, 0) for x, j in sorted(fwd_jobs.items())] + [(y, j, 1) for y, j in sorted(rev_jobs.items())]
    parallel_for(len(tasks), lambda k, m: run(*tasks[k], m), meter)
    return DBV


@dataclass(eq=False)
class OracleTables:
    """Queryable oracle state; answers hop-``h`` queries (``h >= n``: exact)."""

    n: int
    K: int
    h: int
    dm: DistanceMatrix
    ct: CenterTables
    cov: Coverage
    DBV: np.ndarray
    BV: np.ndarray
    esrc: np.ndarray | None = None
    edst: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def slots(self) -> int:
        return 2 * self.K + 1

    def words(self) -> int:
        dm = self.dm
        tree = dm.dist.size + dm.hops.size + dm.pred.size + dm.tin.size + dm.tout.size
        centers = self.ct.CR.size + self.ct.CL.size + self.ct.BCP.size
        return tree + centers + self.cov.words + self.DBV.size + self.BV.size

    def query_batch(self, x, y, u, v, meter: WorkSpanMeter | None = None, count: bool = False):
        """Vectorized query on edges (u, v); returns values (and lookup counts)."""
        x, y, u, v = (np.asarray(a, dtype=np.int64) for a in (x, y, u, v))
        dm, ct = self.dm, self.ct
        out = np.zeros(x.shape, dtype=np.int64)
        looks = np.zeros(x.shape, dtype=np.int64)
        live = x != y
        # tree record of v (pred, tin, tout, hops) and of y (tin, dist)
        tin_v, tin_y = dm.tin[x, v], dm.tin[x, y]
        on = live & (dm.pred[x, v] == u) & (tin_v >= 0) & (tin_y >= tin_v) & (tin_y <= dm.tout[x, v])
        off = live & ~on
        out[off] = dm.dist[x[off], y[off]]
        looks[live] = 2
        if on.any():
            xo, yo, uo, vo = x[on], y[on], u[on], v[on]
            # BCP x2, center records x2, coverage (offset, value) x2, DBV
            slot, t1, t2 = center_terms(dm, ct, self.cov, xo, yo, uo, vo)
            dbv = self.DBV[xo, yo, slot]
            out[on] = np.minimum(np.minimum(t1, t2), dbv)
            looks[on] += 9
        if meter is not None:
            charge_parallel(meter, len(x), QUERY_LOOKUP_BUDGET, QUERY_LOOKUP_BUDGET)
        return (out, looks) if count else out

    def query_uv(self, x: int, y: int, u: int, v: int) -> int:
        return int(self.query_batch([x], [y], [u], [v])[0])

    def lookup_cost(self) -> int:
        return QUERY_LOOKUP_BUDGET

    @property
    def m(self) -> int:
        return 0 if self.esrc is None else len(self.esrc)

    def query_edges(self, x, y, e, count: bool = False):
        """Vectorized query by edge id."""
        e = np.asarray(e, dtype=np.int64)
        if self.esrc is None:
            raise ValueError("tables carry no edge list; use query_batch")
        if e.size and (e.min() < 0 or e.max() >= self.m):
            raise IndexError("edge id out of range")
        return self.query_batch(x, y, self.esrc[e], self.edst[e], count=count)

    def query(self, x: int, y: int, e: int) -> int:
        if not (0 <= x < self.n and 0 <= y < self.n):
            raise IndexError("vertex id out of range")
        return int(self.query_edges([x], [y], [e])[0])


def query(tables: OracleTables, g: Graph, x: int, y: int, e: int) -> int:
    """d(x, y, e) for edge id ``e`` of ``g``."""
    if not (0 <= x < tables.n and 0 <= y < tables.n and 0 <= e < g.m):
        raise IndexError("vertex or edge id out of range")
    return tables.query_uv(x, y, int(g.src[e]), int(g.dst[e]))
