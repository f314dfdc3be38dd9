"""All-pairs shortest paths and the center tables CR / CL / BCP."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import INF, Graph, dijkstra, _euler
from .runtime import WorkSpanMeter, charge_parallel, clog2, parallel_for

NONE = -1


@dataclass(eq=False)
class DistanceMatrix:
    """Canonical APSP: distances plus the structure of every canonical path.

    ``pred[x, y]`` is the vertex before ``y`` on the canonical x->y path,
    ``nxt[x, y]`` the vertex after ``x``; ``hops`` counts edges (-1 when
    unreachable); ``tin``/``tout`` are Euler intervals of the tree rooted at x.
    """

    dist: np.ndarray
    tie: np.ndarray
    hops: np.ndarray
    pred: np.ndarray
    nxt: np.ndarray
    tin: np.ndarray
    tout: np.ndarray

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def path(self, x: int, y: int) -> list[int]:
        """Vertex sequence of the canonical x->y path ([] if unreachable)."""
        if self.hops[x, y] < 0:
            return []
        out = [y]
        while out[-1] != x:
            out.append(int(self.pred[x, out[-1]]))
        return out[::-1]


def _nxt_from_pred(pred: np.ndarray, hops: np.ndarray) -> np.ndarray:
    n = pred.shape[0]
    nxt = np.full((n, n), NONE, dtype=np.int64)
    rows = np.arange(n)[:, None].repeat(n, 1)
    cols = np.arange(n)[None, :].repeat(n, 0)
    for d in range(1, int(hops.max(initial=0)) + 1):
        mask = hops == d
        xs, ys = rows[mask], cols[mask]
        p = pred[xs, ys]
        nxt[xs, ys] = np.where(p == xs, ys, nxt[xs, p])
    return nxt


def _euler_all(pred: np.ndarray):
    n = pred.shape[0]
    tin = np.full((n, n), -1, dtype=np.int64)
    tout = np.full((n, n), -1, dtype=np.int64)
    for x in range(n):
        pv = pred[x].tolist()
        pv[x] = -1
        a, b, _ = _euler(n, x, pv)
        tin[x], tout[x] = a, b
    return tin, tout


def apsp(g: Graph, meter: WorkSpanMeter | None = None, kernel: str = "dijkstra") -> DistanceMatrix:
    """Exact canonical APSP, parallel over sources (or by min-plus squaring)."""
    if kernel == "minplus":
        return minplus_apsp(g, meter=meter)[0]
    n = g.n
    trees = [None] * n

    def body(x, m):
        trees[x] = dijkstra(g, x, meter=m)

    parallel_for(n, body, meter)
    return matrix_from_trees(trees)


def matrix_from_trees(trees) -> DistanceMatrix:
    dist = np.stack([t.dist for t in trees])
    tie = np.stack([t.tie for t in trees])
    hops = np.stack([t.depth for t in trees])
    pred = np.stack([t.parent_vertex for t in trees])
    tin = np.stack([t.tin for t in trees])
    tout = np.stack([t.tout for t in trees])
    return DistanceMatrix(dist, tie, hops, pred, _nxt_from_pred(pred, hops), tin, tout)


@dataclass(eq=False)
class CenterTables:
    """CR/CL as (n, n, K) vertex arrays (-1 = none, slot i-1 for priority >= i)."""

    priority: np.ndarray
    K: int
    CR: np.ndarray
    CL: np.ndarray
    BCP: np.ndarray

    def same_as(self, other: "CenterTables") -> bool:
        return (
            np.array_equal(self.CR, other.CR)
            and np.array_equal(self.CL, other.CL)
            and np.array_equal(self.BCP, other.BCP)
        )


def minplus_apsp(g: Graph, priorities: np.ndarray | None = None, meter: WorkSpanMeter | None = None,
                 block: int = 32):
    """Repeated min-plus squaring over (weight, tie) path lengths.

    When ``priorities`` are given, the first/last center of priority >= i and
    the biggest center priority are combined alongside each product: for a
    path formed as x->z->y, CR comes from the x->z part if present, else from
    z->y (mirrored for CL); BCP is the max of both parts.
    """
    n = g.n
    ar = np.arange(n)
    D = g.dense_weights()
    T = np.zeros((n, n), dtype=np.int64)
    T[g.src, g.dst] = g.tie
    H = np.where(D < INF, 1, -1).astype(np.int64)
    P = np.where(D < INF, ar[:, None], NONE).astype(np.int64)
    N = np.where(D < INF, ar[None, :], NONE).astype(np.int64)
    D[ar, ar], T[ar, ar], H[ar, ar], P[ar, ar], N[ar, ar] = 0, 0, 0, NONE, NONE
    centers = priorities is not None
    if centers:
        pr = np.asarray(priorities, dtype=np.int64)
        K = max(1, clog2(n))
        lv = np.arange(1, K + 1)
        okx = (pr[:, None] >= lv[None, :])  # (n, K)
        reach = D < INF
        CR = np.where(okx[:, None, :], ar[:, None, None], np.where(okx[None, :, :], ar[None, :, None], NONE))
        CL = np.where(okx[None, :, :], ar[None, :, None], np.where(okx[:, None, :], ar[:, None, None], NONE))
        CR = np.where(reach[:, :, None], CR, NONE)
        CL = np.where(reach[:, :, None], CL, NONE)
        B = np.where(reach, np.maximum(pr[:, None], pr[None, :]), 0)
    rounds = clog2(n)
    per_pair = n + (2 * K if centers else 0)
    for _ in range(rounds):
        # one product: n^2 independent min-reductions over n terms
        charge_parallel(meter, n * n, per_pair, clog2(n) + 1)
        nD, nT, nH, nP, nN = D.copy(), T.copy(), H.copy(), P.copy(), N.copy()
        if centers:
            nCR, nCL, nB = CR.copy(), CL.copy(), B.copy()
        for lo in range(0, n, block):
            xs = ar[lo:lo + block]
            cand = np.minimum(D[xs, :, None] + D[None, :, :], INF)  # (b, z, y)
            best = cand.min(axis=1)
            tcand = np.where(cand == best[:, None, :], T[xs, :, None] + T[None, :, :], INF)
            z = tcand.argmin(axis=1)  # (b, y)
            bt = np.take_along_axis(tcand, z[:, None, :], 1)[:, 0, :]
            better = (best < D[xs]) | ((best == D[xs]) & (bt < T[xs]))
            better &= best < INF
            bx, by = np.nonzero(better)
            if len(bx) == 0:
                continue
            x, y, zz = xs[bx], by, z[bx, by]
            nD[x, y], nT[x, y] = best[bx, by], bt[bx, by]
            nH[x, y] = H[x, zz] + H[zz, y]
            nP[x, y] = np.where(zz == y, P[x, y], P[zz, y])
            nN[x, y] = np.where(zz == x, N[zz, y], N[x, zz])
            if centers:
                left, right = CR[x, zz], CR[zz, y]
                nCR[x, y] = np.where(left != NONE, left, right)
                left, right = CL[zz, y], CL[x, zz]
                nCL[x, y] = np.where(left != NONE, left, right)
                nB[x, y] = np.maximum(B[x, zz], B[zz, y])
        D, T, H, P, N = nD, nT, nH, nP, nN
        if centers:
            CR, CL, B = nCR, nCL, nB
    tin, tout = _euler_all(P)
    # Euler tours of all n trees; charged at the list-ranking bound
    charge_parallel(meter, n, 2 * n, 2 * clog2(n) + 1)
    dm = DistanceMatrix(D, T, H, P, N, tin, tout)
    ct = CenterTables(np.asarray(priorities), K, CR, CL, B) if centers else None
    return dm, ct


def apsp_augmented(g: Graph, priorities: np.ndarray, meter: WorkSpanMeter | None = None):
    """(DistanceMatrix, CenterTables) from the augmented min-plus APSP."""
    return minplus_apsp(g, priorities, meter=meter)


def per_source_center_scan(dm: DistanceMatrix, priorities: np.ndarray,
                           meter: WorkSpanMeter | None = None) -> CenterTables:
    """CR/CL/BCP by walking every canonical tree from its root.

    Along the tree path root->y, CR keeps the first vertex of priority >= i,
    CL is y itself when it qualifies and otherwise the parent's CL.
    """
    n = dm.n
    pr = np.asarray(priorities, dtype=np.int64)
    K = max(1, clog2(n))
    lv = np.arange(1, K + 1)
    ok = pr[:, None] >= lv[None, :]
    CR = np.full((n, n, K), NONE, dtype=np.int64)
    CL = np.full((n, n, K), NONE, dtype=np.int64)
    B = np.zeros((n, n), dtype=np.int64)

    def body(x, m):
        hops = dm.hops[x]
        CR[x, x] = np.where(ok[x], x, NONE)
        CL[x, x] = CR[x, x]
        B[x, x] = pr[x]
        for d in range(1, int(hops.max(initial=0)) + 1):
            ys = np.flatnonzero(hops == d)
            ps = dm.pred[x, ys]
            here = np.where(ok[ys], ys[:, None], NONE)
            CR[x, ys] = np.where(CR[x, ps] != NONE, CR[x, ps], here)
            CL[x, ys] = np.where(here != NONE, here, CL[x, ps])
            B[x, ys] = np.maximum(B[x, ps], pr[ys])
        m.charge(n * (2 * K + 1), int(hops.max(initial=0)) * (2 * K + 1))

    parallel_for(n, body, meter)
    return CenterTables(pr, K, CR, CL, B)
