"""Graph generators, the verification harness and the benchmark runner."""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .graph import INF, Graph, replacement_table
from .pipelines import PipelineConfig, build, bruteforce_batch, sub_seed
from .runtime import meter_report, report_csv

MODELS = ("gnm", "layered", "path-chords")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _weights(rng, k, wmax):
    if wmax < 1:
        raise ValueError("wmax must be >= 1")
    return rng.integers(1, wmax + 1, k)


def _ordered_pair(idx, n):
    u = idx // (n - 1)
    r = idx % (n - 1)
    return u, r + (r >= u)


def gen_graph(model: str, n: int, m: int, wmax: int = 100, seed: int = 0) -> Graph:
    """Deterministic random graph.

    gnm: m distinct ordered pairs. layered: a DAG where edges go from one
    layer to a later one. path-chords: the path 0->1->...->n-1 plus m chords.
    """
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    rng = _rng(seed)
    if model == "gnm":
        if m > n * (n - 1):
            raise ValueError(f"m={m} exceeds n(n-1)={n * (n - 1)}")
        idx = np.sort(rng.choice(n * (n - 1), m, replace=False)) if m else np.zeros(0, dtype=np.int64)
        u, v = _ordered_pair(idx, n) if n > 1 else (idx, idx)
        return Graph.from_edges(n, list(zip(u.tolist(), v.tolist(), _weights(rng, m, wmax).tolist())))
    if model == "layered":
        layers = max(2, math.isqrt(n)) if n > 1 else 1
        layer = np.minimum(np.arange(n) * layers // max(n, 1), layers - 1)
        cand = [(u, v) for u in range(n) for v in range(n) if layer[u] < layer[v] <= layer[u] + 2]
        if m > len(cand):
            raise ValueError(f"m={m} exceeds the {len(cand)} available layered pairs")
        pick = np.sort(rng.choice(len(cand), m, replace=False)) if m else []
        w = _weights(rng, m, wmax).tolist()
        return Graph.from_edges(n, [(*cand[i], wt) for i, wt in zip(pick, w)])
    if model == "path-chords":
        free = n * (n - 1) - (n - 1)
        if m > free:
            raise ValueError(f"m={m} chords exceed the {free} free pairs")
        edges = {(i, i + 1): int(wt) for i, wt in zip(range(n - 1), _weights(rng, n - 1, wmax))}
        while len(edges) < n - 1 + m:
            u, v = rng.integers(0, n, 2).tolist()
            if u != v and (u, v) not in edges:
                edges[(u, v)] = int(_weights(rng, 1, wmax)[0])
        return Graph.from_edges(n, [(u, v, w) for (u, v), w in sorted(edges.items())])
    raise ValueError(f"unknown model {model!r}; choose from {', '.join(MODELS)}")


@dataclass
class TrialResult:
    seed: int
    mismatches: int
    underestimates: int
    first_mismatch: tuple | None
    max_lookups: int
    attempt: int
    error: str | None = None

    @property
    def accepted(self) -> bool:
        return self.error is None and self.mismatches == 0


@dataclass
class VerifyReport:
    pipeline: str
    h: int | None
    gamma: float
    alpha: float
    beta: float
    scope: str
    trials: list[TrialResult] = field(default_factory=list)

    @property
    def accepted(self) -> int:
        return sum(t.accepted for t in self.trials)

    @property
    def underestimates(self) -> int:
        return sum(t.underestimates for t in self.trials)

    def passed(self, threshold: float = 0.95) -> bool:
        return not self.trials or self.accepted >= threshold * len(self.trials)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["pipeline", "h", "gamma", "alpha", "beta", "scope", "seed", "attempt", "mismatches",
                    "underestimates", "max_lookups", "first_mismatch", "error"])
        for t in self.trials:
            fm = "" if t.first_mismatch is None else " ".join(map(str, t.first_mismatch))
            w.writerow([self.pipeline, self.h or "", self.gamma, self.alpha, self.beta, self.scope, t.seed,
                        t.attempt, t.mismatches, t.underestimates, t.max_lookups, fm, t.error or ""])
        return buf.getvalue()


def _triples(g: Graph, scope, rng):
    n, m = g.n, g.m
    if m == 0:
        return (np.zeros(0, dtype=np.int64),) * 3
    if scope == "all":
        x, e, y = (a.ravel() for a in np.meshgrid(np.arange(n), np.arange(m), np.arange(n), indexing="ij"))
        return x, y, e
    k = int(scope)
    return rng.integers(0, n, k), rng.integers(0, n, k), rng.integers(0, m, k)


def verify(g: Graph, cfg: PipelineConfig, trials: int, scope="all", truth: np.ndarray | None = None
           ) -> VerifyReport:
    """Build ``trials`` oracles with seeds cfg.seed, cfg.seed+1, ... and compare to brute force.

    ``scope`` is "all" (every (x, y, e); n <= 64) or a sample size.
    """
    if scope == "all" and g.n > 64:
        raise ValueError("all-triples scope needs n <= 64")
    rep = VerifyReport(cfg.pipeline, cfg.h, cfg.gamma, cfg.alpha, cfg.beta, str(scope))
    if scope == "all" and truth is None and trials > 0:
        truth = replacement_table(g)
    for t in range(trials):
        seed = cfg.seed + t
        try:
            tables = build(g, replace(cfg, seed=seed))
        except Exception as exc:  # recorded, not fatal
            rep.trials.append(TrialResult(seed, 0, 0, None, 0, 0, f"{type(exc).__name__}: {exc}"))
            continue
        x, y, e = _triples(g, scope, np.random.Generator(np.random.Philox(sub_seed(seed, 7))))
        got, looks = tables.query_edges(x, y, e, count=True)
        exp = truth[x, e, y] if scope == "all" else bruteforce_batch(g, x, y, e)
        bad = np.flatnonzero(got != exp)
        first = None
        if len(bad):
            k = bad[0]
            first = (int(x[k]), int(y[k]), int(e[k]), int(got[k]), int(exp[k]))
        rep.trials.append(TrialResult(seed, len(bad), int((got < exp).sum()), first,
                                      int(looks.max(initial=0)), int(tables.meta.get("attempt", 0))))
    return rep


BENCH_HEADER = ["pipeline", "h", "n", "m", "work", "span", "words", "wall_s"]


def bench(graphs, configs, wall: bool = True) -> str:
    """CSV with one row per (pipeline config, graph)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_HEADER)
    for g in graphs:
        for cfg in configs:
            t0 = time.perf_counter()
            tables = build(g, replace(cfg, audit_samples=0))
            dt = time.perf_counter() - t0
            mt = tables.meta["meter"]
            w.writerow([cfg.pipeline, cfg.h or "", g.n, g.m, mt.work, mt.span, tables.words(),
                        f"{dt:.3f}" if wall else ""])
    return buf.getvalue()


def build_report(tables) -> str:
    """Phase-level work/span CSV of a build."""
    return report_csv(meter_report(tables.meta["meter"]))
