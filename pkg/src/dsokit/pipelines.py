"""The three preprocessing pipelines and the oracle file format."""
from __future__ import annotations

import logging
import struct
import zlib
from dataclasses import dataclass, replace
from typing import BinaryIO

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _cs_dijkstra

from .apsp import CenterTables, DistanceMatrix, apsp_augmented, matrix_from_trees, per_source_center_scan
from .graph import INF, Graph, dijkstra
from .hop import ExtendedDso, SampledFamilyDso, TwoHopDso, reduce_query_time
from .oracle import (Coverage, OracleTables, PathIndex, assign_priorities, center_terms,
                     compute_bottlenecks, compute_coverage, compute_dbv_auxiliary, compute_dbv_reference)
from .runtime import WorkSpanMeter, charge_parallel, parallel_for

log = logging.getLogger(__name__)

PIPELINES = ("a", "b", "c")


@dataclass(frozen=True)
class PipelineConfig:
    pipeline: str = "a"
    h: int | None = None
    seed: int = 0
    gamma: float = 4.0
    alpha: float = 6.0
    beta: float = 1.0
    audit_samples: int = 1000
    audit_max_n: int = 64
    max_retries: int = 3
    dbv: str = "auxiliary"

    def __post_init__(self):
        p = self.pipeline.lower()
        if p not in PIPELINES:
            raise ValueError(f"unknown pipeline {self.pipeline!r}")
        object.__setattr__(self, "pipeline", p)
        if self.dbv not in ("auxiliary", "reference"):
            raise ValueError("dbv must be 'auxiliary' or 'reference'")

    def doubled(self) -> "PipelineConfig":
        return replace(self, gamma=2 * self.gamma, alpha=2 * self.alpha, beta=2 * self.beta)


def sub_seed(seed: int, *path: int) -> int:
    words = np.random.SeedSequence([int(seed) & ((1 << 63) - 1), *path]).generate_state(2, dtype=np.uint32)
    return int(words[0]) | (int(words[1] & 0x7FFFFFFF) << 32)


def _stage_seed(cfg: PipelineConfig, attempt: int, tag: int) -> int:
    return sub_seed(cfg.seed, attempt, tag)


def _build_a(g: Graph, cfg: PipelineConfig, attempt: int, root: WorkSpanMeter) -> OracleTables:
    ca = assign_priorities(g.n, _stage_seed(cfg, attempt, 0), cfg.gamma)
    return build_tables_a(g, ca, root, cfg.dbv)


def build_tables_a(g: Graph, ca, root: WorkSpanMeter | None = None, dbv: str = "auxiliary") -> OracleTables:
    """Exclusion-based tables for a given priority assignment."""
    n = g.n
    root = root if root is not None else WorkSpanMeter("dso-a")
    trees: list = [None] * (2 * n)
    with root.phase("sssp") as m:
        def body(k, mm):
            trees[k] = dijkstra(g, k % n, reversed=k >= n, meter=mm)
        parallel_for(2 * n, body, m)
    fwd, rev = trees[:n], trees[n:]
    with root.phase("apsp") as m:
        dm = matrix_from_trees(fwd)
        charge_parallel(m, n * n, 1, 1)
    with root.phase("centers") as m:
        ct = per_source_center_scan(dm, ca.priority, meter=m)
    with root.phase("paths") as m:
        paths = PathIndex(dm, meter=m)
    with root.phase("coverage") as m:
        cov = compute_coverage(g, ca, ct, dm, fwd, rev, meter=m)
    S = 2 * ct.K + 1
    with root.phase("bottleneck") as m:
        slot, t1, t2 = center_terms(dm, ct, cov, paths.fx, paths.fy, paths.fu, paths.fv)
        charge_parallel(m, len(paths), 8, 8)
        BV, _ = compute_bottlenecks(g, paths, np.minimum(t1, t2), slot, S, meter=m)
    with root.phase("dbv") as m:
        if dbv == "auxiliary":
            DBV = compute_dbv_auxiliary(g, dm, ct, paths, slot, S, fwd, rev, meter=m)
        else:
            DBV = compute_dbv_reference(g, paths, slot, S)
    return OracleTables(n, ct.K, max(n, 1), dm, ct, cov, DBV, BV, g.src, g.dst)


def _chain(g, cfg, attempt, root, dm, ct, ca, paths, stage):
    n, tag = g.n, 10
    while True:
        if stage.h >= n:
            if isinstance(stage, OracleTables):
                return stage
            with root.phase(f"reduce-h{stage.h}") as m:
                return reduce_query_time(g, stage, dm, ct, ca, paths, meter=m)
        with root.phase(f"extend-h{stage.h}") as m:
            ext = ExtendedDso(stage, cfg.alpha, _stage_seed(cfg, attempt, tag), meter=m)
        tag += 1
        with root.phase(f"reduce-h{ext.h}") as m:
            stage = reduce_query_time(g, ext, dm, ct, ca, paths, meter=m)
        del ext


def _shared(g, cfg, attempt, root):
    ca = assign_priorities(g.n, _stage_seed(cfg, attempt, 0), cfg.gamma)
    with root.phase("apsp") as m:
        dm, ct = apsp_augmented(g, ca.priority, meter=m)
    with root.phase("paths") as m:
        paths = PathIndex(dm, meter=m)
    return ca, dm, ct, paths


def _build_b(g: Graph, cfg: PipelineConfig, attempt: int, root: WorkSpanMeter) -> OracleTables:
    ca, dm, ct, paths = _shared(g, cfg, attempt, root)
    with root.phase("two-hop") as m:
        base = TwoHopDso(g, meter=m)
    with root.phase("reduce-h2") as m:
        stage = reduce_query_time(g, base, dm, ct, ca, paths, meter=m)
    return _chain(g, cfg, attempt, root, dm, ct, ca, paths, stage)


def _build_c(g: Graph, cfg: PipelineConfig, attempt: int, root: WorkSpanMeter) -> OracleTables:
    h = cfg.h
    if h is None or not 2 <= h <= max(g.n, 2):
        raise ValueError(f"pipeline c needs 2 <= h <= n, got h={h}")
    ca, dm, ct, paths = _shared(g, cfg, attempt, root)
    with root.phase(f"family-h{h}") as m:
        fam = SampledFamilyDso(g, h, cfg.beta, _stage_seed(cfg, attempt, 1), meter=m)
    return _chain(g, cfg, attempt, root, dm, ct, ca, paths, fam)


_BUILDERS = {"a": _build_a, "b": _build_b, "c": _build_c}


def bruteforce_batch(g: Graph, x, y, e) -> np.ndarray:
    """d(x, y, e) for arrays of triples, one SSSP batch per distinct edge."""
    x, y, e = (np.asarray(a, dtype=np.int64) for a in (x, y, e))
    out = np.empty(len(x), dtype=np.int64)
    data = g.w.astype(np.float64)
    for edge in np.unique(e).tolist():
        sel = np.flatnonzero(e == edge)
        keep = np.arange(g.m) != edge
        mat = csr_matrix((data[keep], (g.src[keep], g.dst[keep])), shape=(g.n, g.n))
        srcs, inv = np.unique(x[sel], return_inverse=True)
        d = _cs_dijkstra(mat, directed=True, indices=srcs)[inv, y[sel]]
        out[sel] = np.where(np.isfinite(d), np.nan_to_num(d, posinf=0), INF).astype(np.int64)
    return out


def audit(tables: OracleTables, g: Graph, samples: int, seed: int) -> int:
    """Number of mismatches on ``samples`` random triples (half on shortest paths)."""
    if g.m == 0 or g.n == 0 or samples <= 0:
        return 0
    rng = np.random.Generator(np.random.Philox(seed))
    k = samples // 2
    x = rng.integers(0, g.n, samples)
    y = rng.integers(0, g.n, samples)
    e = rng.integers(0, g.m, samples)
    dm = tables.dm
    paths = PathIndex(dm)
    if len(paths):
        pick = rng.integers(0, len(paths), k)
        x[:k], y[:k] = paths.fx[pick], paths.fy[pick]
        e[:k] = g.edge_matrix[paths.fu[pick], paths.fv[pick]]
    got = tables.query_edges(x, y, e)
    return int((got != bruteforce_batch(g, x, y, e)).sum())


def build(g: Graph, cfg: PipelineConfig, meter: WorkSpanMeter | None = None) -> OracleTables:
    """Build, self-audit (small graphs) and rebuild with fresh sub-seeds on failure."""
    attempts = cfg.max_retries + 1 if cfg.audit_samples and g.n <= cfg.audit_max_n else 1
    tables = None
    for attempt in range(attempts):
        root = WorkSpanMeter(f"dso-{cfg.pipeline}")
        tables = _BUILDERS[cfg.pipeline](g, cfg, attempt, root)
        root.close()
        bad = audit(tables, g, cfg.audit_samples, sub_seed(cfg.seed, attempt, 99)) if attempts > 1 else 0
        tables.meta.update(fingerprint=g.fingerprint(), pipeline=cfg.pipeline, seed=cfg.seed, attempt=attempt, audit_mismatches=bad,
                           accepted=bad == 0, meter=root, h0=cfg.h or 0)
        if meter is not None:
            meter.children.append(root)
            meter.work += root.work
            meter.span += root.span
        if bad == 0:
            break
        log.warning("audit found %d mismatches on attempt %d; %s", bad, attempt,
                    "rebuilding" if attempt + 1 < attempts else "giving up")
    return tables


def build_dso_a(g: Graph, cfg: PipelineConfig | None = None, **kw) -> OracleTables:
    return build(g, replace(cfg or PipelineConfig(), pipeline="a", **kw))


def build_dso_b(g: Graph, cfg: PipelineConfig | None = None, **kw) -> OracleTables:
    return build(g, replace(cfg or PipelineConfig(), pipeline="b", **kw))


def build_dso_c(g: Graph, cfg: PipelineConfig | None = None, **kw) -> OracleTables:
    return build(g, replace(cfg or PipelineConfig(), pipeline="c", **kw))


MAGIC = b"DSOKITOR"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sIQQQ1sx6xQQQQI")
_SECTION = struct.Struct("<16sI3QQQI")
_FIELDS = ("dist", "hops", "pred", "tin", "tout", "priority", "CR", "CL", "BCP",
           "foff", "flen", "fval", "roff", "rlen", "rval", "DBV", "BV", "esrc", "edst")


class OracleFormatError(ValueError):
    pass


def _arrays(t: OracleTables) -> dict[str, np.ndarray]:
    dm, ct, cov = t.dm, t.ct, t.cov
    return {"dist": dm.dist, "hops": dm.hops, "pred": dm.pred, "tin": dm.tin, "tout": dm.tout,
            "priority": ct.priority, "CR": ct.CR, "CL": ct.CL, "BCP": ct.BCP,
            "foff": cov.foff, "flen": cov.flen, "fval": cov.fval,
            "roff": cov.roff, "rlen": cov.rlen, "rval": cov.rval,
            "DBV": t.DBV, "BV": t.BV,
            "esrc": np.zeros(0) if t.esrc is None else t.esrc,
            "edst": np.zeros(0) if t.edst is None else t.edst}


def oracle_bytes(t: OracleTables) -> bytes:
    fp = t.meta.get("fingerprint")
    if fp is None:
        raise ValueError("tables carry no graph fingerprint")
    arrays = _arrays(t)
    blobs = [np.ascontiguousarray(arrays[k], dtype="<i8").tobytes() for k in _FIELDS]
    start = _HEADER.size + _SECTION.size * len(_FIELDS)
    sections, off = [], start
    for k, blob in zip(_FIELDS, blobs):
        a = arrays[k]
        shape = tuple(a.shape) + (0,) * (3 - a.ndim)
        sections.append(_SECTION.pack(k.encode(), a.ndim, *shape, off, len(blob), zlib.crc32(blob)))
        off += len(blob)
    head = _HEADER.pack(MAGIC, FORMAT_VERSION, fp[0], fp[1], fp[2], t.meta.get("pipeline", "a").encode(),
                        int(t.meta.get("seed", 0)), t.K, t.h, int(t.meta.get("h0", 0)), len(_FIELDS))
    return b"".join([head, *sections, *blobs])


def save_oracle(t: OracleTables, path_or_file) -> None:
    data = oracle_bytes(t)
    if hasattr(path_or_file, "write"):
        path_or_file.write(data)
    else:
        with open(path_or_file, "wb") as f:
            f.write(data)


def oracle_from_bytes(data: bytes, g: Graph | None = None) -> OracleTables:
    if len(data) < _HEADER.size:
        raise OracleFormatError("truncated oracle file")
    magic, ver, n, m, wh, pipe, seed, K, h, h0, count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise OracleFormatError("not an oracle file (bad magic)")
    if ver != FORMAT_VERSION:
        raise OracleFormatError(f"unsupported oracle format version {ver}")
    if g is not None and g.fingerprint() != (n, m, wh):
        raise OracleFormatError("oracle was built for a different graph (fingerprint mismatch)")
    if count != len(_FIELDS) or len(data) < _HEADER.size + count * _SECTION.size:
        raise OracleFormatError("truncated or malformed section table")
    arrays = {}
    for i in range(count):
        name, ndim, s0, s1, s2, off, length, crc = _SECTION.unpack_from(data, _HEADER.size + i * _SECTION.size)
        name = name.rstrip(b"\0").decode()
        if name != _FIELDS[i] or ndim > 3:
            raise OracleFormatError(f"unexpected section {name!r}")
        if off + length > len(data):
            raise OracleFormatError(f"section {name} truncated")
        blob = data[off:off + length]
        if zlib.crc32(blob) != crc:
            raise OracleFormatError(f"checksum mismatch in section {name}")
        shape = (s0, s1, s2)[:ndim]
        arr = np.frombuffer(blob, dtype="<i8").astype(np.int64)
        if arr.size != int(np.prod(shape)):
            raise OracleFormatError(f"section {name} has the wrong size")
        arrays[name] = arr.reshape(shape)
    a = arrays
    dm = DistanceMatrix(a["dist"], None, a["hops"], a["pred"], None, a["tin"], a["tout"])
    ct = CenterTables(a["priority"], int(K), a["CR"], a["CL"], a["BCP"])
    cov = Coverage(a["foff"], a["flen"], a["fval"], a["roff"], a["rlen"], a["rval"])
    meta = {"fingerprint": (n, m, wh), "pipeline": pipe.decode(), "seed": seed, "h0": h0}
    return OracleTables(int(n), int(K), int(h), dm, ct, cov, a["DBV"], a["BV"], a["esrc"], a["edst"], meta=meta)


def load_oracle(path_or_file, g: Graph | None = None) -> OracleTables:
    """Read an oracle file; refuses files built for a graph other than ``g``."""
    if hasattr(path_or_file, "read"):
        data = path_or_file.read()
    else:
        with open(path_or_file, "rb") as f:
            data = f.read()
    return oracle_from_bytes(data, g)
