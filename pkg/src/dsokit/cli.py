"""Command line driver: gen, build, query, verify, bench."""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .graph import INF, GraphFormatError, dump_graph, load_graph
from .pipelines import OracleFormatError, PipelineConfig, build, load_oracle, save_oracle
from .toolkit import MODELS, bench, build_report, gen_graph, verify

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(v: int) -> str:
    return "INF" if v >= INF else str(int(v))


def _read_graph(path):
    if path in (None, "-"):
        return load_graph(sys.stdin)
    with open(path) as f:
        return load_graph(f)


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as f:
            f.write(text)


def _config(a) -> PipelineConfig:
    h = getattr(a, "h", None)
    if a.pipeline == "c" and h is None:
        raise UsageError("pipeline c needs --h")
    try:
        return PipelineConfig(a.pipeline, h=h, seed=a.seed, gamma=a.gamma, alpha=a.alpha, beta=a.beta)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_gen(a):
    try:
        g = gen_graph(a.model, a.n, a.m, a.wmax, a.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _write_text(a.out, dump_graph(g))
    return EXIT_OK


def cmd_build(a):
    g = _read_graph(a.inp)
    cfg = _config(a)
    if cfg.pipeline == "c" and not 2 <= cfg.h <= max(g.n, 2):
        raise UsageError(f"--h must satisfy 2 <= h <= n={g.n}")
    tables = build(g, cfg)
    save_oracle(tables, a.out)
    if a.report:
        _write_text(a.report, build_report(tables))
    if not tables.meta.get("accepted", True):
        logging.warning("self-audit still failing after retries")
    return EXIT_OK


def _check_ids(n, arr):
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        raise UsageError(f"vertex id out of range 0..{n - 1}")


def cmd_query(a):
    g = _read_graph(a.inp) if a.inp else None
    tables = load_oracle(a.oracle, g)
    if a.batch:
        rows = []
        src = sys.stdin if a.batch == "-" else open(a.batch)
        with src:
            for lineno, line in enumerate(src, 1):
                line = line.split("#", 1)[0].split()
                if not line:
                    continue
                if len(line) != 4:
                    raise GraphFormatError(f"batch line {lineno}: expected 'x y u v'")
                try:
                    rows.append([int(t) for t in line])
                except ValueError:
                    raise GraphFormatError(f"batch line {lineno}: non-integer field") from None
        q = np.array(rows, dtype=np.int64).reshape(-1, 4)
    else:
        if a.xyuv is None or len(a.xyuv) != 4:
            raise UsageError("give x y u v or --batch FILE")
        q = np.array([a.xyuv], dtype=np.int64)
    _check_ids(tables.n, q)
    vals = tables.query_batch(q[:, 0], q[:, 1], q[:, 2], q[:, 3]) if len(q) else []
    _write_text(a.out, "".join(_fmt(v) + "\n" for v in vals))
    return EXIT_OK


def cmd_verify(a):
    g = _read_graph(a.inp)
    cfg = _config(a)
    scope = "all" if a.scope == "all" else int(a.scope)
    try:
        rep = verify(g, cfg, a.trials, scope)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if a.report:
        _write_text(a.report, rep.to_csv())
    for t in rep.trials:
        print(f"seed {t.seed}: {'ok' if t.accepted else 'FAIL'} mismatches={t.mismatches} "
              f"under={t.underestimates} max_lookups={t.max_lookups}"
              + (f" first={t.first_mismatch}" if t.first_mismatch else "")
              + (f" error={t.error}" if t.error else ""))
    print(f"accepted {rep.accepted}/{len(rep.trials)}")
    return EXIT_OK if rep.passed(a.threshold) else EXIT_VERIFY


def cmd_bench(a):
    ms = a.m if len(a.m) == len(a.n) else a.m * len(a.n)
    if len(ms) != len(a.n):
        raise UsageError("--m takes one value or one per --n")
    graphs = [gen_graph(a.model, n, m, a.wmax, a.seed) for n, m in zip(a.n, ms)]
    cfgs = []
    for p in a.pipeline:
        for h in (a.h or [None]) if p == "c" else [None]:
            if p == "c" and h is None:
                raise UsageError("pipeline c needs --h")
            cfgs.append(PipelineConfig(p, h=h, seed=a.seed, gamma=a.gamma, alpha=a.alpha, beta=a.beta))
    _write_text(a.report, bench(graphs, cfgs, wall=not a.no_wall))
    return EXIT_OK


def _multipliers(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma", type=float, default=4.0)
    p.add_argument("--alpha", type=float, default=6.0)
    p.add_argument("--beta", type=float, default=1.0)


def make_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="dsokit", description="Distance sensitivity oracles for directed weighted graphs.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="write a random graph")
    p.add_argument("--model", choices=MODELS, default="gnm")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--wmax", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_gen)

    for name, fn, hlp in (("build", cmd_build, "preprocess a graph into an oracle file"),
                          ("verify", cmd_verify, "compare oracles with brute force")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("--in", dest="inp", required=True)
        p.add_argument("--pipeline", choices=("a", "b", "c"), default="a")
        p.add_argument("--h", type=int)
        _multipliers(p)
        p.add_argument("--report")
        p.set_defaults(fn=fn)
        if name == "build":
            p.add_argument("--out", required=True)
        else:
            p.add_argument("--trials", type=int, default=5)
            p.add_argument("--scope", default="all", help="'all' or a sample size")
            p.add_argument("--threshold", type=float, default=0.95)

    p = sub.add_parser("query", help="answer d(x, y, (u, v)) queries")
    p.add_argument("--oracle", required=True)
    p.add_argument("--in", dest="inp", help="graph file to check the oracle against")
    p.add_argument("--batch", help="file of 'x y u v' lines ('-' for stdin)")
    p.add_argument("--out")
    p.add_argument("xyuv", nargs="*", type=int)
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("bench", help="metered work/span CSV over a grid")
    p.add_argument("--model", choices=MODELS, default="gnm")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--m", type=int, nargs="+", required=True)
    p.add_argument("--wmax", type=int, default=100)
    p.add_argument("--pipeline", nargs="+", choices=("a", "b", "c"), default=["a"])
    p.add_argument("--h", type=int, nargs="*")
    _multipliers(p)
    p.add_argument("--no-wall", action="store_true", help="leave wall time blank (reproducible CSV)")
    p.add_argument("--report")
    p.set_defaults(fn=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    a = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return a.fn(a)
    except UsageError as exc:
        print(f"dsokit: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, GraphFormatError, OracleFormatError) as exc:
        print(f"dsokit: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
