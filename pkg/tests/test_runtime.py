import numpy as np
import pytest

from dsokit.rmq import RmqTable
from dsokit.runtime import (MeterError, WorkSpanMeter, clog2, get_threads, meter_report, parallel_for,
                            report_csv, set_threads)


def test_empty_parallel_for_is_noop():
    m = WorkSpanMeter()
    parallel_for(0, lambda i, mm: mm.charge(5), m)
    assert (m.work, m.span) == (0, 0)


def test_parallel_for_composition():
    m = WorkSpanMeter()
    parallel_for(4, lambda i, mm: mm.charge(10, 10), m)
    assert m.work == 40
    assert m.span == 10 + clog2(4)


def test_nested_parallel_for():
    m = WorkSpanMeter()
    parallel_for(2, lambda i, mm: parallel_for(3, lambda j, m2: m2.charge(1), mm), m)
    assert m.work == 6
    assert m.span == 1 + clog2(3) + clog2(2)


def test_phases_and_report():
    root = WorkSpanMeter("root")
    assert meter_report(_closed(WorkSpanMeter("empty"))) == [("empty", 0, 0, 0)]
    with root.phase("a") as a:
        a.charge(3)
        with a.phase("b") as b:
            b.charge(2, 1)
    with pytest.raises(MeterError):
        meter_report(root)
    root.close()
    assert meter_report(root) == [("root", 5, 4, 0), ("a", 5, 4, 1), ("b", 2, 1, 2)]
    assert report_csv(meter_report(root)).splitlines()[0] == "phase,work,span,depth"


def _closed(m):
    m.close()
    return m


def test_results_independent_of_threads():
    out = {}
    old = get_threads()
    try:
        for t in (1, 2, 4):
            set_threads(t)
            res = np.zeros(50, dtype=np.int64)
            m = WorkSpanMeter()

            def body(i, mm):
                res[i] = i * i
                mm.charge(i, 1)

            parallel_for(50, body, m)
            out[t] = (res.tolist(), m.work, m.span)
    finally:
        set_threads(old)
    assert out[1] == out[2] == out[4]


def test_rmq_matches_bruteforce():
    r = np.random.default_rng(3)
    vals = r.integers(0, 20, 300)
    for mode, pick in (("max", np.argmax), ("min", np.argmin)):
        t = RmqTable(vals, mode)
        lo = r.integers(0, 300, 500)
        hi = np.minimum(lo + r.integers(0, 80, 500), 299)
        got = t.query(lo, hi)
        exp = [a + pick(vals[a:b + 1]) for a, b in zip(lo, hi)]  # first on ties
        assert got.tolist() == exp
