"""Fork-join execution with work/span accounting.

Costs are charged in abstract operation units: one per edge relaxation,
min-plus term or table write, ``ceil(log2(size))`` per heap operation and
``ceil(log2(count))`` span for every fan-out/fan-in of a parallel loop.
"""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator

_threads = int(os.environ.get("DSOKIT_THREADS", "1"))


def set_threads(count: int) -> None:
    """Set the physical worker count used by :func:`parallel_for`."""
    global _threads
    if count < 1:
        raise ValueError("thread count must be >= 1")
    _threads = count


def get_threads() -> int:
    return _threads


def clog2(x: int) -> int:
    return 0 if x <= 1 else math.ceil(math.log2(x))


class MeterError(RuntimeError):
    pass


@dataclass
class WorkSpanMeter:
    """Work/span counters for one phase, with nested child phases."""

    name: str = "root"
    work: int = 0
    span: int = 0
    children: list["WorkSpanMeter"] = field(default_factory=list)
    closed: bool = False

    def charge(self, work: int, span: int | None = None) -> None:
        """Charge a sequential step (span defaults to work)."""
        self.work += int(work)
        self.span += int(work if span is None else span)

    def phase(self, name: str) -> "_Phase":
        """Open a sequential child phase: ``with meter.phase("x") as m: ...``."""
        return _Phase(self, name)

    def close(self) -> None:
        self.closed = True

    def rows(self, depth: int = 0) -> Iterator[tuple[str, int, int, int]]:
        yield (self.name, self.work, self.span, depth)
        for child in self.children:
            yield from child.rows(depth + 1)

    def find(self, name: str) -> "WorkSpanMeter | None":
        if self.name == name:
            return self
        for child in self.children:
            hit = child.find(name)
            if hit is not None:
                return hit
        return None


class _Phase:
    def __init__(self, parent: WorkSpanMeter, name: str):
        self.parent = parent
        self.meter = WorkSpanMeter(name)

    def __enter__(self) -> WorkSpanMeter:
        return self.meter

    def __exit__(self, *exc) -> None:
        self.meter.closed = True
        self.parent.children.append(self.meter)
        self.parent.work += self.meter.work
        self.parent.span += self.meter.span


def parallel_for(
    count: int,
    body: Callable[[int, WorkSpanMeter], None],
    meter: WorkSpanMeter | None = None,
) -> None:
    """Run ``body(i, m)`` for ``i in range(count)`` as independent tasks.

    Each task charges costs on its own meter ``m``. The caller's meter
    receives the summed work and the maximum span plus the fork-join charge.
    Bodies must write disjoint outputs; results do not depend on the number
    of threads.
    """
    if count <= 0:
        return
    local = [WorkSpanMeter(f"task{i}") for i in range(count)]
    if _threads == 1 or count == 1:
        for i in range(count):
            body(i, local[i])
    else:
        with ThreadPoolExecutor(max_workers=_threads) as pool:
            futures = [pool.submit(body, i, local[i]) for i in range(count)]
            for fut in futures:
                fut.result()
    if meter is not None:
        meter.work += sum(m.work for m in local)
        meter.span += max(m.span for m in local) + clog2(count)


def charge_parallel(meter: WorkSpanMeter | None, count: int, work_each: int, span_each: int) -> None:
    """Charge ``count`` identical independent tasks without running a loop."""
    if meter is None or count <= 0:
        return
    meter.work += count * work_each
    meter.span += span_each + clog2(count)


def meter_report(meter: WorkSpanMeter) -> list[tuple[str, int, int, int]]:
    """Hierarchical (phase, work, span, depth) rows, parent before child."""
    if not meter.closed:
        raise MeterError(f"phase {meter.name!r} is still open")
    return list(meter.rows())


def report_csv(rows: list[tuple[str, int, int, int]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["phase", "work", "span", "depth"])
    writer.writerows(rows)
    return buf.getvalue()
