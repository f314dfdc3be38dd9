"""Sparse-table range extreme queries (O(1) per query after O(n log n) build)."""
from __future__ import annotations

import numpy as np

from .runtime import WorkSpanMeter, clog2


class RmqTable:
    """Position of the max (or min) of ``values[l..r]``; ties go to the smaller position.

    Queries accept scalars or equal-length index arrays.
    """

    def __init__(self, values, mode: str = "max", meter: WorkSpanMeter | None = None):
        if mode not in ("max", "min"):
            raise ValueError("mode must be 'max' or 'min'")
        self.values = np.asarray(values)
        self.mode = mode
        size = len(self.values)
        idx = np.arange(size)
        self.levels = [idx]
        k = 1
        while (1 << k) <= size:
            prev = self.levels[-1]
            half = 1 << (k - 1)
            a, b = prev[: size - (1 << k) + 1], prev[half: half + size - (1 << k) + 1]
            self.levels.append(self._pick(a, b))
            k += 1
        if meter is not None:
            meter.charge(size * len(self.levels), len(self.levels))

    def _pick(self, a, b):
        va, vb = self.values[a], self.values[b]
        if self.mode == "max":
            take_b = (vb > va) | ((vb == va) & (b < a))
        else:
            take_b = (vb < va) | ((vb == va) & (b < a))
        return np.where(take_b, b, a)

    def query(self, lo, hi):
        lo = np.asarray(lo)
        hi = np.asarray(hi)
        if np.any(hi < lo):
            raise ValueError("empty range")
        length = hi - lo + 1
        k = np.floor(np.log2(length)).astype(np.int64)
        # log2 of exact powers of two can round down; fix it up
        k = np.where((1 << (k + 1)) <= length, k + 1, k)
        out = np.empty(np.shape(lo), dtype=np.int64)
        for lev in np.unique(k):
            sel = k == lev
            table = self.levels[lev]
            a = table[lo[sel]]
            b = table[hi[sel] - (1 << lev) + 1]
            out[sel] = self._pick(a, b)
        return out if out.ndim else int(out)

    def __len__(self) -> int:
        return len(self.values)

    @staticmethod
    def query_cost() -> int:
        return 2

    @staticmethod
    def build_span(size: int) -> int:
        return clog2(size) + 1
