"""Block-wise threshold scans over long series."""

from __future__ import annotations

import numpy as np


def first_index(v: np.ndarray, start: int, pred, stop: int | None = None) -> int | None:
    # block-wise forward scan so repeated searches stay O(distance travelled)
    stop = v.size if stop is None else stop
    i, block = max(start, 0), 2048
    while i < stop:
        j = min(stop, i + block)
        hit = np.flatnonzero(pred(v[i:j]))
        if hit.size:
            return i + int(hit[0])
        i, block = j, min(block * 4, 1 << 22)
    return None


def first_run(v: np.ndarray, start: int, pred, run: int) -> int | None:
    """First index closing a stretch of ``run`` consecutive values satisfying pred."""
    i, block, carry = max(start, 0), 4096, 0
    while i < v.size:
        j = min(v.size, i + block)
        ok = pred(v[i:j])
        k = np.arange(ok.size)
        last_bad = np.maximum.accumulate(np.where(ok, -1, k))
        length = np.where(last_bad < 0, k + 1 + carry, k - last_bad)
        hit = np.flatnonzero(ok & (length >= run))
        if hit.size:
            return i + int(hit[0])
        carry = int(length[-1]) if ok[-1] else 0
        i, block = j, min(block * 4, 1 << 22)
    return None


def last_index(v: np.ndarray, stop: int, floor: int, pred) -> int | None:
    """Largest index in [floor, stop] satisfying pred."""
    j, block = stop + 1, 256
    while j > floor:
        i = max(floor, j - block)
        hit = np.flatnonzero(pred(v[i:j]))
        if hit.size:
            return i + int(hit[-1])
        j, block = i, min(block * 4, 1 << 22)
    return None
