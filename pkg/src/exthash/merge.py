"""Streaming parallel-scan merges between MSB-bucketed tables.

A merge pass walks the destination table's buckets in ascending hash
order while pulling, from each source, the items that fall in the current
bucket's hash range.  Sources are consumed in ascending hash order too
(tables are scanned bucket by bucket), so the pass only ever buffers one
bucket group per side; the transient buffer is metered against the memory
budget.  Disk reads/writes are charged by the table scan primitives.
"""

from __future__ import annotations

from bisect import bisect_left
from typing import Callable, Iterator

from .chained import ChainedTable
from .params import bucket_bounds


class MergeSource:
    """An ascending stream of sorted item chunks feeding a merge pass.

    ``accounted`` marks streams whose buffered items are *extra* memory
    (read from disk); items already resident (an in-memory table being
    drained) are not double-counted.  ``on_consumed`` lets the owner shrink
    its own gauge as items leave it.
    """

    def __init__(
        self,
        chunks: Iterator[list[int]],
        accounted: bool = True,
        on_consumed: Callable[[int], None] | None = None,
    ):
        self._chunks = chunks
        self._buf: list[int] = []
        self._pos = 0
        self._done = False
        self.accounted = accounted
        self.on_consumed = on_consumed

    @classmethod
    def from_memory(cls, sorted_items: list[int], on_consumed=None) -> "MergeSource":
        return cls(iter([sorted_items]), accounted=False, on_consumed=on_consumed)

    @classmethod
    def from_table(cls, table: ChainedTable) -> "MergeSource":
        return cls(table.read_bucket(j) for j in range(table.d))

    def buffered_words(self) -> int:
        return len(self._buf) - self._pos if self.accounted else 0

    def take_below(self, hi: int) -> list[int]:
        """All remaining items with value < hi, in ascending order."""
        out: list[int] = []
        while True:
            if self._pos < len(self._buf):
                end = bisect_left(self._buf, hi, self._pos)
                out.extend(self._buf[self._pos : end])
                self._pos = end
                if end < len(self._buf):
                    break
            if self._done:
                break
            try:
                self._buf = next(self._chunks)
                self._pos = 0
            except StopIteration:
                self._done = True
        if out and self.on_consumed is not None:
            self.on_consumed(len(out))
        return out

    @property
    def exhausted(self) -> bool:
        return self._done and self._pos >= len(self._buf)


def merge_into(dest: ChainedTable, sources: list[MergeSource], scan_key: object) -> None:
    """One merge pass: scan every destination bucket in order, folding in
    the matching items from each source.

    Every written destination bucket is read and rewritten packed within
    the pass (one charge per block under the combined policy); virgin
    buckets that receive items are written fresh.  Item sets across
    sources and destination must be disjoint.
    """
    dev = dest.dev
    for j in range(dest.d):
        _, hi = bucket_bounds(j, dest.d, dest.u_bits)
        parts = [src.take_below(hi) for src in sources]
        if len(parts) == 1:
            incoming = parts[0]
        else:
            incoming = sorted(h for part in parts for h in part)
        window = (
            len(incoming)
            + dest.bucket_counts[j]
            + sum(src.buffered_words() for src in sources)
        )
        dev.account_memory(scan_key, window)
        dest.merge_bucket(j, incoming)
    dev.account_memory(scan_key, 0)
    assert all(src.exhausted for src in sources), "merge pass left items behind"
