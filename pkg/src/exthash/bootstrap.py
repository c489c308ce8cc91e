"""Buffered hash table: one big on-disk table fed by a small batching
hierarchy.

The first m items accumulate in memory and are dumped into the big table.
After that, inserts run through an embedded logarithmic-method series
until it holds the round's batch (2^(i-1) * m / beta items in round i);
each full batch is folded into the big table by a parallel scan.  When
the big table reaches 2^i * m items the round advances and the closing
merge rewrites it with doubled bucket count, keeping its load factor at
most 1/2.  At least a 1 - 1/beta fraction of all items therefore sits in
the big table at any time, queryable in about one I/O.
"""

from __future__ import annotations

import math

from .chained import ChainedTable, split_sorted_by_bucket
from .device import BlockDevice
from .errors import DuplicateItemError, EmptyTableError, ParameterError
from .logmethod import LogSeries
from .merge import MergeSource, merge_into
from .params import Params


def beta_from_exponent(c: float, b: int) -> int:
    """Batch divisor for the b^c preset, clamped to [2, b]."""
    return max(2, min(b, round(b**c)))


# Pinned by the calibration run in the acceptance suite: largest observed
# t_u / ((beta + 2*log2(n/m)) / b) across the calibration grid, with margin.
CALIBRATED_INSERT_CONSTANT = 5.0


def beta_from_epsilon(epsilon: float, b: int) -> int:
    """Batch divisor hitting an amortized insert target of epsilon I/Os."""
    if epsilon <= 0:
        raise ParameterError("epsilon must be positive")
    return max(2, min(b, math.floor(epsilon * b / (2 * CALIBRATED_INSERT_CONSTANT))))


class BootstrapTable:
    def __init__(self, dev: BlockDevice, params: Params, beta: int, gamma: int = 2):
        params.require_valid()
        if not 2 <= beta <= params.b:
            raise ParameterError(f"beta must satisfy 2 <= beta <= b: {beta}")
        if params.m // beta < 1:
            raise ParameterError(f"beta {beta} makes the first batch empty")
        self.dev = dev
        self.params = params
        self.beta = beta
        self.gamma = gamma
        self.buffer: set[int] = set()
        self.big: ChainedTable | None = None
        self.series = LogSeries(dev, params, gamma)
        self.round = 0
        self.inserted = 0
        self._base_charged = dev.ledger.charged
        self._bufkey = ("bootstrap-buffer", id(self))
        self._scankey = ("bootstrap-scan", id(self))

    # -- schedule ---------------------------------------------------------

    @property
    def batch_size(self) -> int:
        """Items routed through the series per merge in the current round."""
        if self.round < 1:
            raise ParameterError("no batches before the initial dump")
        return max(1, (2 ** (self.round - 1) * self.params.m) // self.beta)

    def big_bucket_count(self) -> int:
        # 2^(i+1) * m / b buckets in round i: load factor stays <= 1/2
        return 2 ** (self.round + 1) * (self.params.m // self.params.b)

    def total_items(self) -> int:
        big = self.big.item_count if self.big else 0
        return len(self.buffer) + self.series.total_items() + big

    def frac_big(self) -> float:
        total = self.total_items()
        return (self.big.item_count / total) if (self.big and total) else 0.0

    def contains(self, h: int) -> bool:
        return (
            h in self.buffer
            or self.series.contains(h)
            or (self.big is not None and self.big.contains(h))
        )

    # -- operations --------------------------------------------------------

    def insert(self, h: int) -> None:
        if self.contains(h):
            raise DuplicateItemError(f"hash value {h} already stored")
        self.inserted += 1
        if self.big is None:
            self.buffer.add(h)
            self.dev.account_memory(self._bufkey, len(self.buffer))
            if len(self.buffer) == self.params.m:
                self._initial_dump()
            return
        completes = self.series.total_items() + 1 == self.batch_size
        self.series.insert(h, auto_migrate=not completes)
        if completes:
            self.merge_batch()

    def _initial_dump(self) -> None:
        """Flush the first m items from memory into a fresh big table."""
        self.round = 1
        self.big = ChainedTable(self.dev, self.big_bucket_count(), self.params.u_bits)
        items = sorted(self.buffer)
        remaining = len(items)
        for j, part in split_sorted_by_bucket(items, self.big.d, self.params.u_bits):
            self.big.merge_bucket(j, part)
            remaining -= len(part)
            self.dev.account_memory(self._bufkey, remaining)
        self.buffer.clear()
        self.dev.account_memory(self._bufkey, 0)

    def merge_batch(self) -> int:
        """Fold the series' full batch into the big table in one scan pass;
        returns the I/Os charged.  A merge that brings the big table to
        2^i * m items closes the round: the scan writes into a table with
        doubled bucket count instead of rewriting in place."""
        if self.series.total_items() != self.batch_size:
            raise ParameterError(
                f"series holds {self.series.total_items()} items, "
                f"not a complete batch of {self.batch_size}"
            )
        before = self.dev.active_ledger.charged
        closing = (
            self.big.item_count + self.series.total_items()
            >= 2**self.round * self.params.m
        )
        sources = self.series.drain_sources()
        if closing:
            old = self.big
            self.round += 1
            self.big = ChainedTable(self.dev, self.big_bucket_count(), self.params.u_bits)
            merge_into(self.big, [MergeSource.from_table(old)] + sources, self._scankey)
        else:
            merge_into(self.big, sources, self._scankey)
        self.series.reset()
        return self.dev.active_ledger.charged - before

    def lookup(self, h: int) -> tuple[bool, int]:
        """Memory first (free), then the big table, then the series tables
        largest first; returns (found, blocks read)."""
        if h in self.buffer or h in self.series.h0:
            return True, 0
        ios = 0
        if self.big is not None:
            found, k = self.big.lookup(h)
            ios += k
            if found:
                return True, ios
        found, k = self.series.disk_lookup(h)
        return found, ios + k

    # -- measurements ---------------------------------------------------------

    def stored_items(self) -> list[int]:
        items = list(self.buffer)
        items.extend(self.series.stored_items())
        if self.big is not None:
            items.extend(self.big.stored_items())
        return sorted(items)

    def avg_successful_query(self, sample: int | None = None, rng=None) -> float:
        if self.total_items() == 0:
            raise EmptyTableError("no stored items to query")
        items = self.stored_items()
        if sample is not None and sample < len(items):
            if rng is None:
                raise ParameterError("sampled measurement needs an rng")
            items = [items[i] for i in rng.integers(0, len(items), size=sample)]
        total = 0
        with self.dev.measuring():
            for h in items:
                found, ios = self.lookup(h)
                assert found
                total += ios
        return total / len(items)

    def amortized_insert_cost(self) -> float:
        if self.inserted == 0:
            raise EmptyTableError("no insertions recorded")
        return (self.dev.ledger.charged - self._base_charged) / self.inserted

    def stats(self, sample: int | None = None, rng=None) -> dict:
        return {
            "beta": self.beta,
            "gamma": self.gamma,
            "round": self.round,
            "t_u": self.amortized_insert_cost(),
            "t_q": self.avg_successful_query(sample=sample, rng=rng),
            "frac_big": self.frac_big(),
            "charged": self.dev.ledger.charged - self._base_charged,
            "n": self.inserted,
            "m": self.params.m,
            "b": self.params.b,
            "seed": self.params.seed,
        }
