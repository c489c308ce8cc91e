"""Logarithmic-method hash table hierarchy.

A memory-resident level 0 (a plain set, capacity m/2 items) sits on top
of on-disk chained tables where level k has gamma^k * (m/b) buckets and
holds at most gamma^k * m / 2 items, keeping every disk table at load
factor <= 1/2.  Inserts go to level 0 for free; a full level migrates
wholesale into the next one by a parallel scan, refining each bucket into
gamma consecutive child buckets, cascading while the receiving level
fills up.
"""

from __future__ import annotations

from .chained import ChainedTable
from .device import BlockDevice
from .errors import DuplicateItemError, EmptyTableError, ParameterError
from .merge import MergeSource, merge_into
from .params import Params


class LogSeries:
    def __init__(self, dev: BlockDevice, params: Params, gamma: int = 2):
        if gamma < 2 or gamma & (gamma - 1) != 0:
            raise ParameterError(f"gamma must be a power of two >= 2: {gamma}")
        params.require_valid()
        self.dev = dev
        self.params = params
        self.gamma = gamma
        self.h0: set[int] = set()
        self.h0_capacity = params.m // 2
        self.tables: list[ChainedTable] = []  # index k-1 holds level k
        self.inserted = 0
        self._base_charged = dev.ledger.charged
        self._memkey = ("logseries-h0", id(self))
        self._scankey = ("logseries-scan", id(self))

    # -- structure -----------------------------------------------------------

    def level_capacity(self, k: int) -> int:
        return (self.gamma**k * self.params.m) // 2

    def level_buckets(self, k: int) -> int:
        return self.gamma**k * (self.params.m // self.params.b)

    def levels_nonempty(self) -> int:
        return (1 if self.h0 else 0) + sum(1 for t in self.tables if t.item_count)

    def total_items(self) -> int:
        return len(self.h0) + sum(t.item_count for t in self.tables)

    def contains(self, h: int) -> bool:
        return h in self.h0 or any(t.contains(h) for t in self.tables)

    # -- operations ------------------------------------------------------------

    def insert(self, h: int, auto_migrate: bool = True) -> None:
        """Add h to the memory level at zero I/O; a full level 0 migrates
        (possibly cascading) unless the caller defers it."""
        if self.contains(h):
            raise DuplicateItemError(f"hash value {h} already stored")
        self.h0.add(h)
        self.inserted += 1
        self.dev.account_memory(self._memkey, len(self.h0))
        if auto_migrate and len(self.h0) == self.h0_capacity:
            self.migrate(0)

    def migrate(self, k: int) -> int:
        """Move all of level k into level k+1 by a parallel scan; returns
        the I/Os charged (including any cascade)."""
        before = self.dev.active_ledger.charged
        dest = self._ensure_level(k + 1)
        if k == 0:
            if len(self.h0) != self.h0_capacity:
                raise ParameterError("level 0 is not at capacity")
            moving = len(self.h0)
            remaining = [moving]

            def consumed(count: int) -> None:
                remaining[0] -= count
                self.dev.account_memory(self._memkey, remaining[0])

            source = MergeSource.from_memory(sorted(self.h0), on_consumed=consumed)
        else:
            if k > len(self.tables) or self.tables[k - 1].item_count != self.level_capacity(k):
                raise ParameterError(f"level {k} is not at capacity")
            moving = self.tables[k - 1].item_count
            source = MergeSource.from_table(self.tables[k - 1])
        assert dest.item_count + moving <= self.level_capacity(k + 1), (
            "migration would overfill the receiving level"
        )
        merge_into(dest, [source], self._scankey)
        if k == 0:
            self.h0.clear()
            self.dev.account_memory(self._memkey, 0)
        else:
            self.tables[k - 1] = ChainedTable(
                self.dev, self.level_buckets(k), self.params.u_bits
            )
        if dest.item_count == self.level_capacity(k + 1):
            self.migrate(k + 1)
        return self.dev.active_ledger.charged - before

    def _ensure_level(self, k: int) -> ChainedTable:
        while len(self.tables) < k:
            level = len(self.tables) + 1
            self.tables.append(
                ChainedTable(self.dev, self.level_buckets(level), self.params.u_bits)
            )
        return self.tables[k - 1]

    def lookup(self, h: int) -> tuple[bool, int]:
        """Probe level 0 for free, then the disk tables largest first."""
        if h in self.h0:
            return True, 0
        return self.disk_lookup(h)

    def disk_lookup(self, h: int) -> tuple[bool, int]:
        ios = 0
        for table in self._disk_probe_order():
            found, k = table.lookup(h)
            ios += k
            if found:
                return True, ios
        return False, ios

    def _disk_probe_order(self) -> list[ChainedTable]:
        live = [(t.item_count, i, t) for i, t in enumerate(self.tables) if t.item_count]
        live.sort(key=lambda e: (-e[0], -e[1]))
        return [t for _, _, t in live]

    def drain_sources(self) -> list[MergeSource]:
        """Sources handing every stored item to an external merge, memory
        level first; the caller must also call reset() afterwards."""
        remaining = [len(self.h0)]

        def consumed(count: int) -> None:
            remaining[0] -= count
            self.dev.account_memory(self._memkey, remaining[0])

        sources = [MergeSource.from_memory(sorted(self.h0), on_consumed=consumed)]
        sources.extend(MergeSource.from_table(t) for t in self.tables if t.item_count)
        return sources

    def reset(self) -> None:
        """Empty the series; disk blocks of dropped tables are orphaned."""
        self.h0.clear()
        self.dev.account_memory(self._memkey, 0)
        self.tables = []

    # -- measurements -----------------------------------------------------------

    def stored_items(self) -> list[int]:
        items = list(self.h0)
        for t in self.tables:
            items.extend(t.stored_items())
        return sorted(items)

    def avg_successful_query(self, sample: int | None = None, rng=None) -> float:
        """Mean lookup I/Os over stored items, on the side ledger."""
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

    def avg_unsuccessful_query(self, probes: int, rng) -> float:
        """Mean lookup I/Os over absent keys drawn uniformly from [0, u)."""
        total = 0
        done = 0
        with self.dev.measuring():
            while done < probes:
                h = int(rng.integers(0, self.params.u))
                if self.contains(h):
                    continue
                _, ios = self.lookup(h)
                total += ios
                done += 1
        return total / probes

    def amortized_insert_cost(self) -> float:
        if self.inserted == 0:
            raise EmptyTableError("no insertions recorded")
        return (self.dev.ledger.charged - self._base_charged) / self.inserted

    def stats(self, sample: int | None = None, rng=None) -> dict:
        return {
            "gamma": self.gamma,
            "levels_nonempty": self.levels_nonempty(),
            "t_u_amortized": self.amortized_insert_cost(),
            "t_q_avg": self.avg_successful_query(sample=sample, rng=rng),
            "charged": self.dev.ledger.charged - self._base_charged,
            "reads": self.dev.ledger.reads,
            "writes": self.dev.ledger.writes,
        }
