"""Simulated block device with an exact I/O ledger.

The device is a growable array of blocks, each holding at most b items
(one word per item).  Counting rules:

* ``read_block`` / ``write_block`` charge one I/O each, always.
* ``read_modify_write`` reads a block and writes it straight back; under
  the ``combined`` policy that counts as a single I/O, under ``split`` as
  two.
* A scan pass (``sequential_scan`` / ``scan_rewrite``) extends the same
  rule to every block it rewrites in place: a block read and rewritten
  within one pass is charged once under ``combined``.
* ``allocate`` is bookkeeping and charges nothing; fresh blocks are paid
  for when first written.

The device also meters the memory-resident footprint of whatever
structures it hosts (``account_memory``): the running total of words must
never exceed the m-word budget, and any excess raises immediately.
Charges made inside a ``measuring()`` context go to a separate side
ledger so read-only measurements never pollute insertion accounting.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import BlockCapacityError, DeviceError, MemoryBudgetError, ParameterError


@dataclass
class IoLedger:
    reads: int = 0
    writes: int = 0
    charged: int = 0

    def snapshot(self) -> tuple[int, int, int]:
        return (self.reads, self.writes, self.charged)

    def csv_fragment(self, policy: str) -> str:
        return f"{self.reads},{self.writes},{self.charged},{policy}"


@dataclass
class _TraceEntry:
    op: str
    read_indices: tuple[int, ...] = ()
    write_indices: tuple[int, ...] = ()


class BlockDevice:
    """Single-owner simulated disk; not safe for concurrent mutation."""

    def __init__(self, b: int, m: int, policy: str = "combined", trace: bool = False):
        if policy not in ("combined", "split"):
            raise ParameterError(f"unknown charging policy {policy!r}")
        self.b = b
        self.m = m
        self.policy = policy
        self._blocks: list[list[int]] = []
        self.ledger = IoLedger()
        self.side_ledger = IoLedger()
        self._active = self.ledger
        self._memory: dict[object, int] = {}
        self.memory_words_in_use = 0
        self.peak_memory_words = 0
        self.trace: list[_TraceEntry] | None = [] if trace else None

    @classmethod
    def from_params(cls, params, trace: bool = False) -> "BlockDevice":
        return cls(params.b, params.m, params.policy, trace=trace)

    # -- allocation and access ------------------------------------------

    def allocate(self, count: int) -> int:
        """Append count fresh empty blocks; returns the first index."""
        if count < 1:
            raise ParameterError("allocate needs count >= 1")
        first = len(self._blocks)
        self._blocks.extend([] for _ in range(count))
        if self.trace is not None:
            self.trace.append(_TraceEntry("alloc"))
        return first

    def _check(self, i: int) -> None:
        if not 0 <= i < len(self._blocks):
            raise DeviceError(f"block {i} was never allocated")

    def read_block(self, i: int) -> list[int]:
        """One read.  The returned list is the device's copy: treat it as
        read-only (mutations go through write paths)."""
        self._check(i)
        self._active.reads += 1
        self._active.charged += 1
        if self.trace is not None:
            self.trace.append(_TraceEntry("read", (i,)))
        return self._blocks[i]

    def write_block(self, i: int, items: Sequence[int]) -> None:
        """One write; replaces the block."""
        self._check(i)
        if len(items) > self.b:
            raise BlockCapacityError(f"{len(items)} items > block capacity {self.b}")
        self._active.writes += 1
        self._active.charged += 1
        self._blocks[i] = list(items)
        if self.trace is not None:
            self.trace.append(_TraceEntry("write", (), (i,)))

    def read_modify_write(self, i: int, mutate: Callable[[list[int]], list[int] | None]) -> bool:
        """Read block i, apply mutate, write the result back.

        Charged once under combined, twice under split.  ``mutate`` may
        return None to skip the write-back (the block was only inspected;
        charged as a bare read).  A mutate result that overfills raises
        before any charge is committed.  Returns True when a write
        happened.
        """
        self._check(i)
        new_items = mutate(list(self._blocks[i]))
        if new_items is None:
            self._active.reads += 1
            self._active.charged += 1
            if self.trace is not None:
                self.trace.append(_TraceEntry("read", (i,)))
            return False
        if len(new_items) > self.b:
            raise BlockCapacityError(f"{len(new_items)} items > block capacity {self.b}")
        self._active.reads += 1
        self._active.writes += 1
        self._active.charged += 1 if self.policy == "combined" else 2
        self._blocks[i] = list(new_items)
        if self.trace is not None:
            self.trace.append(_TraceEntry("rmw", (i,), (i,)))
        return True

    def sequential_scan(
        self,
        indices: Iterable[int],
        visitor: Callable[[int, list[int]], list[int] | None],
    ) -> None:
        """Visit blocks in order; the visitor may return replacement items.

        Charges one read per block, with in-place rewrites merged into the
        read under the combined policy (one pass, footnote-style charging).
        """
        for i in indices:
            self._check(i)
            new_items = visitor(i, list(self._blocks[i]))
            if new_items is None:
                self._active.reads += 1
                self._active.charged += 1
                if self.trace is not None:
                    self.trace.append(_TraceEntry("read", (i,)))
            else:
                if len(new_items) > self.b:
                    raise BlockCapacityError(
                        f"{len(new_items)} items > block capacity {self.b}"
                    )
                self._active.reads += 1
                self._active.writes += 1
                self._active.charged += 1 if self.policy == "combined" else 2
                self._blocks[i] = list(new_items)
                if self.trace is not None:
                    self.trace.append(_TraceEntry("rmw", (i,), (i,)))

    def scan_rewrite(
        self,
        read_indices: Sequence[int],
        writer: Callable[[list[list[int]]], list[tuple[int, list[int]]]],
    ) -> list[list[int]]:
        """Grouped scan pass: read a block group, write some of it back.

        ``writer`` receives the contents of ``read_indices`` (in order) and
        returns (index, items) rewrites; every written index must belong to
        the group.  Charging is the one-pass rule: len(read_indices) reads
        plus, under split policy only, one extra charge per rewrite.
        Returns the contents that were read.
        """
        for i in read_indices:
            self._check(i)
        contents = [list(self._blocks[i]) for i in read_indices]
        writes = writer(contents)
        group = set(read_indices)
        for i, items in writes:
            if i not in group:
                raise DeviceError(f"scan_rewrite wrote outside its read group: {i}")
            if len(items) > self.b:
                raise BlockCapacityError(f"{len(items)} items > block capacity {self.b}")
        self._active.reads += len(read_indices)
        self._active.writes += len(writes)
        if self.policy == "combined":
            self._active.charged += len(read_indices)
        else:
            self._active.charged += len(read_indices) + len(writes)
        for i, items in writes:
            self._blocks[i] = list(items)
        if self.trace is not None:
            self.trace.append(
                _TraceEntry("scan", tuple(read_indices), tuple(i for i, _ in writes))
            )
        return contents

    @property
    def active_ledger(self) -> IoLedger:
        return self._active

    # -- measurement and memory accounting ------------------------------

    @contextmanager
    def measuring(self):
        """Route charges to the side ledger (query measurements)."""
        previous = self._active
        self._active = self.side_ledger
        try:
            yield self.side_ledger
        finally:
            self._active = previous

    def account_memory(self, key: object, words: int) -> None:
        """Set the memory-resident footprint (in words) owned by key."""
        old = self._memory.get(key, 0)
        total = self.memory_words_in_use - old + words
        if total > self.m:
            raise MemoryBudgetError(
                f"memory gauge {total} words exceeds budget m={self.m}"
            )
        if words:
            self._memory[key] = words
        else:
            self._memory.pop(key, None)
        self.memory_words_in_use = total
        if total > self.peak_memory_words:
            self.peak_memory_words = total

    # -- instrumentation (no charges) ------------------------------------

    def peek(self, i: int) -> list[int]:
        """Uncharged block inspection for tests and conservation checks."""
        self._check(i)
        return list(self._blocks[i])

    @property
    def block_count(self) -> int:
        return len(self._blocks)


def replay_charges(trace: Sequence[_TraceEntry], policy: str) -> IoLedger:
    """Recompute ledger totals from a recorded trace by the documented
    charging rules; an independent check that the live counters are exact."""
    led = IoLedger()
    for e in trace:
        if e.op == "alloc":
            continue
        if e.op == "read":
            led.reads += 1
            led.charged += 1
        elif e.op == "write":
            led.writes += 1
            led.charged += 1
        elif e.op == "rmw":
            led.reads += 1
            led.writes += 1
            led.charged += 1 if policy == "combined" else 2
        elif e.op == "scan":
            r, w = len(e.read_indices), len(e.write_indices)
            led.reads += r
            led.writes += w
            led.charged += r if policy == "combined" else r + w
        else:
            raise ValueError(f"unknown trace op {e.op!r}")
    return led
