"""External hash table with chaining.

Each of the d buckets (d a power of two, MSB-addressed) owns a primary
block plus an overflow chain of further blocks.  Inserts append to the
last non-full block of the chain, walking it physically: read the
primary, then each overflow block in turn, until one has room or a fresh
overflow block is written.  Lookups walk the same chain and report the
blocks read.  Merge scans rewrite chains packed, so between merges only
the last block of a chain can be non-full.
"""

from __future__ import annotations

from bisect import bisect_left

from .device import BlockDevice
from .errors import DuplicateItemError, EmptyTableError, ParameterError
from .params import bucket_bounds, bucket_index


class ChainedTable:
    def __init__(self, dev: BlockDevice, d: int, u_bits: int):
        if d <= 0 or d & (d - 1) != 0:
            raise ParameterError(f"bucket count must be a power of two: {d}")
        if d.bit_length() - 1 > u_bits:
            raise ParameterError(f"bucket count {d} exceeds universe 2^{u_bits}")
        self.dev = dev
        self.d = d
        self.u_bits = u_bits
        base = dev.allocate(d)
        self.chains: list[list[int]] = [[base + j] for j in range(d)]
        self._written = [False] * d
        self.bucket_counts = [0] * d
        self.item_count = 0
        self._members: set[int] = set()

    @classmethod
    def create(cls, dev: BlockDevice, d: int, u_bits: int) -> "ChainedTable":
        return cls(dev, d, u_bits)

    # -- core operations --------------------------------------------------

    def insert(self, h: int) -> int:
        """Store h; returns the I/Os charged for this operation."""
        if h in self._members:
            raise DuplicateItemError(f"hash value {h} already stored")
        j = bucket_index(h, self.d, self.u_bits)
        before = self.dev.active_ledger.charged
        placed = False

        def append_if_room(items: list[int]) -> list[int] | None:
            if len(items) < self.dev.b:
                items.append(h)
                return items
            return None

        for bi in self.chains[j]:
            if self.dev.read_modify_write(bi, append_if_room):
                placed = True
                break
        if not placed:
            nb = self.dev.allocate(1)
            self.dev.write_block(nb, [h])
            self.chains[j].append(nb)
        self._written[j] = True
        self.bucket_counts[j] += 1
        self.item_count += 1
        self._members.add(h)
        return self.dev.active_ledger.charged - before

    def lookup(self, h: int) -> tuple[bool, int]:
        """Walk the chain of h's bucket; returns (found, blocks read)."""
        j = bucket_index(h, self.d, self.u_bits)
        ios = 0
        for bi in self.chains[j]:
            items = self.dev.read_block(bi)
            ios += 1
            if h in items:
                return True, ios
        return False, ios

    def contains(self, h: int) -> bool:
        """Uncharged membership check (instrumentation)."""
        return h in self._members

    # -- scan interface ----------------------------------------------------

    def read_bucket(self, j: int) -> list[int]:
        """Read every block of bucket j's chain; items returned sorted."""
        items: list[int] = []
        for bi in self.chains[j]:
            items.extend(self.dev.read_block(bi))
        items.sort()
        return items

    def iterate_buckets(self, visitor) -> None:
        """Visit buckets in index order (ascending hash order), charging
        sequential-scan reads; the visitor gets (bucket, sorted items)."""
        for j in range(self.d):
            visitor(j, self.read_bucket(j))

    def merge_bucket(self, j: int, incoming: list[int]) -> None:
        """Merge sorted incoming items into bucket j in one scan pass.

        The chain is read in full, the union written back packed; reads
        and same-block rewrites merge into one charge under the combined
        policy, fresh overflow blocks cost one write each.  On a virgin
        bucket (never written) nothing is read: the packed chain is
        written fresh.
        """
        for h in incoming:
            if h in self._members:
                raise DuplicateItemError(f"hash value {h} already stored")
        chain = self.chains[j]
        b = self.dev.b
        if not self._written[j]:
            if not incoming:
                return
            packed = [incoming[k : k + b] for k in range(0, len(incoming), b)]
            self.dev.write_block(chain[0], packed[0])
            for part in packed[1:]:
                nb = self.dev.allocate(1)
                self.dev.write_block(nb, part)
                chain.append(nb)
        else:
            packed: list[list[int]] = []

            def writer(blocks: list[list[int]]) -> list[tuple[int, list[int]]]:
                merged = sorted([h for blk in blocks for h in blk] + incoming)
                packed.extend(merged[k : k + b] for k in range(0, len(merged), b))
                return [
                    (idx, part)
                    for pos, (idx, part) in enumerate(zip(chain, packed))
                    if part != blocks[pos]
                ]

            self.dev.scan_rewrite(chain, writer)
            if len(packed) < len(chain):
                del chain[max(len(packed), 1) :]
            for part in packed[len(chain) :]:
                nb = self.dev.allocate(1)
                self.dev.write_block(nb, part)
                chain.append(nb)
        self._written[j] = True
        self.bucket_counts[j] += len(incoming)
        self.item_count += len(incoming)
        self._members.update(incoming)

    # -- measurements -------------------------------------------------------

    @property
    def load_factor(self) -> float:
        return self.item_count / (self.d * self.dev.b)

    @property
    def max_chain_len(self) -> int:
        return max(len(c) for c in self.chains)

    def stored_items(self) -> list[int]:
        """Sorted stored hash values (instrumentation, uncharged)."""
        return sorted(self._members)

    def avg_successful_query(self, sample: int | None = None, rng=None) -> float:
        """Mean lookup I/Os over stored items, charged to the side ledger.

        Exhaustive over all items unless ``sample`` is given, in which case
        that many uniform draws (with replacement) are measured.
        """
        if self.item_count == 0:
            raise EmptyTableError("no stored items to query")
        items = self.stored_items()
        if sample is not None:
            if rng is None:
                raise ParameterError("sampled measurement needs an rng")
            items = [items[k] for k in rng.integers(0, len(items), size=sample)]
        total = 0
        with self.dev.measuring():
            for h in items:
                found, ios = self.lookup(h)
                assert found
                total += ios
        return total / len(items)

    def stats_row(self) -> dict:
        return {
            "d": self.d,
            "item_count": self.item_count,
            "load_factor": self.load_factor,
            "max_chain_len": self.max_chain_len,
        }


def split_sorted_by_bucket(items: list[int], d: int, u_bits: int) -> list[tuple[int, list[int]]]:
    """Partition an ascending item list by bucket of d; returns (bucket,
    slice) pairs for non-empty buckets only."""
    out = []
    pos = 0
    n = len(items)
    while pos < n:
        j = bucket_index(items[pos], d, u_bits)
        _, hi = bucket_bounds(j, d, u_bits)
        end = bisect_left(items, hi, pos)
        out.append((j, items[pos:end]))
        pos = end
    return out
