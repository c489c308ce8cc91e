"""Global model parameters, the ideal hash function, and bucket indexing.

Every table in the package shares the same conventions:

* an item is identified with its w-bit hash value (one machine word),
* a table with d buckets (d a power of two) assigns an item to the bucket
  named by the log2(d) *most significant* bits of its hash, so refining a
  table by a factor g maps bucket j onto the g consecutive child buckets
  [g*j, g*j + g).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ParameterError

_MASK64 = (1 << 64) - 1

POLICIES = ("combined", "split")


@dataclass(frozen=True)
class Params:
    """Model parameters: block capacity b, memory budget m (words), universe
    size u = 2**u_bits, planned insertion count n, RNG seed, charging policy.
    """

    b: int = 64
    m: int = 4096
    u_bits: int = 63
    n: int = 1 << 18
    seed: int = 1
    policy: str = "combined"

    @property
    def u(self) -> int:
        return 1 << self.u_bits

    def validate(self) -> list[str]:
        return validate(self)

    def warnings(self) -> list[str]:
        return soft_warnings(self)

    def require_valid(self) -> "Params":
        violations = validate(self)
        if violations:
            raise ParameterError("; ".join(violations))
        return self

    def with_(self, **kw) -> "Params":
        return replace(self, **kw)


def validate(params: Params) -> list[str]:
    """Return every violated hard invariant (empty list means ok)."""
    v = []
    if params.b <= 0 or params.m <= 0 or params.u_bits <= 0 or params.n < 0:
        v.append("b, m, u_bits must be positive and n non-negative")
        return v
    if params.b <= params.u_bits:
        v.append(f"b > log2(u) required: b={params.b}, log2(u)={params.u_bits}")
    if params.m < 2 * params.b:
        v.append(f"m >= 2*b required: m={params.m}, b={params.b}")
    q, r = divmod(params.m, params.b)
    if r != 0 or q & (q - 1) != 0:
        v.append(f"m/b must be an integral power of two: m={params.m}, b={params.b}")
    if params.policy not in POLICIES:
        v.append(f"policy must be one of {POLICIES}: {params.policy!r}")
    if params.seed < 0 or params.seed > _MASK64:
        v.append("seed must fit in 64 bits")
    return v


def soft_warnings(params: Params) -> list[str]:
    """Advisory violations: reported, never fatal."""
    w = []
    if params.n > 0 and params.u < params.n**3:
        w.append(
            f"u >= n^3 recommended for collision-free hashing "
            f"(u=2^{params.u_bits}, n={params.n}); duplicate hash values "
            f"will be skipped by workload generation"
        )
    if params.n > params.m and math.log2(params.n / params.m) > params.b / 4:
        w.append(
            f"log2(n/m)={math.log2(params.n / params.m):.1f} exceeds b/4="
            f"{params.b / 4:.1f}; the buffered-table bounds assume "
            f"log2(n/m) small relative to b"
        )
    return w


def _mix64(x: int) -> int:
    # splitmix64 finalizer
    x &= _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


def ideal_hash(item_id: int, params: Params) -> int:
    """Hash value in [0, u), a pure function of (seed, item_id).

    A 64-bit mix of the item id offset by the seed, truncated to the top
    u_bits bits; distinct item ids give independent-looking values.
    """
    x = (item_id + params.seed * 0x9E3779B97F4A7C15) & _MASK64
    return _mix64(x) >> (64 - params.u_bits)


def ideal_hash_array(item_ids: np.ndarray, params: Params) -> np.ndarray:
    """Vectorized ideal_hash over a uint64 array of item ids."""
    x = np.asarray(item_ids, dtype=np.uint64)
    x = x + np.uint64((params.seed * 0x9E3779B97F4A7C15) & _MASK64)
    x ^= x >> np.uint64(30)
    x *= np.uint64(0xBF58476D1CE4E5B9)
    x ^= x >> np.uint64(27)
    x *= np.uint64(0x94D049BB133111EB)
    x ^= x >> np.uint64(31)
    return x >> np.uint64(64 - params.u_bits)


def bucket_index(h: int, d: int, u_bits: int) -> int:
    """Bucket of hash h in a table of d buckets: the log2(d) top bits of h."""
    if d <= 0 or d & (d - 1) != 0:
        raise ParameterError(f"bucket count must be a power of two: {d}")
    g = d.bit_length() - 1
    if g > u_bits:
        raise ParameterError(f"bucket count 2^{g} exceeds universe 2^{u_bits}")
    return h >> (u_bits - g)


def bucket_bounds(j: int, d: int, u_bits: int) -> tuple[int, int]:
    """Half-open hash range [lo, hi) covered by bucket j of d."""
    g = d.bit_length() - 1
    lo = j << (u_bits - g)
    return lo, lo + (1 << (u_bits - g))


def workload(params: Params, n: int | None = None) -> list[int]:
    """First n distinct hash values from item ids 0, 1, 2, ...

    Items whose hash collides with an earlier one are skipped (all stored
    hash values are assumed distinct; collisions are vanishing for u >= n^3).
    """
    if n is None:
        n = params.n
    if n > params.u:
        raise ParameterError(f"cannot draw {n} distinct hashes from u=2^{params.u_bits}")
    out: list[int] = []
    seen: set[int] = set()
    start = 0
    while len(out) < n:
        batch = max(1024, n - len(out))
        hs = ideal_hash_array(np.arange(start, start + batch, dtype=np.uint64), params)
        start += batch
        for h in hs.tolist():
            if h not in seen:
                seen.add(h)
                out.append(h)
                if len(out) == n:
                    break
    return out


# -- flat key=value config ---------------------------------------------------

CONFIG_KEYS = ("b", "m", "u_bits", "n", "seed", "policy")


def params_to_config(params: Params) -> str:
    return "".join(f"{k}={getattr(params, k)}\n" for k in CONFIG_KEYS)


def parse_config(text: str) -> dict:
    """Parse `key=value` lines ('#' comments and blanks allowed) into a dict
    of Params field overrides."""
    out: dict = {}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"config line {ln}: expected key=value, got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ParameterError(f"config line {ln}: unknown key {key!r}")
        if key == "policy":
            out[key] = val
        else:
            try:
                out[key] = int(val)
            except ValueError as exc:
                raise ParameterError(f"config line {ln}: {key} must be an integer") from exc
    return out
