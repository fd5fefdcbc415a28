"""Weak-entry intern table enforcing at most one live node per structural key."""

from __future__ import annotations

import struct
import weakref
from dataclasses import dataclass
from typing import Any, Callable, Iterator, Sequence

MASK64 = (1 << 64) - 1
HASH_SEED = 0x9E3779B97F4A7C15
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _avalanche(z: int) -> int:
    # splitmix64 finalizer
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _payload_bits(payload: Any) -> int:
    if payload is None:
        return 0
    if isinstance(payload, float):
        return struct.unpack("<Q", struct.pack("<d", payload))[0]
    h = _FNV_OFFSET
    for byte in str(payload).encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & MASK64
    return h


def structural_hash(tag: int, payload: Any, operand_hashes: Sequence[int]) -> int:
    """64-bit hash of a node from its tag, payload bits and operand hashes.

    Operand hashes are already cached on the operands, so the cost is
    O(arity) and the value depends only on structure (never on ids), which
    keeps it identical across consing and naive sessions.
    """
    h = _avalanche(HASH_SEED + tag)
    h = _avalanche(h ^ _payload_bits(payload))
    for oh in operand_hashes:
        h = _avalanche(h * 31 + oh)
    return h


@dataclass(frozen=True)
class InternStats:
    lookups: int = 0
    hits: int = 0
    inserts: int = 0
    collisions: int = 0
    purged: int = 0
    live: int = 0

    @property
    def hit_rate(self) -> float:
        return self.hits / self.lookups if self.lookups else 0.0


class InternTable:
    """Hash map from 64-bit structural hash to a bucket of weak node references.

    Nodes are compared structurally only inside a bucket. Because operands
    are themselves interned, structural comparison of two candidates reduces
    to comparing kind, payload and operand identity. Entries do not keep
    nodes alive; dead entries are dropped by :meth:`purge` or opportunistically
    whenever their bucket is scanned.
    """

    def __init__(self) -> None:
        self._buckets: dict[int, list[weakref.ref]] = {}
        self._next_id = 0
        self._lookups = 0
        self._hits = 0
        self._inserts = 0
        self._collisions = 0
        self._purged = 0

    def fresh_id(self) -> int:
        nid = self._next_id
        self._next_id += 1
        return nid

    @property
    def next_id(self) -> int:
        return self._next_id

    def intern(self, kind: Any, payload: Any, operands: tuple, hash_: int,
               factory: Callable[[int], Any]) -> Any:
        """Return the live node equal to the key, or insert ``factory(new_id)``."""
        self._lookups += 1
        bucket = self._buckets.get(hash_)
        if bucket is None:
            bucket = self._buckets[hash_] = []
        dead = 0
        found = None
        for ref in bucket:
            node = ref()
            if node is None:
                dead += 1
                continue
            if found is not None:
                continue
            if (node.kind is kind and node.payload == payload
                    and len(node.operands) == len(operands)
                    and all(x is y for x, y in zip(node.operands, operands))):
                found = node
            else:
                self._collisions += 1
        if dead:
            bucket[:] = [r for r in bucket if r() is not None]
            self._purged += dead
        if found is not None:
            self._hits += 1
            return found
        node = factory(self.fresh_id())
        bucket.append(weakref.ref(node))
        self._inserts += 1
        return node

    def purge(self) -> int:
        """Drop entries whose node is no longer referenced; return how many."""
        removed = 0
        for key in list(self._buckets):
            bucket = self._buckets[key]
            alive = [r for r in bucket if r() is not None]
            removed += len(bucket) - len(alive)
            if alive:
                bucket[:] = alive
            else:
                del self._buckets[key]
        self._purged += removed
        return removed

    def live_nodes(self) -> Iterator[Any]:
        for key, bucket in self._buckets.items():
            for ref in bucket:
                node = ref()
                if node is not None:
                    yield key, node

    def stats(self) -> InternStats:
        live = sum(1 for _ in self.live_nodes())
        return InternStats(self._lookups, self._hits, self._inserts,
                           self._collisions, self._purged, live)

    def __len__(self) -> int:
        return sum(len(b) for b in self._buckets.values())
