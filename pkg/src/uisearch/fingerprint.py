"""Deterministic byte-stream draws derived from SHA-256.

The mock extractor and mock embedding provider must produce identical output
for identical input across processes, platforms, and interpreter versions, so
they draw from an explicit hash stream instead of ``random.Random``.
"""

from __future__ import annotations

import hashlib
from collections.abc import Sequence
from typing import TypeVar

T = TypeVar("T")


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash of ``data``."""
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


class DigestStream:
    """Endless deterministic byte stream seeded by arbitrary byte strings."""

    def __init__(self, *seed_parts: bytes):
        seed = hashlib.sha256(b"\x1f".join(seed_parts)).digest()
        self._seed = seed
        self._counter = 0
        self._buffer = b""

    def take(self, n: int) -> bytes:
        while len(self._buffer) < n:
            block = hashlib.sha256(
                self._seed + self._counter.to_bytes(8, "little")
            ).digest()
            self._counter += 1
            self._buffer += block
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out

    def u32(self) -> int:
        return int.from_bytes(self.take(4), "little")

    def randint(self, low: int, high: int) -> int:
        """Uniform-ish integer in [low, high]; modulo bias is irrelevant here."""
        if high < low:
            raise ValueError("empty range")
        return low + self.u32() % (high - low + 1)

    def choice(self, items: Sequence[T]) -> T:
        return items[self.u32() % len(items)]

    def sample(self, items: Sequence[T], k: int) -> list[T]:
        """k distinct items, order determined by the stream."""
        pool = list(items)
        picked: list[T] = []
        for _ in range(min(k, len(pool))):
            picked.append(pool.pop(self.u32() % len(pool)))
        return picked
