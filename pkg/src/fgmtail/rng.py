"""Counter-based random streams.

Every block of uniforms is drawn from a Philox4x64 generator whose 128-bit
key packs ``(seed, purpose, rep, chunk)``; the draw index is the Philox
counter.  A block therefore depends only on those four numbers, never on
which worker produced it or in what order.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# stream purposes
TAG_SIMULATION = 1
TAG_WEIGHTS = 2
TAG_DIAGNOSTIC = 3

_REP_BITS = 24
_CHUNK_BITS = 32


def stream_key(seed: int, tag: int, rep: int, chunk: int) -> int:
    """Pack a stream identity into a Philox key; injective for in-range arguments."""
    if not 0 <= tag < 256:
        raise ValueError(f"tag out of range: {tag}")
    if not 0 <= rep < (1 << _REP_BITS):
        raise ValueError(f"rep out of range: {rep}")
    if not 0 <= chunk < (1 << _CHUNK_BITS):
        raise ValueError(f"chunk out of range: {chunk}")
    hi = (tag << 56) | (rep << _CHUNK_BITS) | chunk
    return (hi << 64) | (int(seed) & MASK64)


def generator(seed: int, tag: int, rep: int = 0, chunk: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=stream_key(seed, tag, rep, chunk)))


def chunk_sizes(total: int, chunk_size: int) -> list[int]:
    full, rest = divmod(total, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])
