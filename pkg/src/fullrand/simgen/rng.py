"""Counter-based uniform streams.

A stream is identified by ``(seed, tag)``; its ``k``-th uniform is a pure
function of ``(seed, tag, k)`` (Philox4x64 evaluated at counter ``k // 4``).
Any slice of a stream can therefore be produced independently, which is
what makes block-parallel generation equal to serial generation.
"""
from __future__ import annotations

import zlib

import numpy as np

_TWO53 = float(2 ** 53)


def _key(seed: int, tag: str, attempt: int = 0) -> np.ndarray:
    ss = np.random.SeedSequence(entropy=int(seed) & (2 ** 64 - 1),
                                spawn_key=(zlib.crc32(tag.encode()), int(attempt)))
    return ss.generate_state(2, dtype=np.uint64)


class Stream:
    """Uniform(0, 1) stream addressed by position."""

    def __init__(self, seed: int, tag: str, attempt: int = 0):
        self.seed = int(seed)
        self.tag = tag
        self.key = _key(seed, tag, attempt)

    def raw(self, start: int, count: int) -> np.ndarray:
        if count <= 0:
            return np.empty(0, dtype=np.uint64)
        block, skip = divmod(int(start), 4)
        bg = np.random.Philox(key=self.key,
                              counter=np.array([block, 0, 0, 0], dtype=np.uint64))
        return bg.random_raw(skip + count)[skip:]

    def uniforms(self, start: int, count: int) -> np.ndarray:
        """Open-interval uniforms at positions ``start .. start + count - 1``."""
        x = self.raw(start, count) >> np.uint64(11)
        return (x.astype(float) + 0.5) / _TWO53
