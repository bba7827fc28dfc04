"""Seeded, platform-stable random streams.

Every stream is a Philox-4x64 counter-based generator keyed through numpy's
``SeedSequence``.  Only the raw 64-bit output of the bit generator is used, and
bounded integers / shuffles are derived here, so results do not depend on
numpy's higher-level sampling algorithms.
"""

from __future__ import annotations

import numpy as np

STREAM_VERSION = "philox4x64-lemire-fy/1"
_MASK64 = (1 << 64) - 1


def streams(seed: int, count: int, *key: int) -> list[np.random.Philox]:
    """``count`` independent bit generators derived from ``(seed, *key)``."""
    ss = np.random.SeedSequence([int(seed) & _MASK64, *key])
    return [np.random.Philox(child) for child in ss.spawn(count)]


def stream(seed: int, *key: int) -> np.random.Philox:
    return streams(seed, 1, *key)[0]


class RawStream:
    """Buffered access to the raw 64-bit words of a bit generator."""

    def __init__(self, bitgen: np.random.Philox, chunk: int = 4096) -> None:
        self._bg = bitgen
        self._chunk = chunk
        self._buf: list[int] = []
        self._pos = 0

    def next(self) -> int:
        if self._pos == len(self._buf):
            self._buf = self._bg.random_raw(self._chunk).tolist()
            self._pos = 0
        x = self._buf[self._pos]
        self._pos += 1
        return x

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) by Lemire's multiply-and-reject."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        prod = self.next() * bound
        low = prod & _MASK64
        if low < bound:
            threshold = (-bound) % bound
            while low < threshold:
                prod = self.next() * bound
                low = prod & _MASK64
        return prod >> 64

    def uniform(self) -> float:
        return (self.next() >> 11) * (1.0 / (1 << 53))

    def words(self, count: int) -> np.ndarray:
        return np.array([self.next() for _ in range(count)], dtype=np.uint64)

    def seed64(self) -> int:
        return self.next()


def fisher_yates(n: int, raw: RawStream) -> np.ndarray:
    """A uniformly random permutation of ``range(n)``."""
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = raw.below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return np.array(perm, dtype=np.int64)


def shuffled(items: np.ndarray, raw: RawStream) -> np.ndarray:
    return np.asarray(items)[fisher_yates(len(items), raw)]
