"""Deterministic pseudo-random streams.

Every stochastic component of the toolkit draws from a counter-based
splitmix64 generator so that results are bit-reproducible across
platforms and across worker counts.  Normal variates use Box-Muller.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U53 = 2.0 ** -53


def _mix(x):
    """splitmix64 output function (vectorized over uint64 arrays)."""
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = (x ^ (x >> np.uint64(30))) * _MIX1
        x = (x ^ (x >> np.uint64(27))) * _MIX2
    return x ^ (x >> np.uint64(31))


def _hash_tag(tag) -> np.uint64:
    """FNV-1a over the utf-8 bytes of str(tag)."""
    h = 0xCBF29CE484222325
    for b in str(tag).encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return np.uint64(h)


class Stream:
    """Stateful counter-based splitmix64 stream."""

    def __init__(self, seed: int):
        self._seed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        self._count = np.uint64(0)

    def child(self, tag) -> "Stream":
        """Independent stream derived from this stream's seed and a tag."""
        return Stream(int(_mix(self._seed ^ _hash_tag(tag))))

    def _raw(self, size: int) -> np.ndarray:
        with np.errstate(over="ignore"):
            idx = np.arange(1, size + 1, dtype=np.uint64) + self._count
            self._count += np.uint64(size)
            base = self._seed + idx * _GOLDEN
        return _mix(base)

    def uniform(self, size: int) -> np.ndarray:
        """Uniform floats in [0, 1)."""
        return (self._raw(size) >> np.uint64(11)).astype(np.float64) * _U53

    def normal(self, size: int) -> np.ndarray:
        """Standard normal variates via Box-Muller."""
        pairs = (size + 1) // 2
        raw = self._raw(2 * pairs)
        # u1 in (0, 1] avoids log(0)
        u1 = ((raw[:pairs] >> np.uint64(11)).astype(np.float64) + 1.0) * _U53
        u2 = (raw[pairs:] >> np.uint64(11)).astype(np.float64) * _U53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        out = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
        return out[:size]

    def integers(self, low: int, high: int, size: int) -> np.ndarray:
        """Integers in [low, high). Modulo bias is negligible for small spans."""
        if high <= low:
            raise ValueError("empty integer range")
        span = np.uint64(high - low)
        return (self._raw(size) % span).astype(np.int64) + low

    def permutation(self, n: int) -> np.ndarray:
        """Deterministic permutation of range(n)."""
        return np.argsort(self.uniform(n), kind="stable")


def stream_for_repetition(seed: int, repetition: int, tag="") -> Stream:
    """Per-repetition stream; repetition seeds are seed XOR repetition index."""
    s = Stream((int(seed) ^ int(repetition)) & 0xFFFFFFFFFFFFFFFF)
    return s.child(tag) if tag else s
