"""Seedable, platform-independent random streams.

The generator is SplitMix64: a 64-bit integer state advanced by a fixed odd
increment and passed through an avalanche finalizer.  Every task draws from its
own substream whose initial state is derived from ``(seed, *tag)``, so results
never depend on how work is scheduled across threads.

Beta variates use the gamma ratio X / (X + Y) with Marsaglia-Tsang rejection
for the gamma draws and Box-Muller normals.  Those are exact methods; the only
floating point involved is in the transforms themselves.
"""
from __future__ import annotations

import hashlib
import math

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TWO_M53 = 1.0 / 9007199254740992.0


def fmix64(z: int) -> int:
    """SplitMix64 output finalizer on a python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def tag_int(tag) -> int:
    """Map an int or str tag to a 64-bit integer, stably across runs."""
    if isinstance(tag, (bool, np.bool_)):
        return int(tag)
    if isinstance(tag, (int, np.integer)):
        return int(tag) & MASK64
    if isinstance(tag, str):
        return int.from_bytes(hashlib.blake2b(tag.encode("utf-8"), digest_size=8).digest(), "little")
    raise TypeError(f"unsupported substream tag {tag!r}")


def derive(key: int, tag: int) -> int:
    return fmix64(key ^ fmix64(((tag + 1) * GOLDEN) & MASK64))


def substream_key(seed: int, *tags) -> int:
    key = fmix64((int(seed) + GOLDEN) & MASK64)
    for t in tags:
        key = derive(key, tag_int(t))
    return key


def derive_array(keys: np.ndarray, tags: np.ndarray) -> np.ndarray:
    """Vectorized :func:`derive` over uint64 arrays (broadcasting)."""
    keys = np.asarray(keys, dtype=np.uint64)
    tags = np.asarray(tags, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return fmix64_array(keys ^ fmix64_array((tags + np.uint64(1)) * np.uint64(GOLDEN)))


def fmix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        return z ^ (z >> np.uint64(31))


class Stream:
    """One SplitMix64 substream.  Not thread-safe; give each task its own."""

    __slots__ = ("state",)

    def __init__(self, key: int):
        self.state = int(key) & MASK64

    @classmethod
    def from_seed(cls, seed: int, *tags) -> "Stream":
        return cls(substream_key(seed, *tags))

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return fmix64(self.state)

    def uniform(self) -> float:
        """Uniform double in the open interval (0, 1)."""
        return ((self.next_u64() >> 11) + 0.5) * _TWO_M53

    def integers(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def normal(self) -> float:
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def gamma(self, shape: float) -> float:
        if shape <= 0:
            raise ValueError("shape must be positive")
        if shape < 1.0:
            g = self.gamma(shape + 1.0)
            return g * self.uniform() ** (1.0 / shape)
        d = shape - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        while True:
            x = self.normal()
            v = 1.0 + c * x
            if v <= 0.0:
                continue
            v = v * v * v
            u = self.uniform()
            if math.log(u) < 0.5 * x * x + d - d * v + d * math.log(v):
                return d * v

    def beta(self, a: float, b: float) -> float:
        x = self.gamma(a)
        y = self.gamma(b)
        return x / (x + y)

    def choice_without_replacement(self, n: int, k: int) -> list[int]:
        """k distinct values from range(n) in draw order (partial Fisher-Yates)."""
        if not 0 <= k <= n:
            raise ValueError("need 0 <= k <= n")
        pool = list(range(n))
        for i in range(k):
            r = i + self.integers(n - i)
            pool[i], pool[r] = pool[r], pool[i]
        return pool[:k]
