"""Deterministic pseudo-random streams.

The simulator must produce byte-identical results for a given seed on any
platform, so all randomness flows through a splitmix64 generator implemented
with plain integer arithmetic. Streams can derive labelled sub-streams; a
sub-stream depends only on the parent seed and the label, never on how much
the parent has already been consumed. That keeps per-traveler randomness
stable even when unrelated draws are added elsewhere.
"""
from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _absorb(h: int, key: int | str) -> int:
    # Order-sensitive combination so derive("a", 1) != derive(1, "a").
    if isinstance(key, str):
        data = key.encode("utf-8")
        h = _mix((h + _GOLDEN) ^ len(data))
        for i in range(0, len(data), 8):
            chunk = int.from_bytes(data[i : i + 8], "little")
            h = _mix((h + _GOLDEN) ^ chunk)
        return h
    return _mix((h + _GOLDEN) ^ (key & _MASK64))


class Stream:
    """A splitmix64 stream with labelled sub-stream derivation."""

    __slots__ = ("seed", "_state")

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self._state = self.seed

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0**-53)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def expovariate(self, rate: float) -> float:
        """Exponential inter-arrival gap with the given rate per unit time."""
        # 1 - random() lies in (0, 1], so the log argument is never zero.
        return -math.log(1.0 - self.random()) / rate

    def gauss(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        # Box-Muller without spare caching; two draws per sample keeps the
        # stream position independent of call history.
        u1 = 1.0 - self.random()
        u2 = self.random()
        z = math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
        return mu + sigma * z

    def randrange(self, n: int) -> int:
        """Integer in [0, n). Modulo bias is negligible for n << 2**64."""
        if n <= 0:
            raise ValueError("randrange() requires n > 0")
        return self.next_u64() % n

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def shuffle(self, items: list) -> list:
        """In-place Fisher-Yates shuffle; returns the same list."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def sample(self, seq, k: int) -> list:
        pool = list(seq)
        self.shuffle(pool)
        return pool[:k]

    def bits(self, k: int) -> int:
        """k random bits as an integer (k up to 128 is plenty here)."""
        out = 0
        taken = 0
        while taken < k:
            out = (out << 64) | self.next_u64()
            taken += 64
        return out >> (taken - k)

    def derive(self, *keys: int | str) -> "Stream":
        """Child stream keyed by the parent seed and the given labels.

        Derivation ignores the parent's current position, so the same labels
        always yield the same child stream.
        """
        h = _mix(self.seed ^ 0x5851F42D4C957F2D)
        for key in keys:
            h = _absorb(h, key)
        return Stream(h)
