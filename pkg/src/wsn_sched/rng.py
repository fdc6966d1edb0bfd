"""Portable seeded random numbers.

All randomness in the simulator comes from SplitMix64 (Steele, Lea & Flood,
2014), so a given seed reproduces bit-for-bit on any platform and in any
language that implements the same three constants::

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

(all arithmetic modulo 2**64).
"""
from __future__ import annotations

import hashlib

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Deterministic 64-bit generator with a tiny state."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN_GAMMA) & MASK64
        return mix64(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased (rejection on the top range)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def uniform(self, a: float, b: float) -> float:
        return a + (b - a) * self.random()


def derive_seed(master: int, *labels: object) -> int:
    """Split a master seed into an independent child seed.

    The child depends only on ``master`` and the labels, never on how many
    other children were derived, so adding sweep tuples leaves existing
    rows untouched.  Labels are joined with ``/`` and hashed with BLAKE2b.
    """
    text = "/".join([str(int(master))] + [str(lab) for lab in labels])
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return mix64(int.from_bytes(digest, "little"))
