"""Portable deterministic random number generator for the scenario simulator.

The simulator promises byte-identical command streams for a given seed,
including across reimplementations in other languages. ``random.Random``
(Mersenne Twister plus CPython-specific float plumbing) is a poor contract
for that, so this module pins SplitMix64: a tiny, widely documented 64-bit
generator. The first five outputs for seed 0 are the reference vector

    e220a8397b1dcdaf 6e789e6aa1b965f4 06c45d188009454f
    f88bb8a8724c81ec 1b39896a51a8749b

which the test suite asserts verbatim.

Floats are derived from the top 53 bits (``u64 >> 11`` times 2**-53), the
conventional mapping onto [0, 1).
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """SplitMix64 generator seeded with an arbitrary 64-bit integer."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * 2.0**-53

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection sampling (no modulo bias)."""
        if n <= 0:
            raise ValueError("randrange bound must be positive")
        # Largest multiple of n that fits in 64 bits; draws past it retry.
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def expovariate(self, rate: float) -> float:
        """Exponential inter-arrival gap with the given rate (events per unit)."""
        if rate <= 0:
            raise ValueError("rate must be positive")
        # 1 - random() is in (0, 1], so log() never sees zero.
        return -math.log(1.0 - self.random()) / rate
