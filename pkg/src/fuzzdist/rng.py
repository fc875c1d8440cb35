"""SplitMix64: the pseudo-random generator used by the simulator.

The algorithm is fully specified here so independent implementations can
reproduce campaign traces bit-for-bit. State is a single 64-bit integer.
Each draw advances the state by the constant 0x9E3779B97F4A7C15 (the golden
ratio scaled to 64 bits) and mixes it:

    state = (state + 0x9E3779B97F4A7C15) mod 2**64
    z = state
    z = ((z XOR (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z = ((z XOR (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    output = z XOR (z >> 31)

``random()`` maps the top 53 bits onto [0, 1), exactly representable as a
double. ``randrange(n)`` reduces a draw modulo n (the bias at 64 bits is
negligible for the queue sizes involved and keeps the mapping trivially
portable). ``split()`` seeds an independent child generator from one draw.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def randrange(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randrange() needs a positive bound")
        return self.next_u64() % n

    def split(self) -> "SplitMix64":
        return SplitMix64(self.next_u64())
