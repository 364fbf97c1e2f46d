"""Portable seeded randomness.

All experiment-visible randomness flows through a splitmix-style 64-bit
generator so that a (scenario, seed) pair produces bit-identical results
on any platform. Doubles are built from the top 53 bits of each output
word, so no libm or platform RNG enters the pipeline.

Independent streams are derived by hashing (master seed, stream index);
see ``derive_seed``. Random-access draws (one value per time step, no
sequential state) use ``indexed_choice``.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """Finalization mix of splitmix64; a 64-bit bijection."""
    z &= _MASK
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK
    z ^= z >> 31
    return z


def derive_seed(master: int, stream: int) -> int:
    """Seed for an independent substream of ``master``.

    Stream indices are fixed per use site (0: initial opinions,
    1: schedule draws, 2: generated matrices) and documented in the README.
    """
    return mix64((master & _MASK) ^ mix64(((stream & _MASK) + 1) * _GAMMA))


def indexed_choice(seed: int, step: int, n: int) -> int:
    """Stateless draw from range(n) for a given (seed, step) pair."""
    if n <= 0:
        raise ValueError("choice over an empty range")
    return mix64((seed & _MASK) ^ mix64(((step & _MASK) + 1) * _GAMMA)) % n


class SplitMix64:
    """Sequential splitmix64 stream."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_uint64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return mix64(self._state)

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_uint64() >> 11) * 2.0**-53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randrange(self, n: int) -> int:
        """Unbiased integer in range(n) via rejection."""
        if n <= 0:
            raise ValueError("randrange over an empty range")
        span = _MASK + 1
        limit = span - span % n
        while True:
            v = self.next_uint64()
            if v < limit:
                return v % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]
