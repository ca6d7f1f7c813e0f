"""Platform-independent seeded generator.

xoshiro256** with its state expanded from a 64-bit seed by splitmix64.
Uniform doubles take the top 53 bits of one output, so every draw is
reproducible bit for bit on any platform and Python version.
"""
from __future__ import annotations

_MASK = (1 << 64) - 1
_TWO_NEG_53 = 2.0 ** -53


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


def splitmix64(state: int):
    """Advance a splitmix64 state; returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


class RandomSource:

    def __init__(self, seed: int = 0) -> None:
        self.seed = seed & _MASK
        x = self.seed
        state = []
        for _ in range(4):
            x, z = splitmix64(x)
            state.append(z)
        self._s = state
        self.draws = 0

    @classmethod
    def from_state(cls, state) -> "RandomSource":
        rng = cls.__new__(cls)
        rng.seed = None
        rng._s = [s & _MASK for s in state]
        rng.draws = 0
        return rng

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK, 7) * 9) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        self.draws += 1
        return result

    def uniform(self) -> float:
        """A double in [0, 1)."""
        return (self.next_u64() >> 11) * _TWO_NEG_53

    def uniform_pos(self) -> float:
        """A double in (0, 1]."""
        return 1.0 - self.uniform()

    def integers(self, low: int, high: int) -> int:
        """Uniform integer in [low, high]; one draw."""
        span = high - low + 1
        return low + int(self.uniform() * span)

    def spawn(self) -> "RandomSource":
        """Independent child generator seeded from this stream."""
        return RandomSource(self.next_u64())

    def getstate(self):
        return tuple(self._s), self.draws

    def setstate(self, state) -> None:
        self._s = list(state[0])
        self.draws = state[1]
