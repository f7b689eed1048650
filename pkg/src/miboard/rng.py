"""Deterministic game randomness.

Every random draw in a game (deck shuffles, strategy assignment, dice)
comes from one `GameRng` seeded per game. The generator is splitmix64,
chosen because its whole state is a single unsigned 64-bit integer that
serializes as a plain JSON number, and the algorithm is short enough to
re-specify exactly, so replays stay portable across implementations.

Algorithm (all arithmetic mod 2**64):

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    output = z ^ (z >> 31)

Derived draws are fixed too, so any implementation of the three rules
below reproduces identical games from the same seed and event order:

- randbelow(n): rejection sampling. Draw 64-bit words until one falls
  below 2**64 - (2**64 % n); return word % n.
- shuffle(xs): Fisher-Yates from the top, i from len-1 down to 1,
  swapping xs[i] with xs[randbelow(i + 1)].
- dice: first die then second, each 1 + randbelow(faces).
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class GameRng:
    """splitmix64 stream with a serializable single-integer state."""

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError(f"randbelow needs n >= 1, got {n}")
        threshold = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < threshold:
                return r % n

    def shuffle(self, xs: list) -> None:
        """In-place Fisher-Yates shuffle, descending index order."""
        for i in range(len(xs) - 1, 0, -1):
            j = self.randbelow(i + 1)
            xs[i], xs[j] = xs[j], xs[i]

    def getstate(self) -> int:
        return self.state

    def setstate(self, state: int) -> None:
        self.state = state & _MASK64
