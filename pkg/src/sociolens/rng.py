"""SplitMix64 generator and the seeded shuffle used for dataset splitting.

The train/test split must be reproducible across implementations and
languages, so it is pinned to an explicitly documented algorithm rather
than to numpy's generator:

* SplitMix64, the standard 64-bit finalizer-based generator, seeded
  directly with the user-supplied integer.
* Fisher-Yates: for i = n-1 .. 1, swap items i and j where
  j = next_u64() mod (i + 1). Modulo bias is negligible for n << 2^64.

Everything else in the package draws from seeded numpy generators.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Deterministic 64-bit generator; one u64 per call."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def next_below(self, bound: int) -> int:
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % bound


def seeded_shuffle(items: list, seed: int) -> list:
    """Return a new list holding `items` in Fisher-Yates order under SplitMix64(seed)."""
    out = list(items)
    gen = SplitMix64(seed)
    for i in range(len(out) - 1, 0, -1):
        j = gen.next_below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out
