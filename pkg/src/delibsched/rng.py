"""Counter-based SplitMix64 streams and inverse-CDF sampling of rational pmfs.

Run ``j`` of a simulation seeded with ``seed`` uses the SplitMix64 stream
whose state starts at ``splitmix64(seed, 0) ^ j``; its ``n``-th output
(n = 0, 1, ...) is ``mix(state + (n + 1) * GOLDEN mod 2**64)``. The seed is
scrambled before the XOR because ``{s ^ j}`` over a block of run indices is
the same set for neighbouring seeds. A uniform draw ``U`` in
``[0, 2**64)`` stands for the rational ``U / 2**64``, and a pmf with
cumulative probabilities ``F_0 < F_1 < ... = 1`` returns the first index
with ``U / 2**64 < F_j``.

The scalar and numpy versions below produce identical draws.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .model import DiscreteDistribution

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


def splitmix64(stream_seed: int, n: int) -> int:
    z = (stream_seed + (n + 1) * GOLDEN) & MASK
    z = ((z ^ (z >> 30)) * MIX1) & MASK
    z = ((z ^ (z >> 27)) * MIX2) & MASK
    return z ^ (z >> 31)


def splitmix64_array(stream_seeds: np.ndarray, n: int) -> np.ndarray:
    z = stream_seeds + np.uint64(((n + 1) * GOLDEN) & MASK)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def stream_seed(seed: int, run_index: int) -> int:
    return splitmix64(seed & MASK, 0) ^ run_index


def run_seeds(seed: int, n_runs: int) -> np.ndarray:
    return np.uint64(splitmix64(seed & MASK, 0)) ^ np.arange(n_runs, dtype=np.uint64)


class Sampler:
    """Inverse-CDF lookup for one distribution at 64-bit resolution."""

    def __init__(self, dist: DiscreteDistribution):
        self.values = dist.values
        thresholds = []
        cum = Fraction(0)
        for p in dist.probs[:-1]:
            cum += p
            t = math.ceil(cum * (1 << 64))
            if t > MASK:
                break
            thresholds.append(t)
        self.thresholds = thresholds
        self._values_arr = np.array(self.values, dtype=np.int64)
        self._thresholds_arr = np.array(thresholds, dtype=np.uint64)

    def index(self, u: int) -> int:
        for j, t in enumerate(self.thresholds):
            if u < t:
                return j
        return len(self.thresholds)

    def sample(self, u: int) -> int:
        return self.values[self.index(u)]

    def sample_array(self, u: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self._thresholds_arr, u, side="right")
        return self._values_arr[idx]
