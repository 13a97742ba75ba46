"""Counter-based randomness built on the SplitMix64 finalizer.

Every random number is a pure function of ``(seed, stream, counters...)``:

    key   = mix64(seed ^ STREAM_KEYS[stream])
    value = mix64(key + GOLDEN * (c_1 + 1)), folded over each counter c_i

where ``mix64`` is the SplitMix64 output function (Steele, Lea, Flood 2014)
with multipliers ``0xBF58476D1CE4E5B9`` and ``0x94D049BB133111EB`` and shifts
30/27/31, and ``GOLDEN = 0x9E3779B97F4A7C15``. Uniforms take the top 53 bits.
Because nothing is sequential, pair ``(i, j)`` gets the same coin regardless of
how the work is split or ordered.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MUL1 = 0xBF58476D1CE4E5B9
MUL2 = 0x94D049BB133111EB

STREAM_KEYS = {
    "labels": 0x6C6162656C730001,
    "labels_right": 0x6C6162656C730002,
    "edges": 0x6564676573000003,
    "trial": 0x747269616C000004,
    "scan": 0x7363616E00000005,
}

_G = np.uint64(GOLDEN)
_M1 = np.uint64(MUL1)
_M2 = np.uint64(MUL2)


def mix64_int(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MUL1) & MASK64
    z = ((z ^ (z >> 27)) * MUL2) & MASK64
    return z ^ (z >> 31)


def mix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_key(seed: int, stream: str) -> int:
    return mix64_int((int(seed) & MASK64) ^ STREAM_KEYS[stream])


def _fold(key, counter):
    with np.errstate(over="ignore"):
        return mix64(np.asarray(key, dtype=np.uint64) + _G * (np.asarray(counter, dtype=np.uint64) + np.uint64(1)))


def random_u64(seed: int, stream: str, *counters) -> np.ndarray:
    h = np.uint64(stream_key(seed, stream))
    for c in counters:
        h = _fold(h, c)
    return np.asarray(h, dtype=np.uint64)


def uniform(seed: int, stream: str, *counters) -> np.ndarray:
    """Uniforms in [0, 1) indexed by integer counter arrays (broadcast together)."""
    bits = random_u64(seed, stream, *counters)
    return (bits >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def derive_seed(master_seed: int, n: int, trial: int) -> int:
    """Per-trial seed: a pure function of the master seed, sample size and trial index."""
    h = stream_key(master_seed, "trial")
    h = mix64_int(h + GOLDEN * (int(n) + 1))
    h = mix64_int(h + GOLDEN * (int(trial) + 1))
    return h
