"""Seeding and counter-based hashing shared by every stochastic routine.

Point clouds are drawn from numpy's PCG64 generator fed by a ``SeedSequence``
built from ``(seed, *stream_key)``, so distinct trials and purposes never share
a stream. Per-face thinning draws use a SplitMix64 hash of
``(seed, dimension, vertex ids)`` instead of a sequential stream; the draw a
face receives therefore does not depend on enumeration order.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# stream tags, kept stable so stored seeds stay meaningful
STREAM_POINTS = 0
STREAM_THIN = 1
STREAM_MU = 2
STREAM_COUNT = 3

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def generator(seed: int, *stream_key: int) -> np.random.Generator:
    """PCG64 generator for ``seed`` and an optional substream key."""
    ss = np.random.SeedSequence([check_seed(seed), *[int(k) for k in stream_key]])
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *stream_key: int) -> int:
    """A 64-bit child seed, deterministic in ``(seed, *stream_key)``."""
    ss = np.random.SeedSequence([check_seed(seed), *[int(k) for k in stream_key]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def splitmix64(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def face_uniforms(seed: int, dim: int, faces: np.ndarray) -> np.ndarray:
    """One uniform in [0, 1) per row of ``faces``, keyed by the row contents."""
    faces = np.asarray(faces, dtype=np.int64)
    m = faces.shape[0]
    key = splitmix64(np.array([check_seed(seed)], dtype=np.uint64))
    key = splitmix64(key ^ np.uint64(dim))
    h = np.full(m, key[0], dtype=np.uint64)
    for j in range(faces.shape[1] if faces.ndim == 2 else 0):
        h = splitmix64(h ^ faces[:, j].astype(np.uint64))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
