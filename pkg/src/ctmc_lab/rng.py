"""Counter-based uniforms: ``u = splitmix64(key + counter * golden)``.

Each trajectory owns a key derived from ``(master_seed, index)``; draw ``j``
of that trajectory is a pure function of ``(key, j)``, so results do not
depend on batch layout or worker count.
"""

from __future__ import annotations

import numpy as np

GENERATOR_NAME = "splitmix64-counter"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SALT = np.uint64(0xD1B54A32D192ED03)


def mix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_keys(master_seed: int, indices) -> np.ndarray:
    """Per-trajectory keys ``hash(master_seed, i)``."""
    seed = np.uint64(int(master_seed) % 2**64)
    idx = np.asarray(indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        base = mix64(np.array([seed ^ _SALT], dtype=np.uint64))[0]
        return mix64(base + (idx + np.uint64(1)) * _GOLDEN)


def uniforms(keys: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Open-interval uniforms on ``(0, 1)`` from 53 mixed bits."""
    keys = np.asarray(keys, dtype=np.uint64)
    ctr = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = mix64(keys + ctr * _GOLDEN)
    return ((x >> np.uint64(11)).astype(np.float64) + 0.5) * (2.0**-53)
