"""Counter-based random streams.

Every replica owns an independent stream keyed by ``(master_seed, replica)``.
Draw ``n`` of a stream is a pure function of ``(key, n)``, so a replica can be
regenerated or resumed without replaying any other replica.  The mixer is
SplitMix64; the pure-Python version here is the reference the numba kernels
are tested against.
"""
from __future__ import annotations

import numpy as np
from numba import njit, uint64

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_REPLICA_SALT = 0xD1B54A32D192ED03


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def stream_key(master_seed: int, replica: int) -> int:
    """Key of the stream for one replica."""
    return mix64(mix64(master_seed & MASK64) ^ mix64((replica * _REPLICA_SALT + GOLDEN) & MASK64))


def uniform(key: int, counter: int) -> float:
    """Draw ``counter`` of stream ``key`` as a float in (0, 1)."""
    bits = mix64(key + (counter + 1) * GOLDEN)
    return ((bits >> 11) + 0.5) * 2.0**-53


class CounterStream:
    """Sequential reader over one counter stream (Python reference)."""

    def __init__(self, master_seed: int, replica: int = 0, counter: int = 0):
        self.key = stream_key(master_seed, replica)
        self.counter = counter

    def random(self) -> float:
        u = uniform(self.key, self.counter)
        self.counter += 1
        return u

    def normal(self) -> float:
        u1, u2 = self.random(), self.random()
        return float(np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2))


# numba versions: all arithmetic stays in uint64 so products wrap mod 2**64.
_G = uint64(GOLDEN)
_C1 = uint64(_M1)
_C2 = uint64(_M2)


@njit(cache=True)
def nb_mix64(z):
    z = (z ^ (z >> uint64(30))) * _C1
    z = (z ^ (z >> uint64(27))) * _C2
    return z ^ (z >> uint64(31))


@njit(cache=True)
def nb_uniform(key, counter):
    bits = nb_mix64(key + (counter + uint64(1)) * _G)
    return (float(bits >> uint64(11)) + 0.5) * 1.1102230246251565e-16


@njit(cache=True)
def nb_normal(key, counter):
    """Box-Muller from draws ``counter`` and ``counter + 1``."""
    u1 = nb_uniform(key, counter)
    u2 = nb_uniform(key, counter + uint64(1))
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def numpy_generator(master_seed: int, replica: int = 0) -> np.random.Generator:
    """A numpy Generator seeded from the replica key, for vectorised sampling."""
    return np.random.Generator(np.random.PCG64(stream_key(master_seed, replica)))


@njit(cache=True)
def nb_normal_pair(key, counter):
    """Two independent normals from draws ``counter`` and ``counter + 1``."""
    u1 = nb_uniform(key, counter)
    u2 = nb_uniform(key, counter + uint64(1))
    r = np.sqrt(-2.0 * np.log(u1))
    return r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)
