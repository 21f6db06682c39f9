"""Portable seeded random streams.

All stochastic components draw from numpy's PCG64 so that a 64-bit seed fully
determines every shuffle, sample, and generated graph across platforms.
Derived streams (one per search restart, per evaluation sample, ...) use the
rule stream(seed, index) = PCG64(seed XOR index); indices passed by callers
are kept small and distinct per purpose so streams never collide.
"""

import numpy as np


def make_rng(seed):
    """Root generator for a 64-bit integer seed."""
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))


def derived_rng(seed, index):
    """Derived stream: seed XOR index, the documented split rule."""
    mixed = (int(seed) ^ int(index)) & 0xFFFFFFFFFFFFFFFF
    return np.random.Generator(np.random.PCG64(mixed))
