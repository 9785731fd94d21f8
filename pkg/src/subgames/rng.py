"""Seeded random streams.

All randomness comes from numpy ``Generator`` objects seeded from a
``SeedSequence`` built on ``(master_seed, *path)``, so a trial's stream is a
pure function of its coordinates and independent of execution order.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int, *path: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *path])))


def random_bits(rng: np.random.Generator, width: int) -> int:
    """Uniform ``width``-bit integer (iid fair bits)."""
    if width <= 0:
        return 0
    nbytes = (width + 7) // 8
    return int.from_bytes(rng.bytes(nbytes), "little") & ((1 << width) - 1)


def bernoulli_bits(rng: np.random.Generator, width: int, p: float) -> int:
    """``width`` iid Bernoulli(p) bits packed into an int, bit i = draw i."""
    if p == 0.5:
        return random_bits(rng, width)
    if width <= 0:
        return 0
    draws = rng.random(width) < p
    packed = np.packbits(draws, bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def nth_set_bit(mask: int, r: int) -> int:
    """Index of the ``r``-th (0-based) set bit of ``mask``, lowest first."""
    offset = 0
    word = (1 << 64) - 1
    while True:
        low = mask & word
        c = low.bit_count()
        if r < c:
            break
        r -= c
        mask >>= 64
        offset += 64
        if not mask:
            raise ValueError("mask has too few set bits")
    for _ in range(r):
        low &= low - 1
    return offset + (low & -low).bit_length() - 1
