"""
Seeded random streams.

Every (seed, trial, level, ...) key gets an independent counter-based
Philox stream derived through ``numpy.random.SeedSequence``; draws never
depend on the order in which keys are visited.
"""

import logging

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

logger = logging.getLogger(__name__)


def _check_keys(seed, keys):
    if int(seed) < 0 or any(int(k) < 0 for k in keys):
        raise ValueError(f"Seeds and stream keys must be non-negative, got {seed}, {keys}")


def make_rng(seed: int, *keys: int) -> Generator:
    """Generator for the stream identified by ``seed`` and ``keys``."""
    _check_keys(seed, keys)
    return Generator(Philox(SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))))


def derive_seed(master: int, *keys: int) -> int:
    """A 63-bit seed derived from ``master`` and ``keys``."""
    _check_keys(master, keys)
    state = SeedSequence(int(master), spawn_key=tuple(int(k) for k in keys)).generate_state(2, dtype=np.uint32)
    return ((int(state[0]) << 32) | int(state[1])) & ((1 << 63) - 1)


def uniform_below(bound: int, rng: Generator) -> int:
    """Exact uniform integer in ``[0, bound)`` for arbitrarily large ``bound``."""
    if bound < 1:
        raise ValueError(f"bound must be positive, got {bound}")
    if bound == 1:
        return 0
    if bound <= (1 << 62):
        return int(rng.integers(0, bound))
    bits = (bound - 1).bit_length()
    nbytes = (bits + 7) // 8
    excess = nbytes * 8 - bits
    while True:
        value = int.from_bytes(rng.bytes(nbytes), "big") >> excess
        if value < bound:
            return value
