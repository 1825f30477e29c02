# -*- coding: utf-8 -*-
"""
Seed fan-out and counter-based random streams.

Every stochastic component draws from its own numpy Philox stream whose key is
derived from the master seed and a tuple of labels, e.g.
``derive_seed(master, "plant", "star", 3, "pitch")``. Labels are folded in one
at a time with the splitmix64 finalizer; strings are first hashed with
BLAKE2b so the derivation does not depend on Python's hash randomization.
"""
import hashlib
from typing import Union

import numpy as np

_MASK64 = (1 << 64) - 1

SeedKey = Union[int, str]


def splitmix64(state: int) -> int:
    """One round of the splitmix64 output function on a 64-bit state."""
    z = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _key_to_int(key: SeedKey) -> int:
    if isinstance(key, bool):
        return int(key)
    if isinstance(key, int):
        return key & _MASK64
    digest = hashlib.blake2b(str(key).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_seed(master_seed: int, *keys: SeedKey) -> int:
    """Derives a 64-bit child seed from a master seed and an ordered tuple of labels."""
    state = splitmix64(master_seed & _MASK64)
    for key in keys:
        state = splitmix64(state ^ _key_to_int(key))
    return state


def make_generator(seed: int) -> np.random.Generator:
    """Returns a numpy Generator backed by a Philox counter-based bit generator."""
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))


def stream(master_seed: int, *keys: SeedKey) -> np.random.Generator:
    """Shorthand for make_generator(derive_seed(master_seed, *keys))."""
    return make_generator(derive_seed(master_seed, *keys))


def sklearn_seed(seed: int) -> int:
    """Folds a 64-bit seed into the 32-bit range scikit-learn's random_state accepts."""
    seed &= _MASK64
    return (seed ^ (seed >> 32)) & 0xFFFFFFFF
