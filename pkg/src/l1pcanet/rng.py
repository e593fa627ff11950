"""Deterministic, platform-independent random stream derivation.

All randomness in the toolkit flows through `derive_seed` / `derive_rng`:
a master seed plus a tuple of purpose tags (strings or integers) is hashed
with BLAKE2b into a 64-bit seed for numpy's PCG64. Identical
(seed, tags) always give identical streams, on every platform, so splits
and corruptions are reproducible bit-for-bit.
"""

import hashlib

import numpy as np


def derive_seed(master_seed, *tags):
    """Hash (master_seed, *tags) into a 64-bit integer seed."""
    h = hashlib.blake2b(digest_size=8)
    h.update(repr(int(master_seed)).encode())
    for tag in tags:
        h.update(b"\x1f")
        h.update(repr(tag).encode())
    return int.from_bytes(h.digest(), "little")


def derive_rng(master_seed, *tags):
    """A numpy Generator on the stream named by (master_seed, *tags)."""
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, *tags)))
