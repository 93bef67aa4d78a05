"""
chaoscast/systems/seeding.py

The seed-splitting rule: every random stream of a run is seeded with a
64-bit BLAKE2b hash of (master seed, role tag, integer indices).
"""
import hashlib
import struct

import numpy as np


def derive_seed(master: int, role: str, *indices: int) -> int:
    """
    Derives an independent 64-bit seed.

    Args:
        master: Master seed of the run
        role: Tag of the consumer, e.g. ``"instance"`` or ``"fit"``
        indices: Integer coordinates (system, scheme, split, repetition, ...)

    Returns:
        int: Seed in [0, 2**64)
    """
    digest = hashlib.blake2b(digest_size=8)
    digest.update(struct.pack("<Q", master % (1 << 64)))
    digest.update(role.encode("utf-8") + b"\0")
    for index in indices:
        digest.update(struct.pack("<q", index))
    return int.from_bytes(digest.digest(), "little")


def derive_rng(master: int, role: str, *indices: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, role, *indices))
