"""Deterministic randomness plumbing.

All randomness in the package flows from numpy's PCG64 generator, which is
seedable, portable across platforms, and documented. A single top-level seed
is fanned out to the individual pipeline stages by hashing the seed together
with a short stage tag, so stages stay independent and reproducible.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(seed: int, tag: str) -> int:
    """Derive a stage seed from a master seed and a stage tag (blake2b-based)."""
    digest = hashlib.blake2b(f"{seed}:{tag}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def make_rng(seed: int, tag: str | None = None) -> np.random.Generator:
    """PCG64 generator for `seed`, optionally derived for a named stage."""
    if tag is not None:
        seed = derive_seed(seed, tag)
    return np.random.Generator(np.random.PCG64(seed))
