"""Deterministic seed derivation.

Every random stream in the package comes from ``derive_rng(base_seed, *tags)``,
so results depend only on the base seed and the stream's role, never on how
work is split across processes.
"""

from __future__ import annotations

import zlib

import numpy as np


def _word(tag) -> int:
    if isinstance(tag, (int, np.integer)):
        if tag < 0:
            raise ValueError("seed components must be non-negative")
        return int(tag)
    return zlib.crc32(str(tag).encode("utf-8"))


def seed_sequence(seed: int, *tags) -> np.random.SeedSequence:
    return np.random.SeedSequence([_word(seed), *(_word(t) for t in tags)])


def derive_rng(seed: int, *tags) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(seed, *tags))


def derive_seed(seed: int, *tags) -> int:
    """A 63-bit integer seed for a sub-stream."""
    return int(seed_sequence(seed, *tags).generate_state(2, np.uint32).view(np.uint64)[0] >> 1)
