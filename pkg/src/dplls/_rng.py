"""Seed handling shared by all sampling code.

No function in this package ever touches a global random state; every
randomized operation takes an explicit seed, SeedSequence, or Generator.
"""

from __future__ import annotations

import numpy as np

SeedLike = "int | np.integer | np.random.SeedSequence | np.random.Generator"


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def seed_as_int(seed) -> int | None:
    """The plain integer behind a seed, or None when it has no such form."""
    if isinstance(seed, (int, np.integer)):
        return int(seed)
    return None
