"""Deterministic random-stream derivation.

A single master seed fans out into independent, order-insensitive streams
keyed by an integer path (domain constant, round number, ...). Deriving the
same path twice yields bit-identical generators, which is what makes whole
sessions replayable from one integer.
"""
from __future__ import annotations

import numpy as np


def derive_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Return a Generator keyed by (master_seed, *path).

    Streams for distinct paths are statistically independent; the same path
    always reproduces the same stream.
    """
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *[int(p) for p in path]]))


def derive_seed(master_seed: int, *path: int) -> int:
    """Collapse (master_seed, *path) into a single 64-bit child seed."""
    ss = np.random.SeedSequence([int(master_seed), *[int(p) for p in path]])
    return int(ss.generate_state(2, dtype=np.uint32).view(np.uint64)[0])
