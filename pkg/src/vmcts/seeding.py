"""Deterministic seed derivation for trials, games and moves.

Child seeds come from ``numpy.random.SeedSequence`` keyed by the base seed
and an index path, so any shard of work can be reproduced independently.
"""

from __future__ import annotations

import numpy as np


def derive_seed(base_seed: int, *path: int) -> int:
    """64-bit seed for the work item at ``path`` under ``base_seed``."""
    ss = np.random.SeedSequence([int(base_seed) & 0xFFFFFFFFFFFFFFFF, *map(int, path)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
