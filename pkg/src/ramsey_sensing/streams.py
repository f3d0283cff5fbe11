"""Counter-based random streams derived from a master seed.

Every stochastic routine takes an explicit stream. Streams are keyed by a
(master_seed, *path) tuple, so any scan point or repetition can be simulated
independently of execution order and worker count.
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_stream"]


def derive_stream(master_seed: int, *path: int) -> np.random.Generator:
    """Return the generator for a (master_seed, *path) key.

    Same key, same stream, always; distinct keys give statistically
    independent Philox streams. Path components must be non-negative ints.
    """
    if master_seed < 0 or master_seed > 0xFFFFFFFFFFFFFFFF:
        raise ValueError("master_seed must fit in an unsigned 64-bit integer")
    if any((not isinstance(p, (int, np.integer))) or p < 0 for p in path):
        raise ValueError("stream path components must be non-negative integers")
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(seq))
