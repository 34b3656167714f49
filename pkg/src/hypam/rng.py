"""Deterministic seed derivation for parallel sampling streams.

The splitting rule is fixed: stream k of master seed m is seeded by
``SeedSequence(entropy=m, spawn_key=(k,))``.  Results therefore depend only on
(master seed, stream index), never on how streams are scheduled over workers.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream_seed", "stream_generator"]


def stream_seed(master: int, stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(master), spawn_key=(int(stream),))


def stream_generator(master: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(stream_seed(master, stream))
