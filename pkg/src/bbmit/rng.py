"""Seedable, splittable random streams.

Every stochastic routine takes a ``numpy.random.Generator``.  One integer seed
per invocation fans out into independent child streams via ``SeedSequence``.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.Generator(np.random.PCG64(ss))


def spawn(seed: int, n: int) -> list[np.random.Generator]:
    return [make_rng(child) for child in np.random.SeedSequence(seed).spawn(n)]
