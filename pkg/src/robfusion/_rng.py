"""Counter-based random streams.

Every stream is a Philox generator keyed by ``(seed, *key)`` through
:class:`numpy.random.SeedSequence`, so the draws for a given chunk of rows or
replicates depend only on the seed and the chunk's coordinates, never on the
order in which chunks are processed.
"""

import numpy as np


def stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
