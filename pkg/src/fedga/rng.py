"""Named random substreams derived from one master seed.

All randomness uses numpy's PCG64 bit generator. A stream is identified by
the master seed plus a path of labels, e.g. ``stream(42, "ga", 17)`` for the
GA operators of generation 17. Labels are hashed with CRC32 so the mapping
is stable across processes and platforms.
"""

from __future__ import annotations

import zlib

import numpy as np

DEFAULT_SEED = 42


def _key(label) -> int:
    if isinstance(label, (int, np.integer)):
        if label < 0:
            raise ValueError("stream labels must be non-negative")
        return int(label)
    return zlib.crc32(str(label).encode("utf-8"))


def stream(seed: int, *labels) -> np.random.Generator:
    """Independent generator for ``(seed, *labels)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key(x) for x in labels))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *labels) -> int:
    """A child master seed for ``(seed, *labels)``, e.g. one per online run."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key(x) for x in labels))
    return int(ss.generate_state(1, np.uint64)[0])
