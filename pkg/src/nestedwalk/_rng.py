import zlib

import numpy as np


def stream(seed, name):
    """Independent generator for subsystem ``name`` derived from ``seed``.

    Streams with different names never share state, so adding draws in one
    subsystem leaves the others untouched.
    """
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), key]))
