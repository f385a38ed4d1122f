"""
Reproducible random streams.

Every Monte-Carlo replica draws from its own generator, derived from one
root seed by a counter-based split::

    SeedSequence(seed, spawn_key=(crc32(stream), index))

``stream`` names the experiment family (``'tasep-step'``, ``'dbm-gue'``, ...)
and ``index`` is the replica number. Replica ``i`` therefore produces the same
numbers whether it runs first, last, alone or in a worker process.
"""
import zlib

import numpy as np


def stream_key(stream):
    return zlib.crc32(stream.encode('utf-8'))


def replica_generator(seed, stream, index):
    sequence = np.random.SeedSequence(int(seed), spawn_key=(stream_key(stream), int(index)))
    return np.random.Generator(np.random.PCG64(sequence))
