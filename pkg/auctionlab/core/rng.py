"""
Counter-based random stream derivation.

Streams are keyed by (master seed, replication index, tag) through
``numpy.random.SeedSequence`` spawn keys, so a stream never depends on how
many other streams were drawn before it or on which worker draws it.
"""

import zlib
from typing import Union

import numpy as np

Key = Union[int, float, str]


def _key_to_int(key: Key) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    if isinstance(key, (float, np.floating)):
        return zlib.crc32(repr(float(key)).encode("utf-8"))
    if key < 0:
        raise ValueError(f"Stream keys must be non-negative, got {key}")
    return int(key)


def seed_sequence(master: int, *keys: Key) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(master), spawn_key=tuple(_key_to_int(k) for k in keys))


def stream(master: int, *keys: Key) -> np.random.Generator:
    """
    Return the generator for the stream identified by ``(master, *keys)``.

    Args:
        master: Master seed of the run.
        *keys: Replication indices, shard indices or string tags.

    Returns:
        A fresh ``numpy.random.Generator`` (PCG64).
    """
    return np.random.Generator(np.random.PCG64(seed_sequence(master, *keys)))


def derive_seed(master: int, *keys: Key) -> int:
    """Derive a 63-bit integer seed for a sub-run."""
    state = seed_sequence(master, *keys).generate_state(1, dtype=np.uint64)[0]
    return int(state >> np.uint64(1))


def as_generator(seed: Union[int, np.random.Generator, None]) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(0 if seed is None else int(seed))
