"""Seed fan-out so every random stream is addressed by a stable label path."""
import zlib

import numpy as np


def _label_key(label):
    if isinstance(label, (int, np.integer)):
        if label < 0:
            raise ValueError(f"negative seed label {label}")
        return int(label)
    return zlib.crc32(str(label).encode("utf-8"))


def seed_sequence(seed, *labels):
    """Return a SeedSequence for the stream named by ``labels`` under ``seed``.

    The same (seed, labels) always yields the same stream, independent of how
    many other streams were drawn before it.
    """
    return np.random.SeedSequence(int(seed), spawn_key=tuple(_label_key(x) for x in labels))


def rng_for(seed, *labels):
    return np.random.default_rng(seed_sequence(seed, *labels))


def as_rng(seed, *labels):
    """Pass a Generator through untouched; otherwise derive one from the seed."""
    if isinstance(seed, np.random.Generator):
        return seed
    return rng_for(seed, *labels)


def sub_seed(seed, *labels) -> int:
    """A plain non-negative integer seed for the labelled sub-stream."""
    return int(seed_sequence(seed, *labels).generate_state(1, np.uint64)[0]) >> 1
