"""Deterministic, collision-resistant random stream derivation.

Every replication / sampling site in the library gets its own
``numpy.random.Generator`` derived from a master seed plus a tuple of
string/int labels. Identical (seed, labels) always yield the identical
stream; distinct labels yield streams that are independent for all
practical purposes (the label tuple is hashed into the SeedSequence
spawn key).
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["seed_stream", "spawn_child"]


def _label_words(labels: tuple) -> list[int]:
    digest = hashlib.sha256(repr(labels).encode("utf-8")).digest()
    return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]


def seed_stream(master_seed: int, *labels) -> np.random.Generator:
    """Derive a reproducible generator from a master seed and labels.

    Labels may be strings, ints or nested tuples; their repr() is hashed,
    so any hashable-and-reprable structure works.
    """
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(_label_words(labels)))
    return np.random.Generator(np.random.PCG64(ss))


def spawn_child(rng: np.random.Generator) -> np.random.Generator:
    """Fork an independent child generator off an existing stream."""
    seed = rng.integers(0, 2**63 - 1)
    return np.random.Generator(np.random.PCG64(int(seed)))
