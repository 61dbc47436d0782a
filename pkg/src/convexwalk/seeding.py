"""Deterministic derivation of independent RNG streams.

Every randomized routine in the package takes an explicit
``numpy.random.Generator``.  Experiments derive one stream per
(replica, purpose) pair from a single master seed so that runs are
reproducible and replicas never share a stream.
"""

import hashlib

import numpy as np


def _label_key(label):
    """Map a stream label (int or str) to a stable 64-bit integer."""
    if isinstance(label, (int, np.integer)):
        return int(label) & 0xFFFFFFFFFFFFFFFF
    digest = hashlib.blake2s(str(label).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def stream(seed, *labels):
    """Return a Generator for the stream identified by (seed, labels).

    Distinct label tuples yield statistically independent streams; the
    same tuple always yields the same stream.
    """
    keys = tuple(_label_key(lab) for lab in labels)
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=keys))
