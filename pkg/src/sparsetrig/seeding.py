"""Deterministic per-purpose random streams.

Every random draw in the package goes through :func:`rng_for`, which maps
``(seed, tag, index)`` to an independent Philox stream.  Two calls with the
same triple always produce the same numbers, regardless of process or
scheduling order.
"""

import hashlib

import numpy as np


def _tag_key(tag):
    digest = hashlib.sha256(str(tag).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_seed(seed, tag, index=0):
    """Collapse ``(seed, tag, index)`` into a single 63-bit integer seed."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), _tag_key(tag), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def rng_for(seed, tag="", index=0):
    """Return a counter-based generator for the given purpose."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), _tag_key(tag), int(index)])
    return np.random.Generator(np.random.Philox(ss))
