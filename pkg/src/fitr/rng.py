"""Deterministic random-stream derivation.

All randomness in the package flows through PCG64 generators derived from a
64-bit user seed plus a tuple of tags (integers or strings).  Streams with
different tags are statistically independent, and a given (seed, tags) pair
yields the same stream on every platform, which is what makes parallel
replication runs reproducible regardless of scheduling.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _tag_to_int(tag: int | str) -> int:
    if isinstance(tag, (int, np.integer)):
        return int(tag)
    digest = hashlib.sha256(str(tag).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def substream(seed: int, *tags: int | str) -> np.random.Generator:
    """Generator for the stream identified by (seed, *tags)."""
    entropy = [int(seed)] + [_tag_to_int(t) for t in tags]
    return np.random.default_rng(np.random.SeedSequence(entropy))
