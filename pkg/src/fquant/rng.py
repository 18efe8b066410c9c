"""Seed-stream derivation.

All randomness in the package flows from one top-level integer seed.  A
consumer asks for a named stream via ``derive_rng(seed, tag)``; the (seed,
tag) pair maps deterministically to an independent generator, so adding or
reordering consumers never perturbs each other's draws.
"""

import zlib

import numpy as np


def stream_key(seed: int, tag: str) -> list[int]:
    """Entropy words for the (seed, purpose-tag) stream: [seed, crc32(tag)]."""
    return [int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(tag.encode("utf-8"))]


def derive_rng(seed: int, tag: str) -> np.random.Generator:
    """Deterministic generator for the given top-level seed and purpose tag."""
    return np.random.default_rng(np.random.SeedSequence(stream_key(seed, tag)))
