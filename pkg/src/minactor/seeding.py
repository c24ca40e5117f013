"""Deterministic seed derivation for independent RNG streams."""

from __future__ import annotations

import zlib

import numpy as np


def _as_int(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part) & 0xFFFFFFFF


def derive_seed(*parts) -> int:
    """Stable seed from a mixed tuple of ints and tags; order-sensitive."""
    entropy = [_as_int(p) for p in parts]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def derive_rng(*parts) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))
