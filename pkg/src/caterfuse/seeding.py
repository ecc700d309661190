"""Deterministic per-cell seed derivation.

Every simulation cell (a sweep grid point, a pipeline run) hashes its
coordinates into an independent 64-bit seed, so results do not depend
on execution order and re-runs are byte-identical.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(*parts: object) -> int:
    """Collapse a tuple of labels/numbers into a 64-bit seed."""
    canon = "|".join(repr(p) if isinstance(p, float) else str(p) for p in parts)
    digest = hashlib.sha256(canon.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def make_rng(*parts: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))
