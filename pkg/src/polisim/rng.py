"""Named deterministic RNG substreams, one per module.

Each stream is derived from the master seed by name, so adding draws in one
module never perturbs the draw sequence of another.
"""

from __future__ import annotations

import hashlib

import numpy as np

STREAM_NAMES = ("synthpop", "demographics", "labor", "goods", "housing", "firms", "policy")


def _child_seed(master_seed: int, name: str) -> int:
    digest = hashlib.sha256(f"polisim:{master_seed}:{name}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


class RngStreams:
    """Independent numpy Generators keyed by module name."""

    __slots__ = STREAM_NAMES + ("master_seed",)

    def __init__(self, master_seed: int):
        self.master_seed = int(master_seed)
        for name in STREAM_NAMES:
            stream = np.random.default_rng(np.random.SeedSequence(_child_seed(self.master_seed, name)))
            setattr(self, name, stream)


def derive_run_seed(master_seed: int, run_index: int, salt: str = "") -> int:
    """Stable, collision-resistant per-run seed for batch and sweep dispatch."""
    digest = hashlib.sha256(f"polisim-run:{master_seed}:{run_index}:{salt}".encode()).digest()
    return int.from_bytes(digest[:8], "big")
