"""Counter-based splittable random streams.

Every random draw in the package is tied to a :class:`Stream` descriptor
``(master_seed, purpose, input_index, replicate_index, block_index)``.  The
descriptor is hashed into a Philox key, so any stream can be regenerated in
isolation: results never depend on draw order, thread count, or on which
other streams were consumed first.

Growing a design reuses streams: enlarging N extends each per-coordinate
stream (numpy generators fill arrays sequentially, so the first n variates
of a longer request are a prefix), and enlarging p only adds streams with
fresh ``replicate_index`` values.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class Stream:
    """Descriptor for one reproducible random stream."""

    master_seed: int
    purpose: str = ""
    input_index: int = 0
    replicate_index: int = 0
    block_index: int = 0

    def child(self, **overrides) -> "Stream":
        """Derive a related stream, overriding any descriptor fields."""
        return replace(self, **overrides)

    def sub(self, tag: str) -> "Stream":
        """Derive a sub-stream by extending the purpose tag."""
        return replace(self, purpose=f"{self.purpose}/{tag}")

    def key(self) -> int:
        """128-bit Philox key derived from the descriptor via SHA-256."""
        text = "|".join(
            str(x)
            for x in (
                self.master_seed,
                self.purpose,
                self.input_index,
                self.replicate_index,
                self.block_index,
            )
        )
        digest = hashlib.sha256(text.encode()).digest()
        return int.from_bytes(digest[:16], "little")

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        return np.random.Generator(np.random.Philox(key=self.key()))

    def label(self) -> str:
        """Compact human-readable form used in report metadata."""
        return (
            f"{self.master_seed}:{self.purpose}"
            f":{self.input_index}:{self.replicate_index}:{self.block_index}"
        )
