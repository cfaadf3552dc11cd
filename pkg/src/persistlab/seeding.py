"""Reproducible random streams.

A single 64-bit master seed plus a stream index define every random draw in
the package.  The derivation is ``SeedSequence(entropy=master,
spawn_key=(stream,))`` feeding a PCG64 generator; both are pure functions of
their inputs with platform-independent output, so identical
``(master, stream)`` pairs yield identical byte streams everywhere.
Parallel code partitions work by stream index and reduces results in fixed
stream order, which keeps outputs independent of the worker count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

_MASTER_MAX = 2**64


@dataclass(frozen=True)
class SeedSpec:
    """Master seed for a family of independent, reproducible streams."""

    master: int

    def __post_init__(self):
        if not (0 <= int(self.master) < _MASTER_MAX):
            raise ValidationError(
                "BAD_SEED", f"master seed must be a 64-bit unsigned integer, got {self.master}"
            )

    def sequence(self, stream: int) -> np.random.SeedSequence:
        """Seed material for stream ``stream``; pure in (master, stream)."""
        return np.random.SeedSequence(entropy=self.master, spawn_key=(stream,))

    def generator(self, stream: int = 0) -> np.random.Generator:
        """A PCG64 generator dedicated to stream ``stream``."""
        return np.random.Generator(np.random.PCG64(self.sequence(stream)))


def as_seedspec(seed) -> SeedSpec:
    """Coerce an int or SeedSpec into a SeedSpec."""
    if isinstance(seed, SeedSpec):
        return seed
    return SeedSpec(int(seed))
