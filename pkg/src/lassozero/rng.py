"""Reproducible random streams.

Streams are addressed hierarchically: a root ``SeededRng(seed)`` hands out
children via ``child(i, j, ...)`` and every distinct path yields a stream
that is independent of all others and reproducible across runs, platforms
and execution order. Built on Philox (counter-based) keyed through
``numpy.random.SeedSequence`` spawn keys, so parallel Monte Carlo draws do
not depend on scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SeededRng:
    """A (seed, stream-path) address into a family of independent streams."""

    seed: int
    stream: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if any(i < 0 for i in self.stream):
            raise ValueError("stream ids must be nonnegative")

    def child(self, *ids: int) -> "SeededRng":
        """Derive the substream addressed by appending ``ids`` to the path."""
        return SeededRng(self.seed, self.stream + tuple(int(i) for i in ids))

    def generator(self) -> np.random.Generator:
        """Fresh generator for this stream; repeated calls restart the stream."""
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.Philox(ss))


def gaussian_matrix(rng: SeededRng, n: int, q: int) -> np.ndarray:
    """n-by-q matrix of independent standard normal draws from ``rng``."""
    if n < 1 or q < 1:
        raise ValueError("matrix dimensions must be positive")
    return rng.generator().standard_normal((n, q))


def gaussian_vector(rng: SeededRng, n: int) -> np.ndarray:
    return rng.generator().standard_normal(n)
