"""Buffered wrapper around one numpy Generator.

Per-step scalar draws from numpy carry call overhead that dominates the
simulator's hot loop, so draws are taken in blocks and handed out one at
a time. All stochastic components share one stream per episode, which
keeps runs bit-reproducible from a single seed.
"""

from __future__ import annotations

import numpy as np

_BLOCK = 4096


class RandomStream:
    def __init__(self, seed):
        if isinstance(seed, np.random.Generator):
            self.generator = seed
        else:
            self.generator = np.random.default_rng(seed)
        self._normals = np.empty(0)
        self._uniforms = np.empty(0)
        self._ni = 0
        self._ui = 0

    def normal(self) -> float:
        if self._ni >= self._normals.size:
            self._normals = self.generator.standard_normal(_BLOCK)
            self._ni = 0
        v = self._normals[self._ni]
        self._ni += 1
        return v

    def uniform(self) -> float:
        if self._ui >= self._uniforms.size:
            self._uniforms = self.generator.random(_BLOCK)
            self._ui = 0
        v = self._uniforms[self._ui]
        self._ui += 1
        return v

    def pick_index(self, n: int) -> int:
        """Uniform index in [0, n)."""
        return min(int(self.uniform() * n), n - 1)

    def categorical(self, cumulative) -> int:
        """Index drawn from a distribution given as a cumulative array."""
        return int(np.searchsorted(cumulative, self.uniform(), side="right"))


def spawn_streams(master_seed: int, *path: int) -> RandomStream:
    """Independent stream addressed by a path of integers."""
    return RandomStream(np.random.default_rng(
        np.random.SeedSequence((master_seed, *path))))
