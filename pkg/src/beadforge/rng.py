"""Deterministic random streams.

A stream is identified by ``(master_seed, stream_index)``. Equal pairs give
identical draw sequences; distinct indices give statistically independent
streams (PCG64 seeded through ``SeedSequence([master_seed, stream_index])``,
which hashes the pair into the generator state). Streams are cheap to create,
so parallel work assigns one stream per task and never shares a stream
between concurrent consumers.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError

_U64 = (1 << 64) - 1


class RngStream:
    """A seedable random stream backed by a numpy ``Generator``.

    The underlying generator is created once per instance; successive draws
    through the same instance continue the same sequence.
    """

    __slots__ = ("master_seed", "stream_index", "_gen")

    def __init__(self, master_seed: int, stream_index: int = 0):
        if not isinstance(master_seed, (int, np.integer)):
            raise ParameterError("master_seed must be an integer")
        if not isinstance(stream_index, (int, np.integer)) or stream_index < 0:
            raise ParameterError("stream_index must be a non-negative integer")
        self.master_seed = int(master_seed) & _U64
        self.stream_index = int(stream_index)
        self._gen = None

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            seq = np.random.SeedSequence([self.master_seed, self.stream_index])
            self._gen = np.random.Generator(np.random.PCG64(seq))
        return self._gen

    def stream(self, index: int) -> "RngStream":
        """A sibling stream with the same master seed and a new index."""
        return RngStream(self.master_seed, index)

    def __repr__(self) -> str:
        return f"RngStream(master_seed={self.master_seed}, stream_index={self.stream_index})"
