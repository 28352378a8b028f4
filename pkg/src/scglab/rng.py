"""Counter-based random substreams.

A stream is identified by an integer path rooted at the experiment seed, so
trial i always draws from the substream (seed, i) no matter which worker runs
it or in what order. Child streams are cheap to derive and never overlap.
"""

from __future__ import annotations

import numpy as np

# Path tags for the per-purpose children of a trial stream. Keeping them in
# one table guards against two call sites colliding on the same substream.
TAG_LEGIT = 1
TAG_EDS = 2
TAG_ROLES = 3
TAG_TRIAL = 4
TAG_SLOTS = 5


class RandomStream:
    """An addressable source of numpy Generators.

    ``rng()`` always returns a generator seeded from this stream's path, so
    calling it twice replays the same sequence; derive a child per purpose.
    """

    __slots__ = ("path",)

    def __init__(self, *path: int):
        self.path = tuple(int(x) for x in path)

    @classmethod
    def from_seed(cls, seed: int) -> "RandomStream":
        return cls(seed)

    def child(self, *tags: int) -> "RandomStream":
        return RandomStream(*self.path, *tags)

    def trial(self, index: int) -> "RandomStream":
        return self.child(TAG_TRIAL, index)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(entropy=self.path))

    def __repr__(self) -> str:
        return f"RandomStream{self.path}"
