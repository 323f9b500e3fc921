"""Infinite words materialized on demand.

A batch of n words is stored as a (depth, n) integer matrix that grows by
whole rows: asking for more depth appends rows and never rewrites earlier
ones, so every symbol a caller has seen stays fixed.  Single words are
lightweight column views into the batch.
"""

from __future__ import annotations

import numpy as np

# Hard cap on materialized depth.  Two random words from any of the sources
# here coincide this long with probability far below 2^-1000, so hitting the
# cap means a bug (or identical words), not bad luck.
MAX_DEPTH = 1_000_000


class LazyWord:
    """One infinite word; symbols are produced when first indexed."""

    __slots__ = ("_batch", "_col")

    def __init__(self, batch: "WordBatch", col: int):
        self._batch = batch
        self._col = col

    def __getitem__(self, i: int) -> int:
        if i >= MAX_DEPTH:
            raise RuntimeError("word depth cap exceeded; identical words?")
        self._batch.ensure(i + 1)
        return int(self._batch._rows[i][self._col])

    def prefix(self, k: int) -> tuple:
        self._batch.ensure(k)
        return tuple(int(r[self._col]) for r in self._batch._rows[:k])


class WordBatch:
    """n words whose symbol matrix grows row-by-row via `extend`.

    extend(rows) must return a (rows, n) integer array holding the next
    `rows` symbols of every word.  It is called with geometrically growing
    requests, so emitters may batch their work.
    """

    def __init__(self, n: int, extend):
        self.n = n
        self._extend = extend
        self._rows: list[np.ndarray] = []

    @property
    def depth(self) -> int:
        return len(self._rows)

    def ensure(self, depth: int) -> None:
        if depth <= len(self._rows):
            return
        if depth > MAX_DEPTH:
            raise RuntimeError("batch depth cap exceeded")
        # grow at least geometrically to amortize emitter calls
        want = max(depth - len(self._rows), len(self._rows), 4)
        block = np.asarray(self._extend(want))
        if block.shape != (want, self.n):
            raise ValueError(
                f"emitter returned shape {block.shape}, wanted {(want, self.n)}")
        self._rows.extend(block)

    def matrix(self, depth: int) -> np.ndarray:
        """First `depth` rows as one (depth, n) array."""
        self.ensure(depth)
        if depth == 0:
            return np.zeros((0, self.n), dtype=int)
        return np.vstack(self._rows[:depth])

    def word(self, i: int) -> LazyWord:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return LazyWord(self, i)

    def words(self) -> list[LazyWord]:
        return [LazyWord(self, i) for i in range(self.n)]
