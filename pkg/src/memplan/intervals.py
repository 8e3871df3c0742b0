"""Per-object interval indexes used to answer suitability and gap queries.

Two interchangeable implementations share the same duck-typed surface:

* :class:`LinearIntervals` keeps a plain list and scans it.
* :class:`IntervalTree` is a treap keyed by interval start and augmented
  with the maximum end in each subtree, giving logarithmic expected cost
  for overlap and nearest-neighbour queries.

All intervals are inclusive operator-index ranges ``[lo, hi]``.
"""

from __future__ import annotations

import math
import random
from typing import Iterator

INF = math.inf


class LinearIntervals:
    def __init__(self) -> None:
        self._items: list[tuple[int, int]] = []

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(sorted(self._items))

    def add(self, lo: int, hi: int) -> None:
        self._items.append((lo, hi))

    def overlaps(self, lo: int, hi: int) -> bool:
        return any(max(lo, a) <= min(hi, b) for a, b in self._items)

    def gap(self, lo: int, hi: int) -> float:
        """Distance to the nearest stored interval; ``inf`` if none, 0 on overlap."""
        best = INF
        for a, b in self._items:
            if max(lo, a) <= min(hi, b):
                return 0
            d = a - hi if a > hi else lo - b
            best = min(best, d)
        return best


class _Node:
    __slots__ = ("lo", "hi", "prio", "left", "right", "max_hi")

    def __init__(self, lo: int, hi: int, prio: float) -> None:
        self.lo = lo
        self.hi = hi
        self.prio = prio
        self.left: _Node | None = None
        self.right: _Node | None = None
        self.max_hi = hi

    def pull(self) -> None:
        m = self.hi
        if self.left is not None and self.left.max_hi > m:
            m = self.left.max_hi
        if self.right is not None and self.right.max_hi > m:
            m = self.right.max_hi
        self.max_hi = m


class IntervalTree:
    """Augmented treap; deterministic because its priority stream is seeded."""

    def __init__(self, seed: int = 0) -> None:
        self._root: _Node | None = None
        self._rng = random.Random(seed)
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def __iter__(self) -> Iterator[tuple[int, int]]:
        stack: list[_Node] = []
        node = self._root
        while stack or node is not None:
            while node is not None:
                stack.append(node)
                node = node.left
            node = stack.pop()
            yield (node.lo, node.hi)
            node = node.right

    def add(self, lo: int, hi: int) -> None:
        self._root = self._insert(self._root, _Node(lo, hi, self._rng.random()))
        self._size += 1

    def _insert(self, root: _Node | None, node: _Node) -> _Node:
        if root is None:
            return node
        if (node.lo, node.hi) < (root.lo, root.hi):
            root.left = self._insert(root.left, node)
            if root.left.prio > root.prio:
                root = self._rotate_right(root)
        else:
            root.right = self._insert(root.right, node)
            if root.right.prio > root.prio:
                root = self._rotate_left(root)
        root.pull()
        return root

    @staticmethod
    def _rotate_right(root: _Node) -> _Node:
        pivot = root.left
        assert pivot is not None
        root.left = pivot.right
        pivot.right = root
        root.pull()
        pivot.pull()
        return pivot

    @staticmethod
    def _rotate_left(root: _Node) -> _Node:
        pivot = root.right
        assert pivot is not None
        root.right = pivot.left
        pivot.left = root
        root.pull()
        pivot.pull()
        return pivot

    def overlaps(self, lo: int, hi: int) -> bool:
        # If the left subtree reaches lo but holds no overlap, nothing to the
        # right can overlap either (starts there are larger still).
        node = self._root
        while node is not None:
            if max(lo, node.lo) <= min(hi, node.hi):
                return True
            if node.left is not None and node.left.max_hi >= lo:
                node = node.left
            else:
                node = node.right
        return False

    def _max_hi_below(self, lo: int) -> float:
        """Largest end among intervals starting strictly before ``lo``."""
        best = -INF
        node = self._root
        while node is not None:
            if node.lo < lo:
                best = max(best, node.hi)
                if node.left is not None:
                    best = max(best, node.left.max_hi)
                node = node.right
            else:
                node = node.left
        return best

    def _min_lo_above(self, hi: int) -> float:
        """Smallest start strictly after ``hi``."""
        best = INF
        node = self._root
        while node is not None:
            if node.lo > hi:
                best = min(best, node.lo)
                node = node.left
            else:
                node = node.right
        return best

    def gap(self, lo: int, hi: int) -> float:
        if self.overlaps(lo, hi):
            return 0
        before = self._max_hi_below(lo)
        after = self._min_lo_above(hi)
        return min(lo - before, after - hi)
