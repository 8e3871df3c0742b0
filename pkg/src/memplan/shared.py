"""Shared-object planning: tensors share whole buffers, never concurrently.

Every strategy returns a :class:`SharedObjectPlan` whose footprint is the
sum of object sizes. Object ids are assigned in creation order, so plans are
fully deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence, Union

from memplan.intervals import IntervalTree, LinearIntervals
from memplan.model import TensorUsageRecord, operator_profiles, positional_maximums

# Record count above which "auto" switches to the interval tree.
TREE_THRESHOLD = 256

IntervalIndex = Union[LinearIntervals, IntervalTree]


@dataclass
class SharedObject:
    object_id: int
    size: int


@dataclass
class SharedObjectPlan:
    objects: list[SharedObject] = field(default_factory=list)
    assignment: dict[int, int] = field(default_factory=dict)

    @property
    def footprint(self) -> int:
        return sum(o.size for o in self.objects)

    def object_sizes(self) -> dict[int, int]:
        return {o.object_id: o.size for o in self.objects}

    def to_document(self) -> dict[str, Any]:
        return {
            "mode": "shared",
            "objects": [{"id": o.object_id, "size": o.size} for o in self.objects],
            "assignment": {str(t): o for t, o in sorted(self.assignment.items())},
            "footprint": self.footprint,
        }

    @classmethod
    def from_document(cls, doc: Mapping[str, Any]) -> SharedObjectPlan:
        if doc.get("mode") != "shared":
            raise ValueError("not a shared-mode plan document")
        return cls(
            objects=[SharedObject(int(o["id"]), int(o["size"])) for o in doc["objects"]],
            assignment={int(t): int(o) for t, o in doc["assignment"].items()},
        )


def is_suitable(
    assignment: Mapping[int, int],
    object_id: int,
    record: TensorUsageRecord,
    records: Sequence[TensorUsageRecord],
) -> bool:
    """True iff no record already on ``object_id`` shares an operator with ``record``.

    This is the plain linear scan over all records; planners use the
    per-object indexes in :mod:`memplan.intervals` instead.
    """
    for x in records:
        if assignment.get(x.tensor_id) != object_id:
            continue
        if max(record.first_op, x.first_op) <= min(record.last_op, x.last_op):
            return False
    return True


class _Pool:
    """Objects under construction plus one interval index per object."""

    def __init__(self, n_records: int, suitability: str) -> None:
        if suitability == "auto":
            suitability = "tree" if n_records > TREE_THRESHOLD else "linear"
        if suitability not in ("linear", "tree"):
            raise ValueError(f"unknown suitability implementation {suitability!r}")
        self.use_tree = suitability == "tree"
        self.sizes: list[int] = []
        self.indexes: list[IntervalIndex] = []
        self.assignment: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self.sizes)

    def create(self, record: TensorUsageRecord) -> int:
        oid = len(self.sizes)
        self.sizes.append(record.size)
        self.indexes.append(IntervalTree(seed=oid) if self.use_tree else LinearIntervals())
        self.assign(oid, record)
        return oid

    def assign(self, oid: int, record: TensorUsageRecord) -> None:
        self.indexes[oid].add(record.first_op, record.last_op)
        self.assignment[record.tensor_id] = oid
        if record.size > self.sizes[oid]:
            self.sizes[oid] = record.size

    def suitable(self, oid: int, record: TensorUsageRecord) -> bool:
        return not self.indexes[oid].overlaps(record.first_op, record.last_op)

    def gap(self, oid: int, record: TensorUsageRecord) -> float:
        return self.indexes[oid].gap(record.first_op, record.last_op)

    def plan(self) -> SharedObjectPlan:
        return SharedObjectPlan(
            objects=[SharedObject(i, s) for i, s in enumerate(self.sizes)],
            assignment=dict(sorted(self.assignment.items())),
        )


def greedy_by_breadth(
    records: Sequence[TensorUsageRecord], suitability: str = "auto"
) -> SharedObjectPlan:
    """Assign tensors operator by operator, widest operators first.

    Object choice follows the original pseudocode literally: the smallest
    suitable object that already fits; failing that, the largest suitable
    object, grown to fit; failing that, a new object.
    """
    pool = _Pool(len(records), suitability)
    profiles = sorted(operator_profiles(records), key=lambda p: (-p.breadth, p.op_index))
    for profile in profiles:
        for t in profile.records:
            if t.tensor_id in pool.assignment:
                continue
            best: int | None = None
            for oid in range(len(pool)):
                size = pool.sizes[oid]
                is_better = True
                if best is not None:
                    best_size = pool.sizes[best]
                    if best_size < t.size:
                        if size <= best_size:
                            is_better = False
                    elif size >= best_size or size < t.size:
                        is_better = False
                if is_better and pool.suitable(oid, t):
                    best = oid
            if best is None:
                pool.create(t)
            else:
                pool.assign(best, t)
    return pool.plan()


def _size_order(records: Sequence[TensorUsageRecord]) -> list[TensorUsageRecord]:
    return sorted(records, key=lambda r: (-r.size, r.first_op, r.tensor_id))


def greedy_by_size(
    records: Sequence[TensorUsageRecord], suitability: str = "auto"
) -> SharedObjectPlan:
    """Largest tensors first, each onto the smallest suitable object.

    Objects are created in non-increasing size order, so no object ever grows.
    """
    pool = _Pool(len(records), suitability)
    for t in _size_order(records):
        best: int | None = None
        for oid in range(len(pool)):
            if best is not None and pool.sizes[oid] >= pool.sizes[best]:
                continue
            if pool.suitable(oid, t):
                best = oid
        if best is None:
            pool.create(t)
        else:
            pool.assign(best, t)
    return pool.plan()


def size_stages(records: Sequence[TensorUsageRecord]) -> list[list[TensorUsageRecord]]:
    """Split records into stages delimited by distinct positional maximums.

    With distinct maximums ``d0 > d1 > ...`` the stages are: size == d0,
    d1 < size < d0, size == d1, d2 < size < d1, ... and finally everything
    below the smallest maximum. Empty stages are dropped.
    """
    thresholds = sorted(set(positional_maximums(records).values), reverse=True)
    stages: list[list[TensorUsageRecord]] = []
    upper = math.inf
    for d in thresholds:
        stages.append([r for r in records if d < r.size < upper])
        stages.append([r for r in records if r.size == d])
        upper = d
    stages.append([r for r in records if r.size < upper])
    return [sorted(s, key=lambda r: (-r.size, r.tensor_id)) for s in stages if s]


def _interval_distance(a: TensorUsageRecord, b: TensorUsageRecord) -> int:
    if b.first_op > a.last_op:
        return b.first_op - a.last_op
    return a.first_op - b.last_op


def greedy_by_size_improved(
    records: Sequence[TensorUsageRecord], suitability: str = "auto"
) -> SharedObjectPlan:
    """Greedy by size processed in positional-maximum stages.

    Inside a stage, the (tensor, suitable object) pair leaving the smallest
    idle gap on the object is assigned first; ties go to the smaller gap,
    then object id, then tensor id. When no pair remains, the largest
    leftover tensor opens a new object and pairing resumes.
    """
    pool = _Pool(len(records), suitability)

    for stage in size_stages(records):
        # best[tid] = (gap, object_id) of the best suitable object, or None.
        best: dict[int, tuple[float, int] | None] = {}
        pending = {r.tensor_id: r for r in stage}

        def rescan(r: TensorUsageRecord) -> tuple[float, int] | None:
            cand = None
            for oid in range(len(pool)):
                if pool.suitable(oid, r):
                    key = (pool.gap(oid, r), oid)
                    if cand is None or key < cand:
                        cand = key
            return cand

        for r in stage:
            best[r.tensor_id] = rescan(r)

        while pending:
            choice = None
            for tid, key in best.items():
                if key is not None and (choice is None or (key, tid) < choice):
                    choice = (key, tid)
            if choice is None:
                # Stage order is by size descending, so the first pending is largest.
                tid = next(r.tensor_id for r in stage if r.tensor_id in pending)
                placed = pending.pop(tid)
                del best[tid]
                oid = pool.create(placed)
            else:
                (_, oid), tid = choice
                placed = pending.pop(tid)
                del best[tid]
                pool.assign(oid, placed)

            # Only pairs involving ``oid`` changed.
            for other_id, key in best.items():
                other = pending[other_id]
                if placed.overlaps(other):
                    if key is not None and key[1] == oid:
                        best[other_id] = rescan(other)
                    continue
                cand = (_interval_distance(placed, other), oid)
                if key is not None and key[1] == oid:
                    best[other_id] = min(key, cand)
                elif (key is None or cand < key) and pool.suitable(oid, other):
                    best[other_id] = cand
    return pool.plan()


SHARED_STRATEGIES = {
    "greedy-by-breadth": greedy_by_breadth,
    "greedy-by-size": greedy_by_size,
    "greedy-by-size-improved": greedy_by_size_improved,
}
