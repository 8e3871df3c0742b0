"""Offset planning: every tensor gets a byte offset inside one arena."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from memplan.model import TensorUsageRecord, operator_profiles
from memplan.shared import SharedObjectPlan


@dataclass
class OffsetPlan:
    assignment: dict[int, int] = field(default_factory=dict)
    footprint: int = 0

    def to_document(self) -> dict[str, Any]:
        return {
            "mode": "offsets",
            "assignment": {str(t): o for t, o in sorted(self.assignment.items())},
            "footprint": self.footprint,
        }

    @classmethod
    def from_document(cls, doc: Mapping[str, Any]) -> OffsetPlan:
        if doc.get("mode") != "offsets":
            raise ValueError("not an offsets-mode plan document")
        return cls(
            assignment={int(t): int(o) for t, o in doc["assignment"].items()},
            footprint=int(doc["footprint"]),
        )


class _Arena:
    """Placed records kept sorted by (offset, tensor_id) for the gap sweep."""

    def __init__(self) -> None:
        self._keys: list[tuple[int, int]] = []
        self._placed: list[TensorUsageRecord] = []
        self.offsets: dict[int, int] = {}
        self.footprint = 0

    def place(self, t: TensorUsageRecord) -> int:
        prev_offset = 0
        best_offset = None
        smallest_gap = None
        first, last, size = t.first_op, t.last_op, t.size
        for (offset, _), x in zip(self._keys, self._placed):
            if max(first, x.first_op) > min(last, x.last_op):
                continue
            gap = offset - prev_offset
            if gap >= size and (smallest_gap is None or gap < smallest_gap):
                smallest_gap = gap
                best_offset = prev_offset
            prev_offset = max(prev_offset, offset + x.size)
        if best_offset is None:
            best_offset = prev_offset

        self.offsets[t.tensor_id] = best_offset
        self.footprint = max(self.footprint, best_offset + size)
        key = (best_offset, t.tensor_id)
        i = bisect.bisect(self._keys, key)
        self._keys.insert(i, key)
        self._placed.insert(i, t)
        return best_offset

    def plan(self) -> OffsetPlan:
        return OffsetPlan(dict(sorted(self.offsets.items())), self.footprint)


def _place_all(order: Iterable[TensorUsageRecord]) -> OffsetPlan:
    arena = _Arena()
    for t in order:
        arena.place(t)
    return arena.plan()


def greedy_by_size_offsets(records: Sequence[TensorUsageRecord]) -> OffsetPlan:
    """Largest first; each tensor goes into the smallest fitting gap among
    the tensors it is co-live with, or above the highest of them."""
    return _place_all(sorted(records, key=lambda r: (-r.size, r.first_op, r.tensor_id)))


def greedy_by_breadth_offsets(records: Sequence[TensorUsageRecord]) -> OffsetPlan:
    def order():
        seen: set[int] = set()
        for profile in sorted(operator_profiles(records), key=lambda p: (-p.breadth, p.op_index)):
            for t in profile.records:
                if t.tensor_id not in seen:
                    seen.add(t.tensor_id)
                    yield t

    return _place_all(order())


def offsets_from_shared(
    plan: SharedObjectPlan, records: Sequence[TensorUsageRecord] | None = None
) -> OffsetPlan:
    """Lay the shared objects end to end in ascending id order.

    If ``records`` is given the input plan is validated first.
    """
    if records is not None:
        from memplan.verify import validate_shared

        if not validate_shared(plan, records).ok:
            raise ValueError("shared plan failed validation")
    base = {}
    cursor = 0
    for obj in sorted(plan.objects, key=lambda o: o.object_id):
        base[obj.object_id] = cursor
        cursor += obj.size
    return OffsetPlan(
        {t: base[o] for t, o in sorted(plan.assignment.items())},
        cursor,
    )


def naive_plan(records: Sequence[TensorUsageRecord]) -> OffsetPlan:
    cursor = 0
    assignment = {}
    for r in sorted(records, key=lambda r: r.tensor_id):
        assignment[r.tensor_id] = cursor
        cursor += r.size
    return OffsetPlan(assignment, cursor)


OFFSET_STRATEGIES = {
    "greedy-by-size-offsets": greedy_by_size_offsets,
    "greedy-by-breadth-offsets": greedy_by_breadth_offsets,
    "naive": naive_plan,
}
