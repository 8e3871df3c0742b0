"""Exhaustive optimal solvers for small instances.

These are ground truth for the greedy strategies, not planners: their cost
is exponential in the record count and they refuse inputs above a cap.

Offset search and canonical placements
--------------------------------------
Take any valid offset plan and repeatedly slide blocks down while they stay
valid. The footprint can only shrink, and in the final plan each block sits
either at offset 0 or directly on top of a time-overlapping block (its offset
equals that block's end). Order the blocks by (offset, tensor id): every
block's support comes strictly earlier, because sizes are positive. So some
optimal plan is produced by placing blocks one at a time in non-decreasing
offset order, each at 0 or at the end of an already placed co-live block.
That finite search space is what :func:`optimal_offsets` enumerates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from memplan.bounds import naive_footprint, offset_lower_bound, shared_objects_lower_bound
from memplan.model import TensorUsageRecord
from memplan.offsets import OffsetPlan
from memplan.shared import SharedObject, SharedObjectPlan

SHARED_CAP = 10
OFFSETS_CAP = 8


class OracleCapExceeded(ValueError):
    pass


@dataclass
class OracleResult:
    optimum: int
    witness_plan: Union[SharedObjectPlan, OffsetPlan]
    explored: int


def _conflicts(records: Sequence[TensorUsageRecord]) -> list[list[bool]]:
    return [[a is not b and a.overlaps(b) for b in records] for a in records]


def optimal_shared(records: Sequence[TensorUsageRecord], cap: int = SHARED_CAP) -> OracleResult:
    """Minimum total object size over all conflict-free partitions.

    Records are enumerated as restricted-growth strings (record i joins an
    existing group or opens group ``max+1``), largest records first so each
    group's size is fixed by its first member.
    """
    n = len(records)
    if n > cap:
        raise OracleCapExceeded(f"instance too large for oracle ({n} records > cap {cap})")
    recs = sorted(records, key=lambda r: (-r.size, r.tensor_id))
    conflict = _conflicts(recs)
    lower = shared_objects_lower_bound(recs) if recs else 0

    best_cost = naive_footprint(recs) + 1
    best_groups: list[int] = []
    groups: list[list[int]] = []
    labels = [0] * n
    explored = 0

    def search(i: int, cost: int) -> bool:
        nonlocal best_cost, best_groups, explored
        explored += 1
        if cost >= best_cost:
            return False
        if i == n:
            best_cost, best_groups = cost, labels[:]
            return best_cost == lower
        r = i
        for g, members in enumerate(groups):
            if any(conflict[r][m] for m in members):
                continue
            members.append(r)
            labels[r] = g
            done = search(i + 1, cost)
            members.pop()
            if done:
                return True
        groups.append([r])
        labels[r] = len(groups) - 1
        done = search(i + 1, cost + recs[r].size)
        groups.pop()
        return done

    search(0, 0)
    if n == 0:
        best_cost = 0

    sizes: dict[int, int] = {}
    for idx, g in enumerate(best_groups):
        sizes[g] = max(sizes.get(g, 0), recs[idx].size)
    plan = SharedObjectPlan(
        objects=[SharedObject(g, s) for g, s in sorted(sizes.items())],
        assignment={recs[idx].tensor_id: g for idx, g in sorted(enumerate(best_groups), key=lambda p: recs[p[0]].tensor_id)},
    )
    return OracleResult(best_cost, plan, explored)


def optimal_offsets(records: Sequence[TensorUsageRecord], cap: int = OFFSETS_CAP) -> OracleResult:
    """Branch and bound over canonical placements (see module docstring)."""
    n = len(records)
    if n > cap:
        raise OracleCapExceeded(f"instance too large for oracle ({n} records > cap {cap})")
    recs = sorted(records, key=lambda r: r.tensor_id)
    conflict = _conflicts(recs)
    lower = offset_lower_bound(recs) if recs else 0

    best_cost = naive_footprint(recs) + 1
    best_offsets: list[int] = []
    offsets = [-1] * n
    explored = 0

    def fits(r: int, off: int) -> bool:
        size = recs[r].size
        for x in range(n):
            ox = offsets[x]
            if ox >= 0 and conflict[r][x] and max(off, ox) < min(off + size, ox + recs[x].size):
                return False
        return True

    def search(placed: int, last_key: tuple[int, int], height: int) -> bool:
        nonlocal best_cost, best_offsets, explored
        explored += 1
        if max(height, lower) >= best_cost:
            return False
        if placed == n:
            best_cost, best_offsets = height, offsets[:]
            return best_cost == lower
        for r in range(n):
            if offsets[r] >= 0:
                continue
            candidates = {0}
            for x in range(n):
                if offsets[x] >= 0 and conflict[r][x]:
                    candidates.add(offsets[x] + recs[x].size)
            for off in sorted(candidates):
                if (off, r) <= last_key or not fits(r, off):
                    continue
                offsets[r] = off
                done = search(placed + 1, (off, r), max(height, off + recs[r].size))
                offsets[r] = -1
                if done:
                    return True
        return False

    search(0, (-1, -1), 0)
    if n == 0:
        best_cost = 0
    plan = OffsetPlan({recs[i].tensor_id: best_offsets[i] for i in range(n)}, best_cost)
    return OracleResult(best_cost, plan, explored)
