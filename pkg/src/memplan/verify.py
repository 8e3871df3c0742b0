"""Plan validation and footprint accounting."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence, Union

from memplan.model import TensorUsageRecord
from memplan.offsets import OffsetPlan
from memplan.shared import SharedObjectPlan

OVERLAP_IN_OBJECT = "overlap-in-object"
OVERLAP_IN_MEMORY = "overlap-in-memory"
UNASSIGNED = "unassigned"
SIZE_MISMATCH = "size-mismatch"
NEGATIVE_OFFSET = "negative-offset"
FOOTPRINT_MISMATCH = "footprint-mismatch"


@dataclass(frozen=True, order=True)
class Violation:
    """One problem in a plan.

    ``a`` and ``b`` are tensor ids for pairwise kinds; for ``size-mismatch``
    ``a`` is the object id; for ``footprint-mismatch`` ``a`` is the claimed
    footprint and ``b`` the recomputed one. Single-tensor kinds leave ``b``
    as None.
    """

    kind: str
    a: int
    b: Optional[int] = None

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "a": self.a, "b": self.b}


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "violations": [v.to_dict() for v in self.violations],
            "warnings": list(self.warnings),
        }


def _conflicting_pairs(group: Sequence[TensorUsageRecord]):
    # Sweep by first_op so only pairs that can overlap are compared.
    ordered = sorted(group, key=lambda r: (r.first_op, r.tensor_id))
    for i, r in enumerate(ordered):
        for x in ordered[i + 1:]:
            if x.first_op > r.last_op:
                break
            yield r, x


def _pair(kind: str, r: TensorUsageRecord, x: TensorUsageRecord) -> Violation:
    a, b = sorted((r.tensor_id, x.tensor_id))
    return Violation(kind, a, b)


def validate_shared(plan: SharedObjectPlan, records: Sequence[TensorUsageRecord]) -> ValidationReport:
    report = ValidationReport()
    sizes = plan.object_sizes()
    members: dict[int, list[TensorUsageRecord]] = defaultdict(list)
    for r in records:
        oid = plan.assignment.get(r.tensor_id)
        if oid is None or oid not in sizes:
            report.violations.append(Violation(UNASSIGNED, r.tensor_id))
        else:
            members[oid].append(r)

    for oid, group in members.items():
        for r, x in _conflicting_pairs(group):
            report.violations.append(_pair(OVERLAP_IN_OBJECT, r, x))
    for oid, size in sizes.items():
        needed = max((r.size for r in members.get(oid, ())), default=0)
        if size != needed:
            report.violations.append(Violation(SIZE_MISMATCH, oid))

    report.violations.sort()
    return report


def validate_offsets(
    plan: OffsetPlan,
    records: Sequence[TensorUsageRecord],
    lower_bound: int | None = None,
) -> ValidationReport:
    report = ValidationReport()
    placed = []
    for r in records:
        off = plan.assignment.get(r.tensor_id)
        if off is None:
            report.violations.append(Violation(UNASSIGNED, r.tensor_id))
            continue
        if off < 0:
            report.violations.append(Violation(NEGATIVE_OFFSET, r.tensor_id))
        placed.append(r)

    for r, x in _conflicting_pairs(placed):
        ro, xo = plan.assignment[r.tensor_id], plan.assignment[x.tensor_id]
        if max(ro, xo) < min(ro + r.size, xo + x.size):
            report.violations.append(_pair(OVERLAP_IN_MEMORY, r, x))

    actual = max((plan.assignment[r.tensor_id] + r.size for r in placed), default=0)
    if plan.footprint != actual:
        report.violations.append(Violation(FOOTPRINT_MISMATCH, plan.footprint, actual))
    if lower_bound is None and records:
        from memplan.bounds import offset_lower_bound

        lower_bound = offset_lower_bound(records)
    if report.ok and lower_bound is not None and plan.footprint < lower_bound:
        report.warnings.append(
            f"footprint {plan.footprint} below lower bound {lower_bound}: planner bug"
        )
    report.violations.sort()
    return report


def validate_plan(
    plan: Union[SharedObjectPlan, OffsetPlan], records: Sequence[TensorUsageRecord]
) -> ValidationReport:
    if isinstance(plan, SharedObjectPlan):
        return validate_shared(plan, records)
    return validate_offsets(plan, records)


def footprint(
    plan: Union[SharedObjectPlan, OffsetPlan],
    records: Sequence[TensorUsageRecord] | None = None,
) -> int:
    """Sum of object sizes (shared) or highest end address (offsets).

    Offset plans need ``records`` for the recomputation; without them the
    plan's own claimed footprint is returned.
    """
    if isinstance(plan, SharedObjectPlan):
        return sum(o.size for o in plan.objects)
    if records is None:
        return plan.footprint
    return max((plan.assignment[r.tensor_id] + r.size for r in records), default=0)


def load_plan(doc: dict[str, Any]) -> Union[SharedObjectPlan, OffsetPlan]:
    mode = doc.get("mode")
    if mode == "shared":
        return SharedObjectPlan.from_document(doc)
    if mode == "offsets":
        return OffsetPlan.from_document(doc)
    raise ValueError(f"unknown plan mode {mode!r}")
