"""Lower bounds on footprint for both sharing modes."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

from memplan.model import TensorUsageRecord, operator_profiles, positional_maximums


@dataclass(frozen=True)
class BoundsReport:
    shared_lower_bound: int
    offset_lower_bound: int
    max_profile_cardinality: int

    def to_dict(self) -> dict[str, int]:
        return asdict(self)


def shared_objects_lower_bound(records: Sequence[TensorUsageRecord]) -> int:
    """Sum of positional maximums.

    The i-th largest shared object can never be smaller than the largest
    i-th element across all sorted operator profiles.
    """
    return positional_maximums(records).total()


def offset_lower_bound(records: Sequence[TensorUsageRecord]) -> int:
    """Largest operator breadth: everything in one profile is resident at once."""
    return max((p.breadth for p in operator_profiles(records)), default=0)


def compute_bounds(records: Sequence[TensorUsageRecord]) -> BoundsReport:
    maxima = positional_maximums(records)
    return BoundsReport(
        shared_lower_bound=maxima.total(),
        offset_lower_bound=offset_lower_bound(records),
        max_profile_cardinality=len(maxima),
    )


def naive_footprint(records: Sequence[TensorUsageRecord]) -> int:
    return sum(r.size for r in records)
