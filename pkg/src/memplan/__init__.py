"""Static memory planning for neural-network inference graphs."""

from memplan.bounds import BoundsReport, compute_bounds, offset_lower_bound, shared_objects_lower_bound
from memplan.model import (
    ModelError,
    NetworkModel,
    OperatorProfile,
    PositionalMaximums,
    TensorUsageRecord,
    execution_order,
    load_records,
    operator_profile,
    parse_model,
    positional_maximums,
    usage_records,
)
from memplan.offsets import (
    OffsetPlan,
    greedy_by_breadth_offsets,
    greedy_by_size_offsets,
    naive_plan,
    offsets_from_shared,
)
from memplan.oracle import OracleResult, optimal_offsets, optimal_shared
from memplan.shared import (
    SharedObject,
    SharedObjectPlan,
    greedy_by_breadth,
    greedy_by_size,
    greedy_by_size_improved,
    is_suitable,
)
from memplan.verify import ValidationReport, footprint, validate_offsets, validate_shared

__version__ = "0.1.0"
