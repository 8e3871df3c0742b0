"""Computation graph ingestion and tensor liveness.

A model document describes operators and the tensors they read and write.
From it we fix one execution order and derive, for each intermediate
tensor, the inclusive range of operator indices during which it must stay
resident (its usage record). Everything the planners need, operator
profiles, breadths and positional maximums, is computed from those records.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import jsonschema

logger = logging.getLogger(__name__)

DEFAULT_ALIGNMENT = 64

MODEL_SCHEMA: dict[str, Any] = {
    "type": "object",
    "oneOf": [
        {
            "required": ["tensors", "operators"],
            "properties": {
                "tensors": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["id", "size"],
                        "properties": {
                            "id": {"type": "integer"},
                            "size": {"type": "integer"},
                            "boundary": {"type": "boolean"},
                        },
                    },
                },
                "operators": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["id", "inputs", "outputs"],
                        "properties": {
                            "id": {"type": "integer"},
                            "inputs": {"type": "array", "items": {"type": "integer"}},
                            "outputs": {"type": "array", "items": {"type": "integer"}},
                        },
                    },
                },
            },
        },
        {
            "required": ["records"],
            "properties": {
                "records": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["id", "first", "last", "size"],
                        "properties": {
                            "id": {"type": "integer"},
                            "first": {"type": "integer"},
                            "last": {"type": "integer"},
                            "size": {"type": "integer"},
                        },
                    },
                }
            },
        },
    ],
}


class ModelError(ValueError):
    """Raised for malformed model or record documents."""


@dataclass(frozen=True)
class Tensor:
    tensor_id: int
    size: int
    boundary: bool = False


@dataclass(frozen=True)
class Operator:
    op_id: int
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]


@dataclass(frozen=True)
class NetworkModel:
    operators: tuple[Operator, ...]
    tensors: tuple[Tensor, ...]

    @property
    def intermediate_ids(self) -> list[int]:
        return sorted(t.tensor_id for t in self.tensors if not t.boundary)


@dataclass(frozen=True, order=True)
class TensorUsageRecord:
    """Inclusive operator-index interval plus aligned size of one tensor."""

    tensor_id: int
    first_op: int
    last_op: int
    size: int

    def __post_init__(self) -> None:
        if self.size <= 0:
            raise ModelError(f"non-positive size for tensor {self.tensor_id}")
        if not 0 <= self.first_op <= self.last_op:
            raise ModelError(
                f"bad interval [{self.first_op}, {self.last_op}] for tensor {self.tensor_id}"
            )

    def overlaps(self, other: TensorUsageRecord) -> bool:
        return max(self.first_op, other.first_op) <= min(self.last_op, other.last_op)

    def covers(self, op_index: int) -> bool:
        return self.first_op <= op_index <= self.last_op


@dataclass(frozen=True)
class OperatorProfile:
    op_index: int
    records: tuple[TensorUsageRecord, ...]
    breadth: int

    @property
    def sizes(self) -> list[int]:
        return [r.size for r in self.records]


@dataclass(frozen=True)
class PositionalMaximums:
    values: tuple[int, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> int:
        return self.values[i]

    def total(self) -> int:
        return sum(self.values)


def align_size(size: int, alignment: int) -> int:
    if alignment <= 0:
        raise ModelError("alignment must be positive")
    return -(-size // alignment) * alignment


def _check_schema(document: Mapping[str, Any]) -> None:
    try:
        jsonschema.validate(document, MODEL_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ModelError(f"document does not match schema: {exc.message}") from exc


def parse_model(document: Mapping[str, Any]) -> NetworkModel:
    """Build a validated :class:`NetworkModel` from a graph document.

    Raises:
        ModelError: on duplicate ids, non-positive sizes, dangling tensor
            references, tensors with several (or, for intermediates, no)
            producers, or a cyclic operator graph.
    """
    _check_schema(document)
    if "tensors" not in document:
        raise ModelError("document has no graph (tensors/operators)")

    tensors: dict[int, Tensor] = {}
    for entry in document["tensors"]:
        tid = entry["id"]
        if tid in tensors:
            raise ModelError(f"duplicate id: tensor {tid}")
        if entry["size"] <= 0:
            raise ModelError(f"non-positive size: tensor {tid}")
        tensors[tid] = Tensor(tid, entry["size"], bool(entry.get("boundary", False)))

    operators: dict[int, Operator] = {}
    producer: dict[int, int] = {}
    for entry in document["operators"]:
        oid = entry["id"]
        if oid in operators:
            raise ModelError(f"duplicate id: operator {oid}")
        for tid in (*entry["inputs"], *entry["outputs"]):
            if tid not in tensors:
                raise ModelError(f"dangling tensor reference: operator {oid} uses tensor {tid}")
        for tid in entry["outputs"]:
            if tid in producer:
                raise ModelError(
                    f"multiple producers for tensor {tid}: operators {producer[tid]} and {oid}"
                )
            producer[tid] = oid
        operators[oid] = Operator(oid, tuple(entry["inputs"]), tuple(entry["outputs"]))

    for tid, t in tensors.items():
        if not t.boundary and tid not in producer:
            raise ModelError(f"intermediate tensor {tid} has no producing operator")

    model = NetworkModel(
        operators=tuple(operators[k] for k in sorted(operators)),
        tensors=tuple(tensors[k] for k in sorted(tensors)),
    )
    _topological_order(model, producer)  # raises on cycles
    return model


def _topological_order(model: NetworkModel, producer: Mapping[int, int]) -> list[int]:
    successors: dict[int, set[int]] = {op.op_id: set() for op in model.operators}
    indegree = {op.op_id: 0 for op in model.operators}
    for op in model.operators:
        preds = {producer[t] for t in op.inputs if t in producer} - {op.op_id}
        if any(producer.get(t) == op.op_id for t in op.inputs):
            raise ModelError(f"cycle detected: operator {op.op_id} consumes its own output")
        for p in preds:
            successors[p].add(op.op_id)
        indegree[op.op_id] = len(preds)

    ready = [oid for oid, d in indegree.items() if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        oid = heapq.heappop(ready)
        order.append(oid)
        for s in successors[oid]:
            indegree[s] -= 1
            if indegree[s] == 0:
                heapq.heappush(ready, s)
    if len(order) != len(model.operators):
        raise ModelError("cycle detected in operator graph")
    return order


def execution_order(model: NetworkModel) -> list[int]:
    """Kahn topological sort; among ready operators the smallest id runs first."""
    producer = {t: op.op_id for op in model.operators for t in op.outputs}
    return _topological_order(model, producer)


def usage_records(
    model: NetworkModel,
    order: Sequence[int] | None = None,
    alignment: int = DEFAULT_ALIGNMENT,
) -> list[TensorUsageRecord]:
    """One record per intermediate tensor, ordered by tensor id."""
    if order is None:
        order = execution_order(model)
    position = {oid: i for i, oid in enumerate(order)}
    ops = {op.op_id: op for op in model.operators}

    uses: dict[int, list[int]] = {}
    consumed: set[int] = set()
    for oid in order:
        op = ops[oid]
        for tid in op.inputs:
            uses.setdefault(tid, []).append(position[oid])
            consumed.add(tid)
        for tid in op.outputs:
            uses.setdefault(tid, []).append(position[oid])

    records = []
    for t in model.tensors:
        if t.boundary:
            continue
        if t.tensor_id not in consumed:
            logger.warning("tensor %d is produced but never consumed", t.tensor_id)
        idx = uses[t.tensor_id]
        records.append(
            TensorUsageRecord(t.tensor_id, min(idx), max(idx), align_size(t.size, alignment))
        )
    return records


def parse_records(document: Mapping[str, Any]) -> list[TensorUsageRecord]:
    """Read the raw ``{"records": [...]}`` form; sizes are taken as already aligned."""
    _check_schema(document)
    if "records" not in document:
        raise ModelError("document has no records list")
    seen: set[int] = set()
    records = []
    for entry in document["records"]:
        tid = entry["id"]
        if tid in seen:
            raise ModelError(f"duplicate id: record {tid}")
        seen.add(tid)
        if entry["size"] <= 0:
            raise ModelError(f"non-positive size: record {tid}")
        records.append(TensorUsageRecord(tid, entry["first"], entry["last"], entry["size"]))
    return sorted(records, key=lambda r: r.tensor_id)


def load_records(document: Mapping[str, Any], alignment: int = DEFAULT_ALIGNMENT) -> list[TensorUsageRecord]:
    """Records from either document form."""
    if "records" in document:
        return parse_records(document)
    model = parse_model(document)
    return usage_records(model, execution_order(model), alignment)


def records_document(records: Iterable[TensorUsageRecord]) -> dict[str, Any]:
    return {
        "records": [
            {"id": r.tensor_id, "first": r.first_op, "last": r.last_op, "size": r.size}
            for r in sorted(records, key=lambda r: r.tensor_id)
        ]
    }


def num_operators(records: Sequence[TensorUsageRecord]) -> int:
    return max((r.last_op for r in records), default=-1) + 1


def _profile_key(r: TensorUsageRecord) -> tuple[int, int]:
    return (-r.size, r.tensor_id)


def operator_profile(records: Sequence[TensorUsageRecord], op_index: int) -> OperatorProfile:
    members = sorted((r for r in records if r.covers(op_index)), key=_profile_key)
    return OperatorProfile(op_index, tuple(members), sum(r.size for r in members))


def operator_profiles(records: Sequence[TensorUsageRecord]) -> list[OperatorProfile]:
    """Profiles of every operator index 0..max(last_op), built in one sweep."""
    n_ops = num_operators(records)
    buckets: list[list[TensorUsageRecord]] = [[] for _ in range(n_ops)]
    for r in records:
        for i in range(r.first_op, r.last_op + 1):
            buckets[i].append(r)
    profiles = []
    for i, members in enumerate(buckets):
        members.sort(key=_profile_key)
        profiles.append(OperatorProfile(i, tuple(members), sum(r.size for r in members)))
    return profiles


def positional_maximums(records: Sequence[TensorUsageRecord]) -> PositionalMaximums:
    values: list[int] = []
    for profile in operator_profiles(records):
        for i, r in enumerate(profile.records):
            if i == len(values):
                values.append(r.size)
            elif r.size > values[i]:
                values[i] = r.size
    return PositionalMaximums(tuple(values))
