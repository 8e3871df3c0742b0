"""Gantt-style memory maps: operator index across, memory up.

Shared plans get one lane per object; offset plans use the real byte axis.
In ASCII the byte axis is compressed to one text row per band between
distinct block boundaries, so co-live blocks never share a cell.
"""

from __future__ import annotations

from typing import Sequence, Union
from xml.sax.saxutils import escape

from memplan.model import TensorUsageRecord, num_operators
from memplan.offsets import OffsetPlan
from memplan.shared import SharedObjectPlan

Plan = Union[SharedObjectPlan, OffsetPlan]

PALETTE = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
]


def _boxes(plan: Plan, records: Sequence[TensorUsageRecord]):
    """(record, lo, hi) in the plan's vertical unit: bytes or lane bases."""
    if isinstance(plan, SharedObjectPlan):
        base = {}
        cursor = 0
        for obj in sorted(plan.objects, key=lambda o: o.object_id):
            base[obj.object_id] = cursor
            cursor += obj.size
        for r in records:
            lo = base[plan.assignment[r.tensor_id]]
            yield r, lo, lo + r.size
    else:
        for r in records:
            lo = plan.assignment[r.tensor_id]
            yield r, lo, lo + r.size


def render_ascii(plan: Plan, records: Sequence[TensorUsageRecord]) -> str:
    records = sorted(records, key=lambda r: r.tensor_id)
    boxes = list(_boxes(plan, records))
    n_ops = num_operators(records)
    edges = sorted({0, plan.footprint} | {lo for _, lo, _ in boxes} | {hi for _, _, hi in boxes})
    width = max([len(str(r.tensor_id)) for r in records] + [len(str(n_ops - 1)), 1]) + 1

    grid = [["." * width for _ in range(n_ops)] for _ in range(len(edges) - 1)]
    row_of = {e: i for i, e in enumerate(edges)}
    for r, lo, hi in boxes:
        label = str(r.tensor_id).rjust(width)
        for row in range(row_of[lo], row_of[hi]):
            for op in range(r.first_op, r.last_op + 1):
                grid[row][op] = label

    label_w = len(str(edges[-1]))
    lines = []
    for row in reversed(range(len(grid))):
        lines.append(f"{edges[row]:>{label_w}} |" + "".join(grid[row]))
    lines.append(" " * label_w + " +" + "-" * (width * n_ops))
    lines.append(" " * label_w + "  " + "".join(str(i).rjust(width) for i in range(n_ops)))
    mode = "shared" if isinstance(plan, SharedObjectPlan) else "offsets"
    lines.append(f"mode={mode} footprint={plan.footprint}")
    return "\n".join(lines) + "\n"


def render_svg(
    plan: Plan,
    records: Sequence[TensorUsageRecord],
    width: int = 640,
    height: int = 400,
    margin: int = 40,
) -> str:
    records = sorted(records, key=lambda r: r.tensor_id)
    n_ops = max(num_operators(records), 1)
    total = max(plan.footprint, 1)
    col = (width - 2 * margin) / n_ops
    scale = (height - 2 * margin) / total

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="#333"/>',
    ]
    for r, lo, hi in _boxes(plan, records):
        x = margin + r.first_op * col
        w = (r.last_op - r.first_op + 1) * col
        y = height - margin - hi * scale
        h = (hi - lo) * scale
        color = PALETTE[r.tensor_id % len(PALETTE)]
        title = escape(f"tensor {r.tensor_id}: ops {r.first_op}-{r.last_op}, bytes {lo}-{hi}")
        out.append(
            f'<rect class="tensor" data-tensor="{r.tensor_id}" x="{x:.2f}" y="{y:.2f}" '
            f'width="{w:.2f}" height="{h:.2f}" fill="{color}" stroke="#000" stroke-width="0.5">'
            f"<title>{title}</title></rect>"
        )
        out.append(
            f'<text x="{x + w / 2:.2f}" y="{y + h / 2:.2f}" font-size="10" '
            f'text-anchor="middle" dominant-baseline="middle">{r.tensor_id}</text>'
        )
    for i in range(n_ops):
        out.append(
            f'<text x="{margin + (i + 0.5) * col:.2f}" y="{height - margin + 14}" '
            f'font-size="10" text-anchor="middle">{i}</text>'
        )
    out.append(
        f'<text x="{margin}" y="{margin - 8}" font-size="12">footprint {plan.footprint} bytes</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render(plan: Plan, records: Sequence[TensorUsageRecord], fmt: str = "ascii") -> str:
    if fmt == "ascii":
        return render_ascii(plan, records)
    if fmt == "svg":
        return render_svg(plan, records)
    raise ValueError(f"unknown render format {fmt!r}")
