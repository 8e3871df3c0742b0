"""Corpus benchmark: every strategy, both lower bounds and the naive baseline.

Output is one CSV row per (instance, strategy). Rows are ordered by instance
name and a fixed strategy order, so results do not depend on worker count.
Wall times are only written when timing is requested; without it two runs
over the same corpus produce byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from memplan.bounds import compute_bounds, naive_footprint
from memplan.model import DEFAULT_ALIGNMENT, ModelError, TensorUsageRecord, load_records
from memplan.offsets import OFFSET_STRATEGIES, offsets_from_shared
from memplan.oracle import OFFSETS_CAP, SHARED_CAP, optimal_offsets, optimal_shared
from memplan.shared import SHARED_STRATEGIES
from memplan.verify import validate_offsets, validate_shared

logger = logging.getLogger(__name__)

CSV_HEADER = ["instance", "strategy", "mode", "footprint", "lower_bound", "naive", "time_us",
              "optimum", "gap"]
MIB = 2**20

CONVERTED_PREFIX = "from-"
STRATEGY_MODES: dict[str, str] = {
    **{name: "shared" for name in SHARED_STRATEGIES},
    "greedy-by-size-offsets": "offsets",
    "greedy-by-breadth-offsets": "offsets",
    **{CONVERTED_PREFIX + name: "offsets" for name in SHARED_STRATEGIES},
    "naive": "offsets",
}
ALL_STRATEGIES = list(STRATEGY_MODES)

# Lower Bound and Naive rows of the published comparison tables, in MB.
REFERENCE_TABLES: dict[str, dict[str, float]] = {
    "mobilenet_v1": {"shared_lb": 4.594, "offsets_lb": 4.594, "naive": 19.248},
    "mobilenet_v2": {"shared_lb": 6.604, "offsets_lb": 5.742, "naive": 26.313},
    "deeplab_v3": {"shared_lb": 6.105, "offsets_lb": 4.320, "naive": 48.642},
    "inception_v3": {"shared_lb": 8.955, "offsets_lb": 7.914, "naive": 54.010},
    "posenet": {"shared_lb": 6.347, "offsets_lb": 6.271, "naive": 28.556},
    "blazeface": {"shared_lb": 0.518, "offsets_lb": 0.492, "naive": 2.698},
}


def to_mb(n_bytes: int) -> float:
    return round(n_bytes / MIB, 4)


def reference_key(instance: str) -> Optional[str]:
    key = re.sub(r"[^a-z0-9]+", "_", instance.lower()).strip("_")
    return key if key in REFERENCE_TABLES else None


@dataclass
class BenchRow:
    instance: str
    n_records: int
    shared_lower_bound: int
    offset_lower_bound: int
    naive: int
    footprints: dict[str, int] = field(default_factory=dict)
    times_us: dict[str, int] = field(default_factory=dict)
    shared_optimum: Optional[int] = None
    offsets_optimum: Optional[int] = None

    def lower_bound(self, strategy: str) -> int:
        if STRATEGY_MODES[strategy] == "shared":
            return self.shared_lower_bound
        return self.offset_lower_bound

    def optimum(self, strategy: str) -> Optional[int]:
        if STRATEGY_MODES[strategy] == "shared":
            return self.shared_optimum
        return self.offsets_optimum

    def violations(self) -> list[str]:
        """Invariant breaches; empty for a healthy row."""
        out = []
        if self.shared_lower_bound < self.offset_lower_bound:
            out.append("shared lower bound below offset lower bound")
        for s, fp in self.footprints.items():
            if fp < self.lower_bound(s):
                out.append(f"{s}: footprint {fp} below lower bound {self.lower_bound(s)}")
            if fp > self.naive:
                out.append(f"{s}: footprint {fp} above naive {self.naive}")
            opt = self.optimum(s)
            if opt is not None and fp < opt:
                out.append(f"{s}: footprint {fp} below optimum {opt}")
        shared = [fp for s, fp in self.footprints.items() if STRATEGY_MODES[s] == "shared"]
        offsets = [fp for s, fp in self.footprints.items() if STRATEGY_MODES[s] == "offsets"]
        if shared and offsets and min(offsets) > min(shared):
            out.append("best offsets footprint exceeds best shared footprint")
        out.extend(self.reference_violations())
        return out

    def reference_violations(self) -> list[str]:
        key = reference_key(self.instance)
        if key is None:
            return []
        ref = REFERENCE_TABLES[key]
        out = []
        for s, fp in self.footprints.items():
            lb = ref["shared_lb"] if STRATEGY_MODES[s] == "shared" else ref["offsets_lb"]
            mb = round(fp / MIB, 3)
            if mb < lb:
                out.append(f"{s}: {mb} MB below published lower bound {lb} MB for {key}")
            if mb > ref["naive"]:
                out.append(f"{s}: {mb} MB above published naive {ref['naive']} MB for {key}")
        return out

    def csv_rows(self, strategies: Sequence[str], timing: bool) -> list[list[Any]]:
        rows = []
        for s in strategies:
            if s not in self.footprints:
                continue
            fp = self.footprints[s]
            opt = self.optimum(s)
            rows.append([
                self.instance, s, STRATEGY_MODES[s], fp, self.lower_bound(s), self.naive,
                self.times_us[s] if timing else "",
                "" if opt is None else opt,
                "" if opt is None else fp - opt,
            ])
        return rows

    def to_dict(self, timing: bool) -> dict[str, Any]:
        d: dict[str, Any] = {
            "instance": self.instance,
            "records": self.n_records,
            "shared_lower_bound": self.shared_lower_bound,
            "offset_lower_bound": self.offset_lower_bound,
            "naive": self.naive,
            "naive_mb": to_mb(self.naive),
            "footprints": dict(self.footprints),
            "footprints_mb": {s: to_mb(fp) for s, fp in self.footprints.items()},
            "shared_optimum": self.shared_optimum,
            "offsets_optimum": self.offsets_optimum,
            "violations": self.violations(),
        }
        if timing:
            d["times_us"] = dict(self.times_us)
        return d


def _timed(fn, *args):
    start = time.perf_counter_ns()
    result = fn(*args)
    return result, (time.perf_counter_ns() - start) // 1000


def bench_records(
    instance: str,
    records: Sequence[TensorUsageRecord],
    strategies: Sequence[str] = ALL_STRATEGIES,
    oracle_cap: int = OFFSETS_CAP,
) -> BenchRow:
    """Run the requested strategies on one instance; every plan is validated."""
    bounds = compute_bounds(records)
    row = BenchRow(
        instance=instance,
        n_records=len(records),
        shared_lower_bound=bounds.shared_lower_bound,
        offset_lower_bound=bounds.offset_lower_bound,
        naive=naive_footprint(records),
    )
    shared_plans = {}
    for s in strategies:
        if s in SHARED_STRATEGIES:
            plan, us = _timed(SHARED_STRATEGIES[s], records)
            shared_plans[s] = plan
            report = validate_shared(plan, records)
        elif s.startswith(CONVERTED_PREFIX):
            base = s[len(CONVERTED_PREFIX):]
            if base not in shared_plans:
                shared_plans[base] = SHARED_STRATEGIES[base](records)
            plan, us = _timed(offsets_from_shared, shared_plans[base])
            report = validate_offsets(plan, records)
        elif s in OFFSET_STRATEGIES:
            plan, us = _timed(OFFSET_STRATEGIES[s], records)
            report = validate_offsets(plan, records)
        else:
            raise ValueError(f"unknown strategy {s!r}")
        if not report.ok:
            raise RuntimeError(f"{instance}/{s}: plan failed validation: {report.violations[:3]}")
        row.footprints[s] = plan.footprint
        row.times_us[s] = us

    if 0 < len(records) <= min(oracle_cap, SHARED_CAP):
        row.shared_optimum = optimal_shared(records, cap=SHARED_CAP).optimum
    if 0 < len(records) <= min(oracle_cap, OFFSETS_CAP):
        row.offsets_optimum = optimal_offsets(records, cap=OFFSETS_CAP).optimum
    return row


def _bench_file(args) -> Optional[BenchRow]:
    path, strategies, oracle_cap, alignment = args
    try:
        records = load_records(json.loads(Path(path).read_text()), alignment)
    except (OSError, ValueError, ModelError) as exc:
        logger.warning("skipping unreadable instance %s: %s", path, exc)
        return None
    if not records:
        logger.warning("skipping %s: no intermediate tensors", path)
        return None
    return bench_records(Path(path).stem, records, strategies, oracle_cap)


def corpus_files(directory: Path) -> list[Path]:
    return sorted(Path(directory).glob("*.json"), key=lambda p: p.name)


def run_bench(
    paths: Iterable[Path],
    strategies: Sequence[str] = ALL_STRATEGIES,
    oracle_cap: int = OFFSETS_CAP,
    alignment: int = DEFAULT_ALIGNMENT,
    jobs: int = 1,
) -> list[BenchRow]:
    for s in strategies:
        if s not in STRATEGY_MODES:
            raise ValueError(f"unknown strategy {s!r}")
    tasks = [(str(p), list(strategies), oracle_cap, alignment) for p in sorted(paths, key=lambda p: Path(p).name)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_bench_file, tasks, chunksize=8))
    else:
        results = [_bench_file(t) for t in tasks]
    rows = [r for r in results if r is not None]
    return sorted(rows, key=lambda r: r.instance)


def format_csv(rows: Sequence[BenchRow], strategies: Sequence[str] = ALL_STRATEGIES, timing: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerows(row.csv_rows(strategies, timing))
    return buf.getvalue()


def format_json(rows: Sequence[BenchRow], timing: bool = False) -> str:
    return json.dumps([r.to_dict(timing) for r in rows], indent=1) + "\n"


def format_table(rows: Sequence[BenchRow], strategies: Sequence[str] = ALL_STRATEGIES) -> str:
    """Strategies down, instances across, MB to four decimals."""
    names = [r.instance for r in rows]
    lines = []
    label_w = max([len(s) for s in strategies] + [len("Lower Bound (offsets)")])
    lines.append("Strategy".ljust(label_w) + "".join(f"{n:>14}" for n in names))
    for s in strategies:
        cells = [f"{to_mb(r.footprints[s]):>14.4f}" if s in r.footprints else f"{'-':>14}" for r in rows]
        lines.append(s.ljust(label_w) + "".join(cells))
    lines.append("Lower Bound (shared)".ljust(label_w) + "".join(f"{to_mb(r.shared_lower_bound):>14.4f}" for r in rows))
    lines.append("Lower Bound (offsets)".ljust(label_w) + "".join(f"{to_mb(r.offset_lower_bound):>14.4f}" for r in rows))
    lines.append("Naive".ljust(label_w) + "".join(f"{to_mb(r.naive):>14.4f}" for r in rows))
    return "\n".join(lines) + "\n"
