"""Command-line entry point: ``memplan <command> ...``.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 oracle cap.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from memplan import bench
from memplan.bounds import compute_bounds
from memplan.generate import (
    CORPUS_MAX_RECORDS,
    SMALL_CORPUS_MAX_RECORDS,
    dump_document,
    generate_model,
    write_corpus,
)
from memplan.model import DEFAULT_ALIGNMENT, ModelError, load_records
from memplan.offsets import OFFSET_STRATEGIES, offsets_from_shared
from memplan.oracle import OFFSETS_CAP, SHARED_CAP, OracleCapExceeded, optimal_offsets, optimal_shared
from memplan.render import render
from memplan.shared import SHARED_STRATEGIES
from memplan.verify import load_plan, validate_plan

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_ORACLE_CAP = 0, 1, 2, 3

DEFAULT_STRATEGY = {"shared": "greedy-by-size-improved", "offsets": "greedy-by-size-offsets"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_json(path: str) -> Any:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return json.loads(text)


def _write(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _records(args):
    return load_records(_read_json(args.model), args.align)


def make_plan(records, mode: str, strategy: str):
    if mode == "shared":
        if strategy not in SHARED_STRATEGIES:
            raise UsageError(f"strategy {strategy!r} is not a shared-mode strategy "
                             f"(choose from {', '.join(SHARED_STRATEGIES)})")
        return SHARED_STRATEGIES[strategy](records)
    if strategy in OFFSET_STRATEGIES:
        return OFFSET_STRATEGIES[strategy](records)
    if strategy.startswith(bench.CONVERTED_PREFIX):
        base = strategy[len(bench.CONVERTED_PREFIX):]
        if base in SHARED_STRATEGIES:
            return offsets_from_shared(SHARED_STRATEGIES[base](records))
    choices = [*OFFSET_STRATEGIES, *(bench.CONVERTED_PREFIX + s for s in SHARED_STRATEGIES)]
    raise UsageError(f"strategy {strategy!r} is not an offsets-mode strategy "
                     f"(choose from {', '.join(choices)})")


def cmd_plan(args) -> int:
    records = _records(args)
    strategy = args.strategy or DEFAULT_STRATEGY[args.mode]
    plan = make_plan(records, args.mode, strategy)
    report = validate_plan(plan, records)
    if not report.ok:
        print(json.dumps(report.to_dict(), indent=1), file=sys.stderr)
        return EXIT_INVALID
    _write(json.dumps(plan.to_document(), indent=1) + "\n", args.output)
    return EXIT_OK


def cmd_bounds(args) -> int:
    print(json.dumps(compute_bounds(_records(args)).to_dict(), indent=1))
    return EXIT_OK


def cmd_validate(args) -> int:
    records = _records(args)
    report = validate_plan(load_plan(_read_json(args.plan)), records)
    print(json.dumps(report.to_dict(), indent=1))
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_oracle(args) -> int:
    records = _records(args)
    if args.mode == "shared":
        result = optimal_shared(records, cap=args.oracle_cap or SHARED_CAP)
    else:
        result = optimal_offsets(records, cap=args.oracle_cap or OFFSETS_CAP)
    print(json.dumps({
        "optimum": result.optimum,
        "explored": result.explored,
        "plan": result.witness_plan.to_document(),
    }, indent=1))
    return EXIT_OK


def cmd_render(args) -> int:
    records = _records(args)
    plan = load_plan(_read_json(args.plan))
    report = validate_plan(plan, records)
    if not report.ok:
        print(json.dumps(report.to_dict(), indent=1), file=sys.stderr)
        return EXIT_INVALID
    _write(render(plan, records, args.format), args.output)
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.corpus:
        small = args.small
        seeds = range(1, args.count + 1)
        write_corpus(Path(args.corpus), seeds, SMALL_CORPUS_MAX_RECORDS if small else CORPUS_MAX_RECORDS)
        return EXIT_OK
    doc = generate_model(args.seed, args.ops, args.tensors, args.max_size, args.residual_prob)
    _write(dump_document(doc), args.output)
    return EXIT_OK


def cmd_bench(args) -> int:
    strategies = args.strategies.split(",") if args.strategies else bench.ALL_STRATEGIES
    unknown = [s for s in strategies if s not in bench.STRATEGY_MODES]
    if unknown:
        raise UsageError(f"unknown strategies: {', '.join(unknown)}")
    paths = []
    for src in args.corpus:
        p = Path(src)
        paths.extend(bench.corpus_files(p) if p.is_dir() else [p])
    if not paths:
        raise UsageError("corpus is empty")
    rows = bench.run_bench(paths, strategies, args.oracle_cap, args.align, args.jobs)
    if args.format == "csv":
        text = bench.format_csv(rows, strategies, args.timing)
    elif args.format == "json":
        text = bench.format_json(rows, args.timing)
    else:
        text = bench.format_table(rows, strategies)
    _write(text, args.output)
    bad = [(r.instance, v) for r in rows for v in r.violations()]
    for instance, v in bad:
        print(f"{instance}: {v}", file=sys.stderr)
    return EXIT_INVALID if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="memplan", description="Static memory planning for inference graphs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def model_args(p, with_model=True):
        if with_model:
            p.add_argument("model", help="model or records JSON document ('-' for stdin)")
        p.add_argument("--align", type=int, default=DEFAULT_ALIGNMENT,
                       help="tensor size alignment in bytes (graph documents only)")

    p = sub.add_parser("plan", help="compute a memory plan")
    model_args(p)
    p.add_argument("--mode", choices=["shared", "offsets"], default="offsets")
    p.add_argument("--strategy")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("bounds", help="print both lower bounds")
    model_args(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("validate", help="check a plan against a model")
    p.add_argument("plan")
    model_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("oracle", help="exact optimum for small instances")
    model_args(p)
    p.add_argument("--mode", choices=["shared", "offsets"], default="offsets")
    p.add_argument("--oracle-cap", type=int, default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("render", help="draw a plan as ASCII or SVG")
    p.add_argument("plan")
    model_args(p)
    p.add_argument("--format", choices=["ascii", "svg"], default="ascii")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("gen", help="generate a synthetic model document or corpus")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--ops", type=int, default=5)
    p.add_argument("--tensors", type=int, default=None)
    p.add_argument("--max-size", type=int, default=4096)
    p.add_argument("--residual-prob", type=float, default=0.0)
    p.add_argument("--corpus", help="write a whole corpus into this directory instead")
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--small", action="store_true", help=f"corpus of <= {SMALL_CORPUS_MAX_RECORDS} records")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run strategies over a corpus")
    p.add_argument("corpus", nargs="+", help="corpus directories or individual JSON files")
    p.add_argument("--strategies", help="comma-separated subset")
    p.add_argument("--format", choices=["csv", "json", "table"], default="csv")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--oracle-cap", type=int, default=OFFSETS_CAP,
                   help="run the exact oracle on instances with at most this many records (0 = off)")
    p.add_argument("--align", type=int, default=DEFAULT_ALIGNMENT)
    p.add_argument("--timing", action="store_true", help="fill the time_us column")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"memplan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OracleCapExceeded as exc:
        print(f"memplan: {exc}", file=sys.stderr)
        return EXIT_ORACLE_CAP
    except (ModelError, ValueError, OSError, KeyError) as exc:
        print(f"memplan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
