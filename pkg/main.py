#!/usr/bin/env python3
"""CLI interface for the collision-aware tube allocator."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.alloc import ALLOCATORS
from src.codec import SchemeId
from src.errors import DnaStoreError
from src.pipeline import create_pipeline_from_config, load_config, workload_from_config
from src.plan_store import PlanStore, load_plan_file
from src.primerlib import DEFAULT_LIBRARY_SIZE, MIN_PRIMER_LEN, generate_library, load_library, save_library
from src.report import build_report, render_summary, validate_report, verify_report
from src.workload import MODES

logger = logging.getLogger(__name__)


def _at_least(minimum: int):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid integer: {text!r}")
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}, got {value}")
        return value
    return parse


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--primer-lib', type=str, help='Primer library file (default: primers.path from config)')
    parser.add_argument('--seed', type=_at_least(0), help='Workload seed')
    parser.add_argument('--scheme', choices=[s.value for s in SchemeId], help='Encoding scheme')
    parser.add_argument('--allocator', choices=ALLOCATORS, help='Allocation scheme')
    parser.add_argument('--chunk-bytes', type=_at_least(1), help='Chunk size in bytes')
    parser.add_argument('--payload-len', type=_at_least(12), help='Bases per payload')
    parser.add_argument('--parallel-factor', type=_at_least(1), help='Strands per primer pair')
    parser.add_argument('--k-limit', type=_at_least(1), help='Sequencing limit per file')
    parser.add_argument('--window', type=_at_least(1), help='Collision window length')
    parser.add_argument('--max-edits', type=_at_least(0), help='Edits allowed inside a collision window')
    parser.add_argument('--workload', choices=MODES, help='Random files or planted collision sets')
    parser.add_argument('--total-bytes', type=_at_least(0), help='Random workload size in bytes')
    parser.add_argument('--workers', type=_at_least(1), help='Processes for collision detection')
    parser.add_argument('--out', type=str, help='Output directory (default: output.directory from config)')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='Collision-aware data allocation for multi-tube DNA storage',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Generate a primer library
  python main.py gen-primers --seed 1 --size 2800 --out data/primers.txt

  # Encode a random workload, detect collisions, allocate and report
  python main.py run --primer-lib data/primers.txt --scheme rotation --allocator aware

  # Compare against the sequential baseline on planted collision sets
  python main.py run --workload planted --allocator sequential --out out/seq

  # Chunk-size trade-off sweep (CSV)
  python main.py sweep --primer-lib data/primers.txt

  # Summarize a stored plan
  python main.py report out/plan.json --json
        """
    )
    parser.add_argument(
        '--config',
        type=str,
        default='config/config.yaml',
        help='Path to configuration file (default: config/config.yaml)'
    )
    parser.add_argument('-v', '--verbose', action='store_true', help='Debug logging')

    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    gen_parser = subparsers.add_parser('gen-primers', help='Generate and save a primer library')
    gen_parser.add_argument('--seed', type=_at_least(0), default=1, help='Generator seed (default: 1)')
    gen_parser.add_argument('--size', type=_at_least(2), default=DEFAULT_LIBRARY_SIZE,
                            help=f'Number of primers (default: {DEFAULT_LIBRARY_SIZE})')
    gen_parser.add_argument('--primer-len', type=_at_least(MIN_PRIMER_LEN), default=20,
                            help='Bases per primer (default: 20)')
    gen_parser.add_argument('--out', type=str, required=True, help='Library file to write')

    run_parser = subparsers.add_parser('run', help='Run encode, collide, allocate and report')
    _add_pipeline_flags(run_parser)
    run_parser.add_argument('--json', action='store_true', help='Print the report as JSON')
    run_parser.add_argument('--save-csets', action='store_true', help='Also write the CSET collision dump')

    sweep_parser = subparsers.add_parser('sweep', help='Run the pipeline over several chunk sizes')
    _add_pipeline_flags(sweep_parser)
    sweep_parser.add_argument('--chunk-sizes', type=_at_least(1), nargs='+',
                              help='Chunk sizes in bytes (default: 1K 4K 16K 256K 1M)')

    report_parser = subparsers.add_parser('report', help='Summarize a stored plan')
    report_parser.add_argument('plan', type=str, help='Path to plan.json')
    report_parser.add_argument('--json', action='store_true', help='Print the report as JSON')
    return parser


def apply_overrides(config: Dict[str, Any], args: argparse.Namespace) -> Dict[str, Any]:
    """Fold command-line flags into the configuration sections."""
    overrides = {
        ('workload', 'seed'): args.seed,
        ('workload', 'mode'): args.workload,
        ('workload', 'total_bytes'): args.total_bytes,
        ('codec', 'scheme'): args.scheme,
        ('codec', 'payload_len'): args.payload_len,
        ('capacity', 'parallel_factor'): args.parallel_factor,
        ('allocation', 'allocator'): args.allocator,
        ('allocation', 'chunk_bytes'): args.chunk_bytes,
        ('allocation', 'k_seq_limit'): args.k_limit,
        ('collision', 'window_len'): args.window,
        ('collision', 'max_edits'): args.max_edits,
        ('collision', 'workers'): args.workers,
        ('output', 'directory'): args.out,
    }
    for (section, key), value in overrides.items():
        if value is not None:
            config.setdefault(section, {})[key] = value
    return config


def _pipeline(args: argparse.Namespace, config: Dict[str, Any]):
    # an explicit --primer-lib must exist; the configured path falls back to generation
    library = load_library(args.primer_lib) if args.primer_lib else None
    return create_pipeline_from_config(config, library=library)


def cmd_gen_primers(args: argparse.Namespace) -> None:
    lib = generate_library(args.seed, args.size, args.primer_len)
    save_library(lib, args.out)
    print(f"Wrote {lib.size} primers to {args.out}")


def cmd_run(args: argparse.Namespace, config: Dict[str, Any]) -> None:
    pipeline = _pipeline(args, config)
    allocator = config.get('allocation', {}).get('allocator', 'aware')
    result = pipeline.run(workload_from_config(config), allocator)

    store = PlanStore(config.get('output', {}).get('directory', './out'))
    store.save_plan(result.plan)
    store.save_report(result.report)
    store.save_timings(result.timings)
    if args.save_csets:
        store.save_collision_sets(result.chunks, pipeline.library.size)

    if args.json:
        print(json.dumps(result.report, sort_keys=True, indent=2))
    else:
        print(render_summary(result.report))
        print(f"\nWrote {store.plan_path} and {store.report_path} ({result.timings['total_s']:.2f}s)")


def cmd_sweep(args: argparse.Namespace, config: Dict[str, Any]) -> None:
    pipeline = _pipeline(args, config)
    allocator = config.get('allocation', {}).get('allocator', 'aware')
    sizes = args.chunk_sizes or config.get('report', {}).get('sweep_chunk_sizes')
    rows = pipeline.sweep(workload_from_config(config), sizes, allocator)
    store = PlanStore(config.get('output', {}).get('directory', './out'))
    path = store.save_sweep(rows)
    for row in rows:
        print(", ".join(f"{k}={v}" for k, v in row.items()))
    print(f"\nWrote {path}")


def cmd_report(args: argparse.Namespace) -> int:
    plan_path = Path(args.plan)
    plan = load_plan_file(plan_path)
    stored_path = plan_path.parent / "report.json"
    if stored_path.exists():
        stored = PlanStore(plan_path.parent).load_report()
        validate_report(stored)
        report = stored
        mismatched = verify_report(plan, stored)
        if mismatched:
            print(f"Error: stored report disagrees with the plan on: {', '.join(mismatched)}", file=sys.stderr)
            return 1
    else:
        report = build_report(plan)
    if args.json:
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        print(render_summary(report))
    return 0


def main(argv: Optional[List[str]] = None) -> None:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='[%(levelname)s] %(message)s',
    )

    if not args.command:
        parser.print_help()
        sys.exit(2)

    try:
        if args.command == 'gen-primers':
            cmd_gen_primers(args)
        elif args.command == 'report':
            code = cmd_report(args)
            if code:
                sys.exit(code)
        else:
            config = apply_overrides(load_config(args.config) if Path(args.config).exists() else {}, args)
            if args.command == 'run':
                cmd_run(args, config)
            elif args.command == 'sweep':
                cmd_sweep(args, config)

    except (DnaStoreError, OSError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        if args.verbose:
            import traceback
            traceback.print_exc()
        sys.exit(1)


if __name__ == "__main__":
    main()
