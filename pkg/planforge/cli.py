#!/usr/bin/env python
"""
cli.py

Command-line interface for planforge: search with built-in or plugin heuristics,
synthesize heuristics with an LLM, validate plans and run benchmarks.

Usage:
  python -m planforge.cli solve --instance F [--algorithm gbfs] [--heuristic hmd|blind|plugin:PATH]
  python -m planforge.cli synth --instance F --strategy tsr --provider offline --fixtures DIR
  python -m planforge.cli validate --instance F --plan F
  python -m planforge.cli bench --suite DIR --config F --report out.csv [--jobs N]

Exit codes: 0 solved/valid, 1 not solved, 2 usage or input error, 3 internal error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from .config import GIB, BudgetPolicy, HeuristicMix, Limits, configure_logging
from .errors import PlanForgeError, SchemaViolation
from .model import TaskModel, load_instance_file

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NOT_SOLVED = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3

PROVIDERS = {"http": "http_api", "offline": "offline_fixtures"}


def _load(args) -> TaskModel:
    model = load_instance_file(args.instance)
    if args.domain and args.domain != model.domain_name:
        raise SchemaViolation("domain", f"instance is a {model.domain_name!r} task, "
                                        f"not {args.domain!r}")
    return model


def _print_run(run) -> None:
    print("\n=== Run Results ===")
    print(f"Instance: {run.domain}/{run.instance_id}")
    print(f"Configuration: {run.configuration}")
    print(f"Outcome: {run.outcome.value}")
    if run.plan is not None:
        print(f"Plan length: {len(run.plan)}")
    if run.attempts:
        print(f"Attempts: {len(run.attempts)} ({run.compile_failures} failed to compile)")
        print(f"Tokens: {run.input_tokens} in / {run.output_tokens} out")
    print(f"Time: api {run.api_seconds:.2f}s, compile {run.compile_seconds:.2f}s, "
          f"search {run.search_seconds:.2f}s, wall {run.wall_seconds:.2f}s")


def _write_outputs(args, model: TaskModel, run) -> None:
    from .validator import save_plan

    if run.plan is not None and args.plan_out:
        save_plan(args.plan_out, model, run.plan)
    if getattr(args, "record_out", None):
        Path(args.record_out).write_text(run.model_dump_json(indent=2) + "\n", encoding="utf-8")


def solve_command(args) -> int:
    """
    Search one instance with a built-in heuristic or a plugin heuristic source file.
    """
    from .heuristics import HeuristicKind, HeuristicSpec
    from .strategies import run_builtin, run_plugin

    spec = HeuristicSpec.parse(args.heuristic)
    model = _load(args)
    limits = Limits(wall_clock_seconds=args.time_limit, memory_bytes=args.memory_limit,
                    max_expansions=args.max_expansions)
    logger.info(f"Solving {model.instance_id} with {args.algorithm} and {spec}")

    if spec.kind is HeuristicKind.PLUGIN:
        run = run_plugin(model, spec.plugin_path, args.algorithm, limits,
                         work_dir=Path(args.work_dir) if args.work_dir else None)
    else:
        run = run_builtin(model, spec, args.algorithm, limits)
    _print_run(run)
    _write_outputs(args, model, run)
    return EXIT_OK if run.solved else EXIT_NOT_SOLVED


def synth_command(args) -> int:
    """
    Run the FC or TSR strategy on one instance.
    """
    from .strategies import run_fc, run_tsr
    from .synthesis.config import LlmConfig

    llm_config = LlmConfig(provider=PROVIDERS[args.provider],
                           api_flavor=args.api_flavor,
                           model_id=args.model,
                           fixtures_dir=args.fixtures,
                           log_level=args.log_level)
    mix = args.mix or (HeuristicMix.REFINED.value if args.refine else HeuristicMix.UNREFINED.value)
    budget = BudgetPolicy(total_seconds=args.budget,
                          slice_seconds=min(args.slice, args.budget),
                          memory_bytes=args.memory_limit,
                          max_heuristics=args.max_heuristics,
                          max_compile_retries=args.max_compile_retries,
                          strategize=args.strategize,
                          refine=args.refine,
                          heuristic_mix=mix,
                          prefetch=args.prefetch,
                          cache_domain_phases=args.cache_domain_phases)
    model = _load(args)
    strategy = run_fc if args.strategy == "fc" else run_tsr
    run = strategy(model, llm_config, budget,
                   work_dir=Path(args.work_dir) if args.work_dir else None)
    _print_run(run)
    _write_outputs(args, model, run)
    return EXIT_OK if run.solved else EXIT_NOT_SOLVED


def validate_command(args) -> int:
    """
    Replay a plan file against an instance.
    """
    from .validator import load_plan, validate

    model = _load(args)
    report = validate(model, load_plan(args.plan))
    print("\n=== Validation ===")
    print(f"Verdict: {report}")
    print(f"States visited: {len(report.trace)}")
    return EXIT_OK if report.valid else EXIT_NOT_SOLVED


def bench_command(args) -> int:
    """
    Run a suite under every configuration of a bench config and write the report.
    """
    from .bench import load_bench_config, run_bench
    from .reporting import instances_path, report

    config = load_bench_config(args.config)
    records = run_bench(args.suite, config, jobs=args.jobs)
    rows = report(records, args.report)
    print("\n=== Coverage ===")
    for row in rows:
        print(f"  {row.domain:<12} {row.configuration:<20} {row.coverage:>7}  "
              f"compile failure rate {row.compile_failure_rate:.3f}")
    print(f"\nReport: {args.report}")
    print(f"Per-instance times: {instances_path(Path(args.report))}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='planforge',
        description='Planning with LLM-synthesized heuristics',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__
    )
    parser.add_argument('--log-level', default='INFO',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'])
    subparsers = parser.add_subparsers(dest='command', help='Command to run')

    def instance_args(sub):
        sub.add_argument('--domain', help='Expected domain name (checked against the instance)')
        sub.add_argument('--instance', required=True, help='Instance JSON file')

    # Solve command
    solve_parser = subparsers.add_parser('solve', help='Search one instance')
    instance_args(solve_parser)
    solve_parser.add_argument('--algorithm', choices=['bfs', 'gbfs'], default='gbfs')
    solve_parser.add_argument('--heuristic', default='hmd',
                              help='blind, hmd or plugin:PATH (default: hmd)')
    solve_parser.add_argument('--time-limit', type=float, default=600.0,
                              help='Seconds (default: 600)')
    solve_parser.add_argument('--memory-limit', type=int, default=8 * GIB,
                              help='Bytes (default: 8 GiB)')
    solve_parser.add_argument('--max-expansions', type=int, default=None)
    solve_parser.add_argument('--plan-out', help='Write the plan file here')
    solve_parser.add_argument('--work-dir', help='Build directory for plugin heuristics')

    # Synth command
    synth_parser = subparsers.add_parser('synth', help='Solve with LLM-synthesized heuristics')
    instance_args(synth_parser)
    synth_parser.add_argument('--strategy', choices=['fc', 'tsr'], default='tsr')
    synth_parser.add_argument('--model', default='gpt-4.1', help='Provider model id')
    synth_parser.add_argument('--provider', choices=sorted(PROVIDERS), default='offline')
    synth_parser.add_argument('--api-flavor', choices=['openai', 'anthropic'], default='openai')
    synth_parser.add_argument('--fixtures', help='Offline response fixtures directory')
    synth_parser.add_argument('--strategize', action=argparse.BooleanOptionalAction, default=True)
    synth_parser.add_argument('--refine', action=argparse.BooleanOptionalAction, default=False)
    synth_parser.add_argument('--mix', choices=[m.value for m in HeuristicMix],
                              help='Which phase produces each attempt (default from --refine)')
    synth_parser.add_argument('--budget', type=float, default=600.0, help='Total seconds')
    synth_parser.add_argument('--slice', type=float, default=100.0, help='TSR slice seconds')
    synth_parser.add_argument('--max-heuristics', type=int, default=5)
    synth_parser.add_argument('--max-compile-retries', type=int, default=10)
    synth_parser.add_argument('--memory-limit', type=int, default=8 * GIB)
    synth_parser.add_argument('--prefetch', action='store_true',
                              help='Request the next heuristic while a worker runs')
    synth_parser.add_argument('--cache-domain-phases', action='store_true')
    synth_parser.add_argument('--work-dir', help='Build directory for workers')
    synth_parser.add_argument('--plan-out', help='Write the plan file here')
    synth_parser.add_argument('--record-out', help='Write the run record JSON here')

    # Validate command
    validate_parser = subparsers.add_parser('validate', help='Validate a plan file')
    instance_args(validate_parser)
    validate_parser.add_argument('--plan', required=True, help='Plan JSON file')

    # Bench command
    bench_parser = subparsers.add_parser('bench', help='Run a benchmark suite')
    bench_parser.add_argument('--suite', required=True, help='Directory of instance files')
    bench_parser.add_argument('--config', required=True, help='Bench config JSON')
    bench_parser.add_argument('--report', required=True, help='Coverage CSV output')
    bench_parser.add_argument('--jobs', type=int, default=1)

    return parser


COMMANDS = {
    'solve': solve_command,
    'synth': synth_command,
    'validate': validate_command,
    'bench': bench_command,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the CLI; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    if not args.command:
        parser.print_help()
        return EXIT_USAGE

    configure_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except (PlanForgeError, ValidationError, ValueError, FileNotFoundError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"Internal error in {args.command}: {e}", exc_info=True)
        return EXIT_INTERNAL


if __name__ == '__main__':
    sys.exit(main())
